//! Arc-length chart `s(t) = ∫_a^t sqrt(1 + |xd|²)` and its inverse.

use super::{norm, Curve, Trajectory, TrajectoryError};
use crate::quadrature::GaussRule;

/// `t'(s)` and `t''(s)` of the arc-length inverse at a point with slope `xd`
/// and second derivative `xdd`: `t' = 1/sqrt(1+|xd|²)`,
/// `t'' = -(xd·xdd) t'^4`.
pub fn reparam_derivatives(xd: &[f64], xdd: &[f64]) -> (f64, f64) {
    let speed2 = 1.0 + xd.iter().map(|v| v * v).sum::<f64>();
    let tp = 1.0 / speed2.sqrt();
    let dot: f64 = xd.iter().zip(xdd).map(|(a, b)| a * b).sum();
    (tp, -dot * tp.powi(4))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArcLengthChart {
    grid: Vec<f64>,
    s_of_t: Vec<f64>,
    // dt/ds at grid times, limited for monotonicity
    inv_slopes: Vec<f64>,
    length: f64,
    s_uniform: Vec<f64>,
    t_of_s: Vec<f64>,
    tprime_of_s: Vec<f64>,
    tsecond_of_s: Vec<f64>,
    fingerprint: u64,
}

impl ArcLengthChart {
    /// `samples` is both the approximate size of the time grid and the size
    /// of the tabulated uniform s-grid.
    pub fn build(traj: &Trajectory, samples: usize) -> Result<Self, TrajectoryError> {
        if samples < 2 {
            return Err(TrajectoryError::TooFewSamples(samples));
        }
        let rule = GaussRule::new(7);
        let per_interval = samples.div_ceil(traj.intervals()).max(1);
        let mut grid = vec![traj.a()];
        let mut s_of_t = vec![0.0];
        let mut speed = vec![speed_at(&traj.state_in(0, 0.0).xd)];
        for k in 0..traj.intervals() {
            let (t0, t1) = (traj.knots[k], traj.knots[k + 1]);
            let h = t1 - t0;
            for j in 0..per_interval {
                let u0 = j as f64 / per_interval as f64;
                let u1 = (j + 1) as f64 / per_interval as f64;
                let ds = rule.integrate(u0, u1, |u| speed_at(&traj.state_in(k, u).xd)) * h;
                let t = if j + 1 == per_interval { t1 } else { t0 + h * u1 };
                grid.push(t);
                s_of_t.push(s_of_t.last().unwrap() + ds);
                speed.push(speed_at(&traj.state_in(k, u1).xd));
            }
        }
        let length = *s_of_t.last().unwrap();

        let mut inv_slopes: Vec<f64> = speed.iter().map(|v| 1.0 / v).collect();
        // Fritsch–Carlson limiter on the exact slopes
        for k in 0..grid.len() - 1 {
            let secant = (grid[k + 1] - grid[k]) / (s_of_t[k + 1] - s_of_t[k]);
            let alpha = inv_slopes[k] / secant;
            let beta = inv_slopes[k + 1] / secant;
            let r2 = alpha * alpha + beta * beta;
            if r2 > 9.0 {
                let tau = 3.0 / r2.sqrt();
                inv_slopes[k] = tau * alpha * secant;
                inv_slopes[k + 1] = tau * beta * secant;
            }
        }

        let mut chart = ArcLengthChart {
            grid,
            s_of_t,
            inv_slopes,
            length,
            s_uniform: Vec::new(),
            t_of_s: Vec::new(),
            tprime_of_s: Vec::new(),
            tsecond_of_s: Vec::new(),
            fingerprint: traj.fingerprint(),
        };
        let ds = length / (samples - 1) as f64;
        for j in 0..samples {
            let s = if j + 1 == samples { length } else { ds * j as f64 };
            let t = chart.t_at(s);
            let st = traj.state(t);
            let (tp, tpp) = reparam_derivatives(&st.xd, &st.xdd);
            chart.s_uniform.push(s);
            chart.t_of_s.push(t);
            chart.tprime_of_s.push(tp);
            chart.tsecond_of_s.push(tpp);
        }
        Ok(chart)
    }

    /// Default resolution: 8 samples per mesh interval.
    pub fn with_default_samples(traj: &Trajectory) -> Result<Self, TrajectoryError> {
        Self::build(traj, 8 * traj.intervals())
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn s_of_t(&self) -> &[f64] {
        &self.s_of_t
    }

    pub fn s_uniform(&self) -> &[f64] {
        &self.s_uniform
    }

    pub fn t_of_s(&self) -> &[f64] {
        &self.t_of_s
    }

    pub fn tprime_of_s(&self) -> &[f64] {
        &self.tprime_of_s
    }

    pub fn tsecond_of_s(&self) -> &[f64] {
        &self.tsecond_of_s
    }

    /// True when the chart was built from exactly this trajectory.
    pub fn matches(&self, traj: &Trajectory) -> bool {
        self.fingerprint == traj.fingerprint()
    }

    /// Inverse map `t(s)` by monotone cubic Hermite interpolation.
    pub fn t_at(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.length);
        let idx = self.s_of_t.partition_point(|&v| v <= s);
        let k = idx.saturating_sub(1).min(self.grid.len() - 2);
        let (s0, s1) = (self.s_of_t[k], self.s_of_t[k + 1]);
        let h = s1 - s0;
        let u = (s - s0) / h;
        let basis = super::HermiteBasis::new(h, u);
        super::dot4(
            &basis.x,
            &[self.grid[k], self.inv_slopes[k], self.grid[k + 1], self.inv_slopes[k + 1]],
        )
    }
}

fn speed_at(xd: &[f64]) -> f64 {
    (1.0 + norm(xd).powi(2)).sqrt()
}
