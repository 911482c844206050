//! Arc-length form of the necessary conditions.
//!
//! Along a trajectory, `t(s)` and `X(s) = x(t(s))` are Lipschitz in the
//! arc-length parameter `s`, and the functional becomes `∫ F ds` with
//! `F(t, X, t', X', t'', X'') = L(t, X, X'/t', (X'' - X' t''/t')/t'²) t'`.
//! The profiles below integrate the partials of `F` along `s`.

mod classical;

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalPoint, ExprError, LagrangianExpr};
use crate::trajectory::{reparam_derivatives, ArcLengthChart, Curve, Problem, Trajectory};

pub use classical::{classical_residuals, ClassicalResiduals};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConditionError {
    #[error("t' must be positive, got {0}")]
    NonPositiveTprime(f64),
    #[error("chart was not built from this trajectory")]
    ChartMismatch,
    #[error("component {index} out of range (dimension {dim})")]
    ComponentOutOfRange { index: usize, dim: usize },
    #[error("grid size must be at least 16, got {0}")]
    GridTooSmall(usize),
    #[error("expression domain error at t = {t}: {source}")]
    Domain { t: f64, source: ExprError },
    #[error("profile csv line {line}: {message}")]
    Csv { line: usize, message: String },
}

/// `θ(s) = (t, X, t', X', t'', X'')`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReparamPoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub tprime: f64,
    pub xprime: Vec<f64>,
    pub tsecond: f64,
    pub xsecond: Vec<f64>,
}

impl ReparamPoint {
    /// The point on a curve at time `t` in arc-length coordinates.
    pub fn on_curve(curve: &impl Curve, t: f64) -> Self {
        let st = curve.state(t);
        let (tp, tpp) = reparam_derivatives(&st.xd, &st.xdd);
        ReparamPoint {
            t,
            xprime: st.xd.iter().map(|v| v * tp).collect(),
            xsecond: st
                .xdd
                .iter()
                .zip(&st.xd)
                .map(|(a, v)| a * tp * tp + v * tpp)
                .collect(),
            x: st.x,
            tprime: tp,
            tsecond: tpp,
        }
    }

    /// The time-parameterized point `(t, x, xd, xdd)` that `θ` maps to.
    pub fn mapped(&self) -> EvalPoint {
        let tp = self.tprime;
        let xd: Vec<f64> = self.xprime.iter().map(|v| v / tp).collect();
        let xdd = self
            .xsecond
            .iter()
            .zip(&self.xprime)
            .map(|(a, v)| (a - v * self.tsecond / tp) / (tp * tp))
            .collect();
        EvalPoint::new(self.t, self.x.clone(), xd, xdd)
    }
}

/// `F` and its partials at a [`ReparamPoint`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FPartials {
    pub value: f64,
    pub t: f64,
    pub tprime: f64,
    pub tsecond: f64,
    pub x: Vec<f64>,
    pub xprime: Vec<f64>,
    pub xsecond: Vec<f64>,
}

/// `F(θ)` alone.
pub fn f_value(l: &LagrangianExpr, q: &ReparamPoint) -> Result<f64, ConditionError> {
    if !(q.tprime > 0.0) {
        return Err(ConditionError::NonPositiveTprime(q.tprime));
    }
    let p = q.mapped();
    let v = l
        .eval(&p)
        .map_err(|source| ConditionError::Domain { t: q.t, source })?;
    Ok(v * q.tprime)
}

/// `F` and all `3 + 3n` partials in closed form.
pub fn f_partials(l: &LagrangianExpr, q: &ReparamPoint) -> Result<FPartials, ConditionError> {
    if !(q.tprime > 0.0) {
        return Err(ConditionError::NonPositiveTprime(q.tprime));
    }
    let (tp, tpp) = (q.tprime, q.tsecond);
    let p = q.mapped();
    let d = l
        .partials(&p)
        .map_err(|source| ConditionError::Domain { t: q.t, source })?;
    let inv2 = 1.0 / (tp * tp);

    let mut dtp = d.value;
    let mut dtpp = 0.0;
    for i in 0..l.dim() {
        let xp = q.xprime[i];
        dtp -= d.xd[i] * xp / tp;
        dtp += inv2 * d.xdd[i] * (-2.0 * q.xsecond[i] + 3.0 * tpp * xp / tp);
        dtpp -= inv2 * d.xdd[i] * xp;
    }

    Ok(FPartials {
        value: d.value * tp,
        t: d.t * tp,
        tprime: dtp,
        tsecond: dtpp,
        x: d.x.iter().map(|v| v * tp).collect(),
        xprime: d.xd.iter().zip(&d.xdd).map(|(a, b)| a - b * tpp * inv2).collect(),
        xsecond: d.xdd.iter().map(|v| v / tp).collect(),
    })
}

/// A sampled profile `φ(s)` with constancy metrics.
///
/// Metrics skip the first and last grid point. `deviation` is
/// `(max - min)/(1 + |c_hat|)` of the values; `affine_deviation` is the same
/// spread after removing the least-squares line `intercept + slope·s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionProfile {
    pub s_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub c_hat: f64,
    pub deviation: f64,
    pub slope: f64,
    pub intercept: f64,
    pub affine_deviation: f64,
    pub singular_endpoint: bool,
}

impl ConditionProfile {
    fn from_values(s_grid: Vec<f64>, values: Vec<f64>, singular_endpoint: bool) -> Self {
        let g = values.len();
        let (s_in, v_in) = (&s_grid[1..g - 1], &values[1..g - 1]);
        let c_hat = median(v_in);
        let spread = |v: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
            (hi - lo) / (1.0 + c_hat.abs())
        };
        let deviation = spread(&mut v_in.iter().copied());
        let (intercept, slope) = line_fit(s_in, v_in);
        let affine_deviation = spread(&mut s_in.iter().zip(v_in).map(|(s, v)| v - intercept - slope * s));
        ConditionProfile {
            s_grid,
            values,
            c_hat,
            deviation,
            slope,
            intercept,
            affine_deviation,
            singular_endpoint,
        }
    }

    /// `# c_hat=<v> deviation=<v>` then `s,phi` rows.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# c_hat={:.16e} deviation={:.16e}\ns,phi\n", self.c_hat, self.deviation);
        for (s, v) in self.s_grid.iter().zip(&self.values) {
            let _ = writeln!(out, "{s:.16e},{v:.16e}");
        }
        out
    }

    /// Parse the output of [`to_csv`](Self::to_csv): `(c_hat, deviation, s, phi)`.
    #[allow(clippy::type_complexity)]
    pub fn parse_csv(text: &str) -> Result<(f64, f64, Vec<f64>, Vec<f64>), ConditionError> {
        let err = |line: usize, message: &str| ConditionError::Csv {
            line,
            message: message.to_string(),
        };
        let mut lines = text.lines();
        let meta = lines.next().ok_or_else(|| err(1, "missing metadata"))?;
        let rest = meta.strip_prefix("# ").ok_or_else(|| err(1, "expected `# `"))?;
        let mut fields = rest.split(' ');
        let mut field = |key: &str| -> Result<f64, ConditionError> {
            fields
                .next()
                .and_then(|f| f.strip_prefix(key))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| err(1, &format!("expected {key}<number>")))
        };
        let c_hat = field("c_hat=")?;
        let deviation = field("deviation=")?;
        if lines.next() != Some("s,phi") {
            return Err(err(2, "expected header `s,phi`"));
        }
        let (mut s, mut phi) = (Vec::new(), Vec::new());
        for (i, line) in lines.enumerate() {
            let mut cols = line.split(',');
            let parsed: Option<(f64, f64)> = (|| {
                let a = cols.next()?.parse().ok()?;
                let b = cols.next()?.parse().ok()?;
                cols.next().is_none().then_some((a, b))
            })();
            let (a, b) = parsed.ok_or_else(|| err(i + 3, "expected two numbers"))?;
            s.push(a);
            phi.push(b);
        }
        Ok((c_hat, deviation, s, phi))
    }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}

/// Least-squares `v ≈ c0 + c1·s`, returned as `(c0, c1)`.
fn line_fit(s: &[f64], v: &[f64]) -> (f64, f64) {
    let n = s.len() as f64;
    let sm = s.iter().sum::<f64>() / n;
    let vm = v.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (a, b) in s.iter().zip(v) {
        sxx += (a - sm) * (a - sm);
        sxy += (a - sm) * (b - vm);
    }
    let c1 = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (vm - c1 * sm, c1)
}

fn cumulative_trapezoid(s: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    out.push(0.0);
    for j in 1..f.len() {
        let prev = out[j - 1];
        out.push(prev + 0.5 * (s[j] - s[j - 1]) * (f[j] + f[j - 1]));
    }
    out
}

/// `max |xdd|` on the first or last interval against the RMS of `xdd`.
fn singular_endpoint(traj: &Trajectory) -> bool {
    let norms = traj.sobolev_norms();
    let rms = (norms.norm2_xdd / (traj.b() - traj.a())).sqrt();
    let last = traj.intervals() - 1;
    let peak = [(0, 0.0), (0, 1.0), (last, 0.0), (last, 1.0)]
        .iter()
        .map(|&(k, tau)| crate::trajectory::norm(&traj.state_in(k, tau).xdd))
        .fold(0.0, f64::max);
    peak > 100.0 * rms
}

/// Which partials enter the profile: the `t` block or component `i`.
#[derive(Clone, Copy)]
enum Block {
    Time,
    Component(usize),
}

fn profile(
    p: &Problem,
    traj: &Trajectory,
    chart: &ArcLengthChart,
    grid_size: usize,
    block: Block,
) -> Result<ConditionProfile, ConditionError> {
    if grid_size < 16 {
        return Err(ConditionError::GridTooSmall(grid_size));
    }
    if !chart.matches(traj) {
        return Err(ConditionError::ChartMismatch);
    }
    let l = chart.length();
    let s_grid: Vec<f64> = (0..grid_size)
        .map(|j| {
            if j + 1 == grid_size {
                l
            } else {
                l * j as f64 / (grid_size - 1) as f64
            }
        })
        .collect();
    let rows: Vec<[f64; 3]> = s_grid
        .par_iter()
        .map(|&s| {
            let q = ReparamPoint::on_curve(traj, chart.t_at(s));
            let fp = f_partials(p.lagrangian(), &q)?;
            Ok(match block {
                Block::Time => [fp.tsecond, fp.tprime, fp.t],
                Block::Component(i) => [fp.xsecond[i], fp.xprime[i], fp.x[i]],
            })
        })
        .collect::<Result<_, ConditionError>>()?;

    let lead: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let mid: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let inner: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    let once = cumulative_trapezoid(&s_grid, &mid);
    let twice = cumulative_trapezoid(&s_grid, &cumulative_trapezoid(&s_grid, &inner));
    let values = (0..grid_size).map(|j| lead[j] - once[j] + twice[j]).collect();
    Ok(ConditionProfile::from_values(s_grid, values, singular_endpoint(traj)))
}

/// `φ₀(s) = ∂F/∂t''(θ(s)) - ∫₀ˢ ∂F/∂t' + ∫₀ˢ∫₀^τ ∂F/∂t` on a uniform s-grid.
pub fn dbr_profile(
    p: &Problem,
    traj: &Trajectory,
    chart: &ArcLengthChart,
    grid_size: usize,
) -> Result<ConditionProfile, ConditionError> {
    profile(p, traj, chart, grid_size, Block::Time)
}

/// `φᵢ(s)` for component `i` (1-based), same scheme as [`dbr_profile`].
pub fn el_profile(
    p: &Problem,
    traj: &Trajectory,
    chart: &ArcLengthChart,
    i: usize,
    grid_size: usize,
) -> Result<ConditionProfile, ConditionError> {
    if i == 0 || i > p.n() {
        return Err(ConditionError::ComponentOutOfRange { index: i, dim: p.n() });
    }
    profile(p, traj, chart, grid_size, Block::Component(i - 1))
}

#[cfg(test)]
mod tests;
