//! Admissible curves as C¹ piecewise-cubic Hermite functions.
//!
//! A [`Trajectory`] stores knot values and slopes; on each interval the curve
//! is the unique cubic matching both, so `x` and `xd` are continuous and `xdd`
//! is piecewise linear. At interior knots `xdd` takes the right limit.

mod chart;
mod mesh;

use std::fmt::Write as _;
use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::expr::{EvalPoint, LagrangianExpr};
use crate::quadrature::{pairwise_sum, GaussRule};

pub use chart::{reparam_derivatives, ArcLengthChart};
pub use mesh::{graded_mesh, uniform_mesh, Endpoint, Grading};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("t = {t} lies outside [{a}, {b}]")]
    OutOfRange { t: f64, a: f64, b: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("trajectory CSV line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("chart needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
}

/// Boundary data for second-order problems: `x(a), x(b), xd(a), xd(b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub x_a: Vec<f64>,
    pub x_b: Vec<f64>,
    pub xd_a: Vec<f64>,
    pub xd_b: Vec<f64>,
}

impl BoundaryData {
    pub fn scalar(x_a: f64, x_b: f64, xd_a: f64, xd_b: f64) -> Self {
        BoundaryData {
            x_a: vec![x_a],
            x_b: vec![x_b],
            xd_a: vec![xd_a],
            xd_b: vec![xd_b],
        }
    }
}

/// Minimize `∫_a^b L(t, x, xd, xdd) dt` subject to the boundary data.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    a: f64,
    b: f64,
    lagrangian: LagrangianExpr,
    bc: BoundaryData,
}

impl Problem {
    pub fn new(a: f64, b: f64, lagrangian: LagrangianExpr, bc: BoundaryData) -> Result<Self, TrajectoryError> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(TrajectoryError::InvalidProblem(format!(
                "interval [{a}, {b}] must satisfy a < b"
            )));
        }
        let n = lagrangian.dim();
        for (name, v) in [("x_a", &bc.x_a), ("x_b", &bc.x_b), ("xd_a", &bc.xd_a), ("xd_b", &bc.xd_b)] {
            if v.len() != n {
                return Err(TrajectoryError::InvalidProblem(format!(
                    "{name} has {} components, expected {n}",
                    v.len()
                )));
            }
            if v.iter().any(|c| !c.is_finite()) {
                return Err(TrajectoryError::InvalidProblem(format!("{name} is not finite")));
            }
        }
        Ok(Problem { a, b, lagrangian, bc })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n(&self) -> usize {
        self.lagrangian.dim()
    }

    pub fn lagrangian(&self) -> &LagrangianExpr {
        &self.lagrangian
    }

    pub fn bc(&self) -> &BoundaryData {
        &self.bc
    }

    /// The same problem with another Lagrangian of equal dimension.
    pub fn with_lagrangian(&self, lagrangian: LagrangianExpr) -> Result<Self, TrajectoryError> {
        Problem::new(self.a, self.b, lagrangian, self.bc.clone())
    }
}

/// Value and first two derivatives of a curve at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub x: Vec<f64>,
    pub xd: Vec<f64>,
    pub xdd: Vec<f64>,
}

impl State {
    pub fn at(self, t: f64) -> EvalPoint {
        EvalPoint::new(t, self.x, self.xd, self.xdd)
    }
}

/// Cubic Hermite weights on one interval for the local dofs
/// `[p0, m0, p1, m1]` (left value, left slope, right value, right slope).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteBasis {
    pub x: [f64; 4],
    pub xd: [f64; 4],
    pub xdd: [f64; 4],
}

impl HermiteBasis {
    pub fn new(h: f64, tau: f64) -> Self {
        let t2 = tau * tau;
        let t3 = t2 * tau;
        HermiteBasis {
            x: [
                2.0 * t3 - 3.0 * t2 + 1.0,
                h * (t3 - 2.0 * t2 + tau),
                -2.0 * t3 + 3.0 * t2,
                h * (t3 - t2),
            ],
            xd: [
                (6.0 * t2 - 6.0 * tau) / h,
                3.0 * t2 - 4.0 * tau + 1.0,
                (-6.0 * t2 + 6.0 * tau) / h,
                3.0 * t2 - 2.0 * tau,
            ],
            xdd: [
                (12.0 * tau - 6.0) / (h * h),
                (6.0 * tau - 4.0) / h,
                (-12.0 * tau + 6.0) / (h * h),
                (6.0 * tau - 2.0) / h,
            ],
        }
    }
}

/// Anything with a value, slope and second derivative on `[a, b]`.
pub trait Curve: Sync {
    fn span(&self) -> (f64, f64);
    fn dim(&self) -> usize;
    fn state(&self, t: f64) -> State;
    /// Times where derivatives may jump; samplers keep stencils off them.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// `x(t) = coeff * (t - origin)^exponent`, scalar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub coeff: f64,
    pub exponent: f64,
    pub origin: f64,
    pub end: f64,
}

impl Curve for PowerLaw {
    fn span(&self) -> (f64, f64) {
        (self.origin, self.end)
    }

    fn dim(&self) -> usize {
        1
    }

    fn state(&self, t: f64) -> State {
        let u = t - self.origin;
        let p = self.exponent;
        let c = self.coeff;
        State {
            x: vec![c * u.powf(p)],
            xd: vec![c * p * u.powf(p - 1.0)],
            xdd: vec![c * p * (p - 1.0) * u.powf(p - 2.0)],
        }
    }
}

impl PowerLaw {
    /// Hermite samples of the power law on the given knots.
    pub fn sample(&self, knots: Vec<f64>) -> Result<Trajectory, TrajectoryError> {
        Trajectory::sample(knots, 1, |t| {
            let s = self.state(t);
            (s.x, s.xd)
        })
    }
}

/// L² norms of `x`, `xd`, `xdd` and the ess-sup of `|xdd|`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SobolevNorms {
    pub norm2_x: f64,
    pub norm2_xd: f64,
    pub norm2_xdd: f64,
    pub ess_sup_xdd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    n: usize,
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

impl Trajectory {
    /// Build from knots and per-knot value/slope rows (each of length `n`).
    pub fn new(knots: Vec<f64>, values: Vec<Vec<f64>>, slopes: Vec<Vec<f64>>) -> Result<Self, TrajectoryError> {
        let n = values.first().map_or(0, Vec::len);
        if values.len() != knots.len() || slopes.len() != knots.len() {
            return Err(TrajectoryError::InvalidMesh(
                "values/slopes rows must match the number of knots".into(),
            ));
        }
        for row in values.iter().chain(&slopes) {
            if row.len() != n {
                return Err(TrajectoryError::Dimension {
                    expected: n,
                    got: row.len(),
                });
            }
        }
        Self::from_flat(n, knots, values.concat(), slopes.concat())
    }

    pub fn from_flat(n: usize, knots: Vec<f64>, values: Vec<f64>, slopes: Vec<f64>) -> Result<Self, TrajectoryError> {
        if n == 0 {
            return Err(TrajectoryError::InvalidMesh("dimension must be positive".into()));
        }
        if knots.len() < 2 {
            return Err(TrajectoryError::InvalidMesh("need at least two knots".into()));
        }
        if !knots.windows(2).all(|w| w[0] < w[1]) || knots.iter().any(|k| !k.is_finite()) {
            return Err(TrajectoryError::InvalidMesh("knots must be finite and strictly increasing".into()));
        }
        if values.len() != n * knots.len() || slopes.len() != n * knots.len() {
            return Err(TrajectoryError::Dimension {
                expected: n * knots.len(),
                got: values.len().min(slopes.len()),
            });
        }
        Ok(Trajectory {
            n,
            knots,
            values,
            slopes,
        })
    }

    /// Sample values and slopes from `f(t) -> (x, xd)` at each knot.
    pub fn sample(knots: Vec<f64>, n: usize, f: impl Fn(f64) -> (Vec<f64>, Vec<f64>)) -> Result<Self, TrajectoryError> {
        let mut values = Vec::with_capacity(n * knots.len());
        let mut slopes = Vec::with_capacity(n * knots.len());
        for &t in &knots {
            let (x, xd) = f(t);
            if x.len() != n || xd.len() != n {
                return Err(TrajectoryError::Dimension {
                    expected: n,
                    got: x.len().min(xd.len()),
                });
            }
            values.extend(x);
            slopes.extend(xd);
        }
        Self::from_flat(n, knots, values, slopes)
    }

    /// The unique cubic meeting all four boundary conditions, sampled on
    /// `knots` (which must span `[a, b]` exactly).
    pub fn boundary_cubic(problem: &Problem, knots: Vec<f64>) -> Result<Self, TrajectoryError> {
        if knots.first() != Some(&problem.a) || knots.last() != Some(&problem.b) {
            return Err(TrajectoryError::InvalidMesh("mesh must start at a and end at b".into()));
        }
        let h = problem.b - problem.a;
        let bc = problem.bc();
        let n = problem.n();
        let mut traj = Self::sample(knots, n, |t| {
            let basis = HermiteBasis::new(h, (t - problem.a) / h);
            let mut x = vec![0.0; n];
            let mut xd = vec![0.0; n];
            for i in 0..n {
                let dofs = [bc.x_a[i], bc.xd_a[i], bc.x_b[i], bc.xd_b[i]];
                x[i] = dot4(&basis.x, &dofs);
                xd[i] = dot4(&basis.xd, &dofs);
            }
            (x, xd)
        })?;
        traj.impose_boundary(bc);
        Ok(traj)
    }

    /// Overwrite the first and last rows with the boundary data.
    pub fn impose_boundary(&mut self, bc: &BoundaryData) {
        let n = self.n;
        let last = self.knots.len() - 1;
        self.values[..n].copy_from_slice(&bc.x_a);
        self.slopes[..n].copy_from_slice(&bc.xd_a);
        self.values[last * n..].copy_from_slice(&bc.x_b);
        self.slopes[last * n..].copy_from_slice(&bc.xd_b);
    }

    pub fn is_admissible(&self, problem: &Problem) -> bool {
        let n = self.n;
        let last = self.knots.len() - 1;
        let bc = problem.bc();
        n == problem.n()
            && self.knots[0] == problem.a
            && self.knots[last] == problem.b
            && self.values[..n] == bc.x_a[..]
            && self.slopes[..n] == bc.xd_a[..]
            && self.values[last * n..] == bc.x_b[..]
            && self.slopes[last * n..] == bc.xd_b[..]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of mesh intervals `K`.
    pub fn intervals(&self) -> usize {
        self.knots.len() - 1
    }

    pub fn a(&self) -> f64 {
        self.knots[0]
    }

    pub fn b(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    pub fn value(&self, k: usize) -> &[f64] {
        &self.values[k * self.n..(k + 1) * self.n]
    }

    pub fn slope(&self, k: usize) -> &[f64] {
        &self.slopes[k * self.n..(k + 1) * self.n]
    }

    pub fn slope_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.slopes[k * self.n..(k + 1) * self.n]
    }

    pub fn value_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.values[k * self.n..(k + 1) * self.n]
    }

    /// Local dofs of interval `k`, component `i`: `[p0, m0, p1, m1]`.
    pub fn local_dofs(&self, k: usize, i: usize) -> [f64; 4] {
        let n = self.n;
        [
            self.values[k * n + i],
            self.slopes[k * n + i],
            self.values[(k + 1) * n + i],
            self.slopes[(k + 1) * n + i],
        ]
    }

    /// Interval containing `t`, right-continuous at interior knots.
    pub fn interval_of(&self, t: f64) -> usize {
        let idx = self.knots.partition_point(|&k| k <= t);
        idx.saturating_sub(1).min(self.intervals() - 1)
    }

    /// State at local coordinate `tau ∈ [0, 1]` of interval `k`.
    pub fn state_in(&self, k: usize, tau: f64) -> State {
        let h = self.knots[k + 1] - self.knots[k];
        let basis = HermiteBasis::new(h, tau);
        let mut s = State {
            x: vec![0.0; self.n],
            xd: vec![0.0; self.n],
            xdd: vec![0.0; self.n],
        };
        for i in 0..self.n {
            let d = self.local_dofs(k, i);
            s.x[i] = dot4(&basis.x, &d);
            s.xd[i] = dot4(&basis.xd, &d);
            s.xdd[i] = dot4(&basis.xdd, &d);
        }
        s
    }

    /// Value, slope and second derivative (right limit at interior knots).
    pub fn evaluate(&self, t: f64) -> Result<State, TrajectoryError> {
        let (a, b) = (self.a(), self.b());
        if !(t >= a && t <= b) {
            return Err(TrajectoryError::OutOfRange { t, a, b });
        }
        Ok(self.state_at_unchecked(t))
    }

    fn state_at_unchecked(&self, t: f64) -> State {
        let k = self.interval_of(t);
        let h = self.knots[k + 1] - self.knots[k];
        self.state_in(k, (t - self.knots[k]) / h)
    }

    /// Constant third derivative on interval `k`.
    pub fn third_derivative(&self, k: usize) -> Vec<f64> {
        let h = self.knots[k + 1] - self.knots[k];
        (0..self.n)
            .map(|i| {
                let [p0, m0, p1, m1] = self.local_dofs(k, i);
                12.0 * (p0 - p1) / (h * h * h) + 6.0 * (m0 + m1) / (h * h)
            })
            .collect()
    }

    /// Exact L² norms (4-point Gauss is exact for the degree-6 integrands)
    /// and the ess-sup of `|xdd|`, attained at knot limits.
    pub fn sobolev_norms(&self) -> SobolevNorms {
        let rule = GaussRule::new(4);
        let mut sx = Vec::with_capacity(self.intervals());
        let mut sxd = Vec::with_capacity(self.intervals());
        let mut sxdd = Vec::with_capacity(self.intervals());
        let mut sup: f64 = 0.0;
        for k in 0..self.intervals() {
            let h = self.knots[k + 1] - self.knots[k];
            let (mut ix, mut ixd, mut ixdd) = (Vec::new(), Vec::new(), Vec::new());
            for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
                let s = self.state_in(k, u);
                ix.push(w * h * s.x.iter().map(|v| v * v).sum::<f64>());
                ixd.push(w * h * s.xd.iter().map(|v| v * v).sum::<f64>());
                ixdd.push(w * h * s.xdd.iter().map(|v| v * v).sum::<f64>());
            }
            sx.push(pairwise_sum(&ix));
            sxd.push(pairwise_sum(&ixd));
            sxdd.push(pairwise_sum(&ixdd));
            sup = sup
                .max(norm(&self.state_in(k, 0.0).xdd))
                .max(norm(&self.state_in(k, 1.0).xdd));
        }
        SobolevNorms {
            norm2_x: pairwise_sum(&sx).sqrt(),
            norm2_xd: pairwise_sum(&sxd).sqrt(),
            norm2_xdd: pairwise_sum(&sxdd).sqrt(),
            ess_sup_xdd: sup,
        }
    }

    /// Bisect every interval; the refined curve coincides with `self`.
    pub fn refine(&self) -> Trajectory {
        let n = self.n;
        let k_old = self.intervals();
        let mut knots = Vec::with_capacity(2 * k_old + 1);
        let mut values = Vec::with_capacity(n * (2 * k_old + 1));
        let mut slopes = Vec::with_capacity(n * (2 * k_old + 1));
        for k in 0..k_old {
            knots.push(self.knots[k]);
            values.extend_from_slice(self.value(k));
            slopes.extend_from_slice(self.slope(k));
            let mid = self.state_in(k, 0.5);
            knots.push(0.5 * (self.knots[k] + self.knots[k + 1]));
            values.extend(mid.x);
            slopes.extend(mid.xd);
        }
        knots.push(self.b());
        values.extend_from_slice(self.value(k_old));
        slopes.extend_from_slice(self.slope(k_old));
        Trajectory {
            n,
            knots,
            values,
            slopes,
        }
    }

    /// Interior knot values and slopes, knot-major: for each interior knot,
    /// `n` values then `n` slopes.
    pub fn free_dofs(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = Vec::with_capacity(2 * n * (self.knots.len() - 2));
        for k in 1..self.intervals() {
            out.extend_from_slice(self.value(k));
            out.extend_from_slice(self.slope(k));
        }
        out
    }

    pub fn free_dof_count(&self) -> usize {
        2 * self.n * (self.knots.len() - 2)
    }

    pub fn with_free_dofs(&self, dofs: &[f64]) -> Trajectory {
        assert_eq!(dofs.len(), self.free_dof_count());
        let mut out = self.clone();
        let n = self.n;
        for k in 1..self.intervals() {
            let base = (k - 1) * 2 * n;
            out.value_mut(k).copy_from_slice(&dofs[base..base + n]);
            out.slope_mut(k).copy_from_slice(&dofs[base + n..base + 2 * n]);
        }
        out
    }

    /// Stable hash of the knot data, used to tie charts to trajectories.
    pub fn fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.n.hash(&mut h);
        for v in self.knots.iter().chain(&self.values).chain(&self.slopes) {
            v.to_bits().hash(&mut h);
        }
        h.finish()
    }

    /// CSV with header `t,x1..xn,xd1..xdn`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for i in 1..=self.n {
            write!(out, ",x{i}").unwrap();
        }
        for i in 1..=self.n {
            write!(out, ",xd{i}").unwrap();
        }
        out.push('\n');
        for k in 0..self.knots.len() {
            write!(out, "{:.16e}", self.knots[k]).unwrap();
            for v in self.value(k).iter().chain(self.slope(k)) {
                write!(out, ",{v:.16e}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, TrajectoryError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(TrajectoryError::Csv {
            line: 1,
            message: "empty file".into(),
        })?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 3 || cols.len() % 2 == 0 || cols[0] != "t" {
            return Err(TrajectoryError::Csv {
                line: 1,
                message: "header must be t,x1..xn,xd1..xdn".into(),
            });
        }
        let n = (cols.len() - 1) / 2;
        let expected: Vec<String> = std::iter::once("t".to_string())
            .chain((1..=n).map(|i| format!("x{i}")))
            .chain((1..=n).map(|i| format!("xd{i}")))
            .collect();
        if cols != expected {
            return Err(TrajectoryError::Csv {
                line: 1,
                message: format!("header must be {}", expected.join(",")),
            });
        }
        let (mut knots, mut values, mut slopes) = (Vec::new(), Vec::new(), Vec::new());
        for (idx, line) in lines {
            let fields: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
            let fields = fields.map_err(|e| TrajectoryError::Csv {
                line: idx + 1,
                message: e.to_string(),
            })?;
            if fields.len() != 1 + 2 * n {
                return Err(TrajectoryError::Csv {
                    line: idx + 1,
                    message: format!("expected {} fields, found {}", 1 + 2 * n, fields.len()),
                });
            }
            knots.push(fields[0]);
            values.extend_from_slice(&fields[1..=n]);
            slopes.extend_from_slice(&fields[n + 1..]);
        }
        Self::from_flat(n, knots, values, slopes)
    }
}

impl Curve for Trajectory {
    fn span(&self) -> (f64, f64) {
        (self.a(), self.b())
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn state(&self, t: f64) -> State {
        self.state_at_unchecked(t.clamp(self.a(), self.b()))
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.knots.clone()
    }
}

pub(crate) fn dot4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smoothstep(knots: Vec<f64>) -> Trajectory {
        Trajectory::sample(knots, 1, |t| {
            (vec![3.0 * t * t - 2.0 * t * t * t], vec![6.0 * t - 6.0 * t * t])
        })
        .unwrap()
    }

    #[test]
    fn cubic_is_reproduced_exactly() {
        for k in [1usize, 3, 7] {
            let traj = smoothstep(uniform_mesh(0.0, 1.0, k));
            let s = traj.evaluate(0.5).unwrap();
            assert!((s.x[0] - 0.5).abs() < 1e-15);
            assert!((s.xd[0] - 1.5).abs() < 1e-14);
            assert!(s.xdd[0].abs() < 1e-12);
        }
    }

    #[test]
    fn constant_trajectory() {
        let traj = Trajectory::sample(uniform_mesh(0.0, 2.0, 4), 2, |_| (vec![1.5, -2.0], vec![0.0, 0.0])).unwrap();
        for t in [0.0, 0.3, 1.0, 2.0] {
            let s = traj.evaluate(t).unwrap();
            assert_eq!(s.x, vec![1.5, -2.0]);
            assert_eq!(s.xd, vec![0.0, 0.0]);
            assert_eq!(s.xdd, vec![0.0, 0.0]);
        }
    }

    #[test]
    fn endpoint_returns_boundary_rows() {
        let l = LagrangianExpr::parse("pow(xdd1,2)", 1).unwrap();
        let p = Problem::new(0.0, 1.0, l, BoundaryData::scalar(0.0, 1.0, 0.5, -0.25)).unwrap();
        let traj = Trajectory::boundary_cubic(&p, uniform_mesh(0.0, 1.0, 5)).unwrap();
        assert!(traj.is_admissible(&p));
        let s = traj.evaluate(1.0).unwrap();
        assert_eq!(s.x, vec![1.0]);
        assert_eq!(s.xd, vec![-0.25]);
        assert!(traj.evaluate(1.0 + 1e-12).is_err());
        assert!(traj.evaluate(-0.1).is_err());
    }

    #[test]
    fn right_limit_at_interior_knots() {
        // broken second derivative: slopes from two different parabolas
        let traj = Trajectory::new(
            vec![0.0, 1.0, 2.0],
            vec![vec![0.0], vec![1.0], vec![1.0]],
            vec![vec![0.0], vec![2.0], vec![0.0]],
        )
        .unwrap();
        let right = traj.state_in(1, 0.0).xdd[0];
        let left = traj.state_in(0, 1.0).xdd[0];
        assert_ne!(left, right);
        assert_eq!(traj.evaluate(1.0).unwrap().xdd[0], right);
    }

    #[test]
    fn smoothstep_norms() {
        let traj = smoothstep(uniform_mesh(0.0, 1.0, 6));
        let nrm = traj.sobolev_norms();
        assert!((nrm.norm2_xdd.powi(2) - 12.0).abs() < 1e-12);
        assert!((nrm.ess_sup_xdd - 6.0).abs() < 1e-12);
        // ∫(3t²-2t³)² = 13/35, ∫(6t-6t²)² = 6/5
        assert!((nrm.norm2_x.powi(2) - 13.0 / 35.0).abs() < 1e-14);
        assert!((nrm.norm2_xd.powi(2) - 1.2).abs() < 1e-14);
    }

    #[test]
    fn zero_norms() {
        let traj = Trajectory::sample(uniform_mesh(0.0, 1.0, 3), 1, |_| (vec![0.0], vec![0.0])).unwrap();
        let nrm = traj.sobolev_norms();
        assert_eq!(
            (nrm.norm2_x, nrm.norm2_xd, nrm.norm2_xdd, nrm.ess_sup_xdd),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn refine_nests_exactly() {
        let traj = Trajectory::sample(uniform_mesh(0.0, 1.0, 2), 1, |t| (vec![t.sin()], vec![t.cos()])).unwrap();
        let fine = traj.refine();
        assert_eq!(fine.intervals(), 4);
        assert_eq!(fine.refine().intervals(), 8);
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            let a = traj.evaluate(t).unwrap();
            let b = fine.evaluate(t).unwrap();
            assert!((a.x[0] - b.x[0]).abs() < 1e-15);
            assert!((a.xd[0] - b.xd[0]).abs() < 1e-14);
            assert!((a.xdd[0] - b.xdd[0]).abs() < 1e-12);
        }
        let (n0, n1) = (traj.sobolev_norms(), fine.sobolev_norms());
        for (u, v) in [
            (n0.norm2_x, n1.norm2_x),
            (n0.norm2_xd, n1.norm2_xd),
            (n0.norm2_xdd, n1.norm2_xdd),
        ] {
            assert!(((u - v) / u).abs() < 1e-12);
        }
    }

    #[test]
    fn free_dof_round_trip() {
        let traj = Trajectory::sample(uniform_mesh(0.0, 1.0, 4), 2, |t| (vec![t, t * t], vec![1.0, 2.0 * t])).unwrap();
        let dofs = traj.free_dofs();
        assert_eq!(dofs.len(), 3 * 4);
        assert_eq!(traj.with_free_dofs(&dofs), traj);
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let traj = Trajectory::sample(uniform_mesh(0.0, 1.0, 3), 2, |t| (vec![t.exp(), -t], vec![t.exp(), -1.0])).unwrap();
        let text = traj.to_csv();
        assert!(text.starts_with("t,x1,x2,xd1,xd2\n"));
        assert_eq!(Trajectory::from_csv(&text).unwrap(), traj);
        assert!(matches!(
            Trajectory::from_csv("t,x1,xd1\n0,0\n"),
            Err(TrajectoryError::Csv { line: 2, .. })
        ));
        assert!(Trajectory::from_csv("t,y1,xd1\n").is_err());
    }

    #[test]
    fn singular_power_law_norms_converge_on_graded_meshes() {
        let k = (3.0f64 / 5.0).powf(5.0 / 3.0);
        let law = PowerLaw {
            coeff: k,
            exponent: 5.0 / 3.0,
            origin: 0.0,
            end: 1.0,
        };
        let exact = 100.0 * k * k / 27.0;
        let mut traj = law.sample(graded_mesh(0.0, 1.0, 40, 2.0, Endpoint::Start)).unwrap();
        let mut prev_sup = 0.0;
        for _ in 0..3 {
            let nrm = traj.sobolev_norms();
            assert!(nrm.ess_sup_xdd > prev_sup);
            prev_sup = nrm.ess_sup_xdd;
            traj = law.sample(traj.refine().knots().to_vec()).unwrap();
        }
        let nrm = traj.sobolev_norms();
        assert!(((nrm.norm2_xdd.powi(2) - exact) / exact).abs() < 0.02);
        assert!(nrm.ess_sup_xdd > 1e3);
    }
}
