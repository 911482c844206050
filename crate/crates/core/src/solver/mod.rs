//! Direct-method minimization of `J[x] = ∫ L dt` over Hermite trajectories.
//!
//! The objective is composite Gauss–Legendre quadrature of `L` interval by
//! interval; its gradient with respect to the interior knot values and slopes
//! is exact for that quadrature. Boundary rows never move, so every iterate
//! satisfies the boundary conditions.

pub mod lbfgs;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalPoint, ExprError};
use crate::quadrature::{pairwise_sum, GaussRule};
use crate::trajectory::{Grading, HermiteBasis, Problem, Trajectory, TrajectoryError};

pub use lbfgs::{sup_norm, LbfgsParams, Termination};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("expression domain error at t = {t}: {source}")]
    Domain { t: f64, source: ExprError },
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("trajectory is not admissible for the problem")]
    NotAdmissible,
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveOptions {
    pub grad_tol: f64,
    pub max_iters: usize,
    pub quad_order: usize,
    pub refinements: usize,
    pub initial_mesh: usize,
    #[serde(skip)]
    pub grading: Grading,
    /// Soft bound `|xdd| <= cap` enforced with weight `penalty_mu`.
    pub cap: Option<f64>,
    pub penalty_mu: f64,
    /// Factor applied to `penalty_mu` at each refinement level.
    pub penalty_growth: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            grad_tol: 1e-8,
            max_iters: 2000,
            quad_order: 5,
            refinements: 0,
            initial_mesh: 8,
            grading: Grading::Uniform,
            cap: None,
            penalty_mu: 0.0,
            penalty_growth: 1.0,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidOptions(m.to_string()));
        if !(self.grad_tol > 0.0) {
            return bad("grad_tol must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        if ![3, 5, 7].contains(&self.quad_order) {
            return bad("quad_order must be 3, 5 or 7");
        }
        if self.initial_mesh == 0 {
            return bad("initial mesh must have at least one interval");
        }
        if let Some(cap) = self.cap {
            if !(cap > 0.0) {
                return bad("cap must be positive");
            }
        }
        if !(self.penalty_mu >= 0.0) || !self.penalty_mu.is_finite() {
            return bad("penalty_mu must be finite and >= 0");
        }
        if !(self.penalty_growth >= 1.0) {
            return bad("penalty_growth must be >= 1");
        }
        if let Grading::Geometric { ratio, .. } = self.grading {
            if !(ratio > 0.0) {
                return bad("grading ratio must be positive");
            }
        }
        Ok(())
    }

    fn penalty(&self, level: usize) -> Option<Penalty> {
        match self.cap {
            Some(cap) if self.penalty_mu > 0.0 => Some(Penalty {
                cap,
                mu: self.penalty_mu * self.penalty_growth.powi(level as i32),
            }),
            _ => None,
        }
    }
}

/// `mu * max(0, |xdd| - cap)^2` added to the integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penalty {
    pub cap: f64,
    pub mu: f64,
}

impl Penalty {
    fn value(&self, xdd: &[f64]) -> f64 {
        let excess = (norm(xdd) - self.cap).max(0.0);
        self.mu * excess * excess
    }

    fn grad_into(&self, xdd: &[f64], out: &mut [f64]) {
        let r = norm(xdd);
        let excess = r - self.cap;
        if excess > 0.0 {
            let f = 2.0 * self.mu * excess / r;
            out.iter_mut().zip(xdd).for_each(|(o, v)| *o = f * v);
        } else {
            out.iter_mut().for_each(|o| *o = 0.0);
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Quadrature functional over trajectories for one problem.
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    problem: &'a Problem,
    rule: GaussRule,
    penalty: Option<Penalty>,
}

struct IntervalTerms {
    value: f64,
    local_grad: Vec<f64>,
}

impl<'a> Objective<'a> {
    pub fn new(problem: &'a Problem, quad_order: usize, penalty: Option<Penalty>) -> Self {
        Objective {
            problem,
            rule: GaussRule::new(quad_order),
            penalty,
        }
    }

    pub fn value(&self, traj: &Trajectory) -> Result<f64, SolverError> {
        let terms = self.collect(traj, false)?;
        Ok(pairwise_sum(&terms.iter().map(|t| t.value).collect::<Vec<_>>()))
    }

    pub fn value_and_gradient(&self, traj: &Trajectory) -> Result<(f64, Vec<f64>), SolverError> {
        let terms = self.collect(traj, true)?;
        let value = pairwise_sum(&terms.iter().map(|t| t.value).collect::<Vec<_>>());
        let n = traj.n();
        let k_total = traj.intervals();
        let mut grad = vec![0.0; traj.free_dof_count()];
        // local layout per interval: [p0 (n), m0 (n), p1 (n), m1 (n)]
        for (k, term) in terms.iter().enumerate() {
            for (side, knot) in [(0usize, k), (1, k + 1)] {
                if knot == 0 || knot == k_total {
                    continue;
                }
                let base = (knot - 1) * 2 * n;
                for i in 0..n {
                    grad[base + i] += term.local_grad[2 * side * n + i];
                    grad[base + n + i] += term.local_grad[2 * side * n + n + i];
                }
            }
        }
        Ok((value, grad))
    }

    // Per-interval work runs in parallel; the reduction order is fixed.
    fn collect(&self, traj: &Trajectory, with_grad: bool) -> Result<Vec<IntervalTerms>, SolverError> {
        let results: Vec<Result<IntervalTerms, SolverError>> = (0..traj.intervals())
            .into_par_iter()
            .map(|k| self.interval(traj, k, with_grad))
            .collect();
        results.into_iter().collect()
    }

    fn interval(&self, traj: &Trajectory, k: usize, with_grad: bool) -> Result<IntervalTerms, SolverError> {
        let n = traj.n();
        let t0 = traj.knots()[k];
        let h = traj.knots()[k + 1] - t0;
        let lagrangian = self.problem.lagrangian();
        let mut values = Vec::with_capacity(self.rule.len());
        let mut local_grad = if with_grad { vec![0.0; 4 * n] } else { Vec::new() };
        let mut pen_grad = vec![0.0; n];
        for (&u, &w) in self.rule.nodes.iter().zip(&self.rule.weights) {
            let t = t0 + h * u;
            let state = traj.state_in(k, u);
            let weight = w * h;
            let pen = self.penalty.map_or(0.0, |p| p.value(&state.xdd));
            let point = EvalPoint::new(t, state.x, state.xd, state.xdd);
            if !with_grad {
                let l = lagrangian.eval(&point).map_err(|source| SolverError::Domain { t, source })?;
                values.push(weight * (l + pen));
                continue;
            }
            let d = lagrangian.partials(&point).map_err(|source| SolverError::Domain { t, source })?;
            values.push(weight * (d.value + pen));
            if let Some(p) = self.penalty {
                p.grad_into(&point.xdd, &mut pen_grad);
            }
            let basis = HermiteBasis::new(h, u);
            for i in 0..n {
                let lxdd = d.xdd[i] + pen_grad[i];
                for j in 0..4 {
                    let contrib = d.x[i] * basis.x[j] + d.xd[i] * basis.xd[j] + lxdd * basis.xdd[j];
                    local_grad[j * n + i] += weight * contrib;
                }
            }
        }
        Ok(IntervalTerms {
            value: pairwise_sum(&values),
            local_grad,
        })
    }
}

/// Quadrature value of `∫ L dt` along `traj`.
pub fn objective(problem: &Problem, traj: &Trajectory, quad_order: usize) -> Result<f64, SolverError> {
    Objective::new(problem, quad_order, None).value(traj)
}

/// Exact gradient of [`objective`] with respect to the free dofs.
pub fn gradient(problem: &Problem, traj: &Trajectory, quad_order: usize) -> Result<Vec<f64>, SolverError> {
    Ok(Objective::new(problem, quad_order, None).value_and_gradient(traj)?.1)
}

#[derive(Debug, Clone)]
pub struct MinimizeOutcome {
    pub trajectory: Trajectory,
    pub objective: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    pub history: Vec<f64>,
}

pub fn minimize(problem: &Problem, init: &Trajectory, opts: &SolveOptions) -> Result<MinimizeOutcome, SolverError> {
    minimize_with_penalty(problem, init, opts, opts.penalty(0))
}

fn minimize_with_penalty(
    problem: &Problem,
    init: &Trajectory,
    opts: &SolveOptions,
    penalty: Option<Penalty>,
) -> Result<MinimizeOutcome, SolverError> {
    opts.validate()?;
    if !init.is_admissible(problem) {
        return Err(SolverError::NotAdmissible);
    }
    let obj = Objective::new(problem, opts.quad_order, penalty);
    let params = LbfgsParams {
        grad_tol: opts.grad_tol,
        max_iters: opts.max_iters,
        ..LbfgsParams::default()
    };
    let result = lbfgs::minimize(init.free_dofs(), &params, |dofs| {
        obj.value_and_gradient(&init.with_free_dofs(dofs))
    })?;
    Ok(MinimizeOutcome {
        trajectory: init.with_free_dofs(&result.x),
        objective: result.f,
        grad_norm: sup_norm(&result.grad),
        iterations: result.iterations,
        converged: result.termination == Termination::Converged,
        termination: result.termination,
        history: result.history,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelReport {
    pub level: usize,
    pub intervals: usize,
    /// Minimized objective, including the cap penalty when active.
    pub objective: f64,
    /// `∫ L dt` at the level's solution without penalty.
    pub pure_objective: f64,
    pub penalty_mu: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    pub max_abs_xdd: f64,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub levels: Vec<LevelReport>,
    pub trajectory: Trajectory,
}

impl SolveReport {
    pub fn final_level(&self) -> &LevelReport {
        self.levels.last().expect("at least one level")
    }

    pub fn converged(&self) -> bool {
        self.final_level().converged
    }
}

/// Solve on the initial mesh from the boundary cubic, then bisect and
/// re-solve `refinements` times, warm-starting each level.
pub fn solve_refined(problem: &Problem, opts: &SolveOptions) -> Result<SolveReport, SolverError> {
    opts.validate()?;
    let knots = opts.grading.knots(problem.a(), problem.b(), opts.initial_mesh);
    let init = Trajectory::boundary_cubic(problem, knots)?;
    solve_refined_from(problem, init, opts)
}

pub fn solve_refined_from(problem: &Problem, init: Trajectory, opts: &SolveOptions) -> Result<SolveReport, SolverError> {
    opts.validate()?;
    let mut current = init;
    let mut levels = Vec::with_capacity(opts.refinements + 1);
    for level in 0..=opts.refinements {
        if level > 0 {
            current = current.refine();
        }
        let penalty = opts.penalty(level);
        let out = minimize_with_penalty(problem, &current, opts, penalty)?;
        let pure_objective = if penalty.is_some() {
            objective(problem, &out.trajectory, opts.quad_order)?
        } else {
            out.objective
        };
        levels.push(LevelReport {
            level,
            intervals: out.trajectory.intervals(),
            objective: out.objective,
            pure_objective,
            penalty_mu: penalty.map_or(0.0, |p| p.mu),
            grad_norm: out.grad_norm,
            iterations: out.iterations,
            converged: out.converged,
            termination: out.termination,
            max_abs_xdd: out.trajectory.sobolev_norms().ess_sup_xdd,
        });
        current = out.trajectory;
    }
    Ok(SolveReport {
        levels,
        trajectory: current,
    })
}
