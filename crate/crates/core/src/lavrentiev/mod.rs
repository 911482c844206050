//! Numerical probe for a gap between the infimum over W²₂ and over W∞₂.
//!
//! The W²₂ side is the refined unconstrained solve; the W∞₂ side adds the
//! penalty `mu * max(0, |xdd| - M)²`. A positive gap that is stable under
//! refinement is only evidence, never proof.

use std::fmt::Write as _;

use serde::Serialize;

use crate::solver::{objective, solve_refined, solve_refined_from, SolveOptions, SolveReport, SolverError};
use crate::trajectory::{graded_mesh, Endpoint, PowerLaw, Problem, Trajectory, TrajectoryError};

pub const DEFAULT_PENALTY_MU: f64 = 1e3;
pub const DEFAULT_PENALTY_GROWTH: f64 = 2.0;
pub const SEED_KNOTS: usize = 40;
pub const SEED_RATIO: f64 = 2.0;

/// Solver options for the probe: the defaults with `mu = 1e3` doubled per
/// refinement level.
pub fn probe_options() -> SolveOptions {
    SolveOptions {
        penalty_mu: DEFAULT_PENALTY_MU,
        penalty_growth: DEFAULT_PENALTY_GROWTH,
        ..SolveOptions::default()
    }
}

/// A power law sampled on a geometric mesh of `SEED_KNOTS` knots graded
/// toward its origin.
pub fn singular_seed(law: &PowerLaw) -> Result<Trajectory, TrajectoryError> {
    law.sample(graded_mesh(law.origin, law.end, SEED_KNOTS - 1, SEED_RATIO, Endpoint::Start))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapLevel {
    pub level: usize,
    pub intervals: usize,
    /// Best unconstrained value known at this level (see [`probe_gap`]).
    pub j_unconstrained: f64,
    /// Penalized objective of the capped solve.
    pub j_capped: f64,
    /// `∫ L dt` at the capped solution.
    pub j_capped_pure: f64,
    pub cap_m: f64,
    pub penalty_mu: f64,
    pub max_abs_xdd_unconstrained: f64,
    pub max_abs_xdd_capped: f64,
    pub converged_unconstrained: bool,
    pub converged_capped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub cap_m: f64,
    pub levels: Vec<GapLevel>,
    /// `j_capped - j_unconstrained` at the finest level.
    pub gap_estimate: Option<f64>,
    /// Positive gap at the last two levels, changing by under 10%.
    pub lavrentiev_suspect: bool,
    pub singular_seed_value: Option<f64>,
    pub unconstrained_error: Option<String>,
    pub capped_error: Option<String>,
}

impl GapReport {
    /// `level,K,J_unc,J_cap,max_abs_xdd` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,K,J_unc,J_cap,max_abs_xdd\n");
        for l in &self.levels {
            let _ = writeln!(
                out,
                "{},{},{:.16e},{:.16e},{:.16e}",
                l.level, l.intervals, l.j_unconstrained, l.j_capped, l.max_abs_xdd_unconstrained
            );
        }
        out
    }
}

/// Unconstrained runs shared by every cap of a sweep.
struct Unconstrained {
    runs: Vec<SolveReport>,
    error: Option<String>,
    seed_value: Option<f64>,
}

fn unconstrained(p: &Problem, opts: &SolveOptions, seed: Option<&Trajectory>) -> Result<Unconstrained, SolverError> {
    let free = SolveOptions {
        cap: None,
        ..opts.clone()
    };
    let seed_value = seed.map(|s| objective(p, s, opts.quad_order)).transpose()?;
    let (from_cubic, from_seed) = rayon::join(
        || solve_refined(p, &free),
        || seed.map(|s| solve_refined_from(p, s.clone(), &free)),
    );
    let mut runs = Vec::new();
    let mut errors = Vec::new();
    for r in std::iter::once(from_cubic).chain(from_seed) {
        match r {
            Ok(rep) => runs.push(rep),
            Err(e) => errors.push(e.to_string()),
        }
    }
    Ok(Unconstrained {
        runs,
        error: (!errors.is_empty()).then(|| errors.join("; ")),
        seed_value,
    })
}

fn validate(p: &Problem, opts: &SolveOptions, cap_m: f64, seed: Option<&Trajectory>) -> Result<(), SolverError> {
    opts.validate()?;
    if !(cap_m > 0.0) {
        return Err(SolverError::InvalidOptions("cap must be positive".into()));
    }
    if let Some(s) = seed {
        if !s.is_admissible(p) {
            return Err(SolverError::NotAdmissible);
        }
    }
    Ok(())
}

fn assemble(unc: &Unconstrained, capped: Result<SolveReport, SolverError>, cap_m: f64) -> GapReport {
    let (capped, capped_error) = match capped {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let depth = unc
        .runs
        .iter()
        .map(|r| r.levels.len())
        .chain(capped.iter().map(|r| r.levels.len()))
        .max()
        .unwrap_or(0);
    let mut levels = Vec::with_capacity(depth);
    for level in 0..depth {
        let cap_level = capped.as_ref().and_then(|r| r.levels.get(level));
        // any admissible trajectory bounds the unconstrained infimum
        let best = unc
            .runs
            .iter()
            .filter_map(|r| r.levels.get(level))
            .map(|l| (l.objective, l.max_abs_xdd, l.converged))
            .chain(cap_level.map(|l| (l.pure_objective, l.max_abs_xdd, l.converged)))
            .reduce(|b, c| if c.0 < b.0 { c } else { b });
        let (Some((j_unc, xdd_unc, conv_unc)), Some(cl)) = (best, cap_level) else {
            continue;
        };
        let intervals = unc
            .runs
            .first()
            .and_then(|r| r.levels.get(level))
            .map_or(cl.intervals, |l| l.intervals);
        levels.push(GapLevel {
            level,
            intervals,
            j_unconstrained: j_unc,
            j_capped: cl.objective,
            j_capped_pure: cl.pure_objective,
            cap_m,
            penalty_mu: cl.penalty_mu,
            max_abs_xdd_unconstrained: xdd_unc,
            max_abs_xdd_capped: cl.max_abs_xdd,
            converged_unconstrained: conv_unc,
            converged_capped: cl.converged,
        });
    }
    let gap = |l: &GapLevel| l.j_capped - l.j_unconstrained;
    let gap_estimate = levels.last().map(gap);
    let lavrentiev_suspect = match levels.as_slice() {
        [.., prev, last] => {
            let (g0, g1) = (gap(prev), gap(last));
            let floor = 1e-6 * (1.0 + last.j_unconstrained.abs());
            g0 > floor && g1 > floor && (g1 - g0).abs() < 0.1 * g1
        }
        _ => false,
    };
    GapReport {
        cap_m,
        levels,
        gap_estimate,
        lavrentiev_suspect,
        singular_seed_value: unc.seed_value,
        unconstrained_error: unc.error.clone(),
        capped_error,
    }
}

fn capped_opts(opts: &SolveOptions, cap_m: f64) -> SolveOptions {
    SolveOptions {
        cap: Some(cap_m),
        ..opts.clone()
    }
}

/// Compare the refined unconstrained infimum with the penalized capped one.
///
/// `j_unconstrained` at a level is the smallest `∫ L dt` at that level over
/// the unconstrained runs (from the boundary cubic and from `seed`) and the
/// capped solutions, so `j_capped >= j_unconstrained` always. With
/// `penalty_mu = 0` both legs are the same optimization and the gap is 0.
pub fn probe_gap(p: &Problem, opts: &SolveOptions, cap_m: f64, seed: Option<&Trajectory>) -> Result<GapReport, SolverError> {
    validate(p, opts, cap_m, seed)?;
    let copts = capped_opts(opts, cap_m);
    let (unc, capped) = rayon::join(|| unconstrained(p, opts, seed), || solve_refined(p, &copts));
    Ok(assemble(&unc?, capped, cap_m))
}

/// One report per cap, sharing the unconstrained runs.
pub fn cap_sweep(
    p: &Problem,
    opts: &SolveOptions,
    caps: &[f64],
    seed: Option<&Trajectory>,
) -> Result<Vec<GapReport>, SolverError> {
    if caps.is_empty() || caps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SolverError::InvalidOptions("caps must be nonempty and increasing".into()));
    }
    for &c in caps {
        validate(p, opts, c, seed)?;
    }
    use rayon::prelude::*;
    let (unc, capped) = rayon::join(
        || unconstrained(p, opts, seed),
        || {
            caps.par_iter()
                .map(|&c| solve_refined(p, &capped_opts(opts, c)))
                .collect::<Vec<_>>()
        },
    );
    let unc = unc?;
    Ok(capped.into_iter().zip(caps).map(|(r, &c)| assemble(&unc, r, c)).collect())
}
