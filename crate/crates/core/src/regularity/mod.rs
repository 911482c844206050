//! Sampled checks of growth and regularity conditions on a Lagrangian.
//!
//! Every check measures one or two quantities per sample, fits its
//! constants from those measurements, and reports the minimum slack of the
//! defining inequality. The slack is computed by one function from the
//! measurements and the constants, so a stored witness re-checks
//! bit-identically.

mod samples;

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalPoint, ExprError, LagrangianExpr};

pub use samples::{GridCounts, Range, SampleDomain, SampleSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegularityError {
    #[error("the Lagrangian depends on t; this check needs an autonomous one")]
    NotAutonomous,
    #[error("invalid sample domain: {0}")]
    InvalidDomain(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("L = {value} < 0 at t = {t}; a non-integer power is undefined")]
    NegativeLagrangian { t: f64, value: f64 },
    #[error("expression domain error at t = {t}: {source}")]
    Domain { t: f64, source: ExprError },
    #[error("certificate kind {0:?} cannot be re-checked with the stored data")]
    Malformed(Kind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Superlinearity,
    QuadraticCoercivity,
    Convexity,
    TonelliMorrey,
    Autonomy,
    SarychevTorres,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    HoldsOnSamples,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: Kind,
    pub verdict: Verdict,
    pub constants: BTreeMap<String, f64>,
    pub witness: Option<EvalPoint>,
    /// Second point of the convexity pair.
    pub witness_partner: Option<EvalPoint>,
    pub margin: f64,
    pub sample_count: usize,
    pub rng_seed: u64,
}

impl Certificate {
    /// Slack of the defining inequality at the stored witness, recomputed
    /// from scratch. `None` when there is no witness.
    pub fn recheck(&self, l: &LagrangianExpr) -> Result<Option<f64>, RegularityError> {
        let Some(w) = &self.witness else {
            return Ok(None);
        };
        let k = |name: &str| {
            self.constants
                .get(name)
                .copied()
                .ok_or(RegularityError::Malformed(self.kind))
        };
        let cond = match self.kind {
            Kind::Superlinearity => Cond::Superlinear { a: k("a")?, b: k("b")? },
            Kind::QuadraticCoercivity => Cond::Quadratic { a: k("a")?, b: k("b")? },
            Kind::Convexity => Cond::Convex { tol: k("tolerance")? },
            Kind::TonelliMorrey => Cond::Envelope {
                which: Envelope::TonelliMorrey,
                c: k("c")?,
                r: k("r")?,
            },
            Kind::Autonomy => Cond::Envelope {
                which: Envelope::Autonomy,
                c: k("c")?,
                r: k("k")?,
            },
            Kind::SarychevTorres => Cond::Envelope {
                which: Envelope::SarychevTorres {
                    beta: k("beta")?,
                    mu: k("mu")?,
                },
                c: k("gamma")?,
                r: k("eta")?,
            },
        };
        let m = cond.measure(l, w, self.witness_partner.as_ref())?;
        Ok(Some(cond.slack(m)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Envelope {
    TonelliMorrey,
    Autonomy,
    SarychevTorres { beta: f64, mu: f64 },
}

/// A condition with its constants. Fitting starts from zeroed constants;
/// `measure` does not depend on them.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Cond {
    Superlinear { a: f64, b: f64 },
    Quadratic { a: f64, b: f64 },
    Convex { tol: f64 },
    /// `lhs <= c * growth + r`
    Envelope { which: Envelope, c: f64, r: f64 },
}

const CONVEXITY_TOL: f64 = 1e-12;
const MIN_LEADING: f64 = 1e-12;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

impl Cond {
    /// Two numbers per sample: `(|∂L/∂ẍ|, |w|)`, `(|∂L/∂ẍ|, |w|²)`,
    /// `(L(mid), mean of L)`, or `(lhs, growth)`.
    fn measure(&self, l: &LagrangianExpr, p: &EvalPoint, partner: Option<&EvalPoint>) -> Result<(f64, f64), RegularityError> {
        let dom = |source| RegularityError::Domain { t: p.t, source };
        match *self {
            Cond::Superlinear { .. } => {
                let d = l.partials(p).map_err(dom)?;
                Ok((norm(&d.xdd), norm(&p.xdd)))
            }
            Cond::Quadratic { .. } => {
                let d = l.partials(p).map_err(dom)?;
                Ok((norm(&d.xdd), p.xdd.iter().map(|v| v * v).sum()))
            }
            Cond::Convex { .. } => {
                let q = partner.ok_or(RegularityError::Malformed(Kind::Convexity))?;
                let mid: Vec<f64> = p.xdd.iter().zip(&q.xdd).map(|(a, b)| 0.5 * a + 0.5 * b).collect();
                let pm = EvalPoint::new(p.t, p.x.clone(), p.xd.clone(), mid);
                let l1 = l.eval(p).map_err(dom)?;
                let l2 = l.eval(q).map_err(dom)?;
                let lm = l.eval(&pm).map_err(dom)?;
                Ok((lm, 0.5 * l1 + 0.5 * l2))
            }
            Cond::Envelope { which, .. } => {
                let d = l.partials(p).map_err(dom)?;
                Ok(match which {
                    Envelope::TonelliMorrey => (norm(&d.x) + norm(&d.xd), d.value.abs()),
                    Envelope::Autonomy => (d.t.abs(), d.value.abs()),
                    Envelope::SarychevTorres { beta, mu } => {
                        let s = d.t.abs() + norm(&d.x);
                        let lhs = if s == 0.0 { 0.0 } else { s * norm(&p.xd).powf(mu) };
                        let growth = if beta.fract() == 0.0 {
                            d.value.powi(beta as i32)
                        } else if d.value < 0.0 {
                            return Err(RegularityError::NegativeLagrangian { t: p.t, value: d.value });
                        } else {
                            d.value.powf(beta)
                        };
                        (lhs, growth)
                    }
                })
            }
        }
    }

    /// Non-finite measurements give `-inf`.
    fn slack(&self, (u, v): (f64, f64)) -> f64 {
        if !u.is_finite() || v.is_nan() {
            return f64::NEG_INFINITY;
        }
        let s = match *self {
            Cond::Superlinear { a, b } | Cond::Quadratic { a, b } => u - (a * v + b),
            Cond::Convex { tol } => v + tol - u,
            Cond::Envelope { c, r, .. } => c * v + r - u,
        };
        if s.is_nan() {
            f64::NEG_INFINITY
        } else {
            s
        }
    }
}

fn cmp_points(a: &EvalPoint, b: &EvalPoint) -> Ordering {
    let key = |p: &EvalPoint| {
        std::iter::once(p.t)
            .chain(p.x.iter().copied())
            .chain(p.xd.iter().copied())
            .chain(p.xdd.iter().copied())
            .collect::<Vec<f64>>()
    };
    let (ka, kb) = (key(a), key(b));
    ka.iter()
        .zip(&kb)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

struct Sample<'a> {
    point: &'a EvalPoint,
    partner: Option<&'a EvalPoint>,
    m: (f64, f64),
}

fn measure_all<'a>(
    cond: Cond,
    l: &LagrangianExpr,
    items: &'a [(&'a EvalPoint, Option<&'a EvalPoint>)],
) -> Result<Vec<Sample<'a>>, RegularityError> {
    items
        .par_iter()
        .map(|&(point, partner)| {
            Ok(Sample {
                point,
                partner,
                m: cond.measure(l, point, partner)?,
            })
        })
        .collect()
}

/// Minimum slack and the sample attaining it; ties go to the
/// lexicographically smallest point so the result does not depend on order.
fn deepest<'a>(cond: Cond, samples: &'a [Sample<'a>]) -> (f64, Option<&'a Sample<'a>>) {
    let mut best: Option<(f64, &Sample)> = None;
    for s in samples {
        let v = cond.slack(s.m);
        let better = match best {
            None => true,
            Some((bv, bs)) => match v.total_cmp(&bv) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => {
                    let o = cmp_points(s.point, bs.point);
                    o.is_lt()
                        || (o.is_eq()
                            && match (s.partner, bs.partner) {
                                (Some(a), Some(b)) => cmp_points(a, b).is_lt(),
                                _ => false,
                            })
                }
            },
        };
        if better {
            best = Some((v, s));
        }
    }
    match best {
        Some((v, s)) => (v, Some(s)),
        None => (f64::INFINITY, None),
    }
}

fn certificate(kind: Kind, cond: Cond, constants: Vec<(&str, f64)>, samples: &[Sample], rng_seed: u64) -> Certificate {
    let (margin, arg) = deepest(cond, samples);
    let violated = margin < 0.0;
    Certificate {
        kind,
        verdict: if violated { Verdict::Violated } else { Verdict::HoldsOnSamples },
        constants: constants.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        witness: arg.filter(|_| violated).map(|s| s.point.clone()),
        witness_partner: arg.filter(|_| violated).and_then(|s| s.partner.cloned()),
        margin,
        sample_count: samples.len(),
        rng_seed,
    }
}

fn point_items(set: &SampleSet) -> Vec<(&EvalPoint, Option<&EvalPoint>)> {
    set.points().iter().map(|p| (p, None)).collect()
}

/// Largest `a` with `a * v + b <= u` on every sample with `v > 0`, shrunk
/// past rounding so the slacks it produces are nonnegative there. When no
/// positive `a` fits, the smallest positive double is used.
fn fit_linear_lower(samples: &[Sample], b: f64, make: impl Fn(f64) -> Cond) -> f64 {
    let mut a = samples
        .iter()
        .filter(|s| s.m.1 > 0.0 && s.m.1.is_finite() && s.m.0.is_finite())
        .map(|s| (s.m.0 - b) / s.m.1)
        .fold(f64::INFINITY, f64::min);
    if !(a > 0.0) {
        return f64::MIN_POSITIVE;
    }
    if a == f64::INFINITY {
        a = f64::MAX;
    }
    for _ in 0..64 {
        let cond = make(a);
        let ok = samples
            .iter()
            .filter(|s| s.m.1 > 0.0 && s.m.1.is_finite() && s.m.0.is_finite())
            .all(|s| cond.slack(s.m) >= 0.0);
        if ok {
            break;
        }
        a = (a * (1.0 - 4.0 * f64::EPSILON)).max(f64::MIN_POSITIVE);
    }
    a
}

fn check_b_min(b_min: f64) -> Result<(), RegularityError> {
    if !(b_min > 0.0) || !b_min.is_finite() {
        return Err(RegularityError::InvalidParameter(format!("b_min must be positive, got {b_min}")));
    }
    Ok(())
}

/// `a|w| + b <= |∂L/∂ẍ|` with `b = b_min` and the largest fitted `a`.
pub fn superlinearity_on(l: &LagrangianExpr, set: &SampleSet, b_min: f64) -> Result<Certificate, RegularityError> {
    lower_bound_check(l, set, b_min, Kind::Superlinearity, |a| Cond::Superlinear { a, b: b_min })
}

/// `a|w|² + b <= |∂L/∂ẍ|` with `b = b_min` and the largest fitted `a`.
pub fn quadratic_coercivity_on(l: &LagrangianExpr, set: &SampleSet, b_min: f64) -> Result<Certificate, RegularityError> {
    lower_bound_check(l, set, b_min, Kind::QuadraticCoercivity, |a| Cond::Quadratic { a, b: b_min })
}

fn lower_bound_check(
    l: &LagrangianExpr,
    set: &SampleSet,
    b_min: f64,
    kind: Kind,
    make: impl Fn(f64) -> Cond,
) -> Result<Certificate, RegularityError> {
    if !l.is_autonomous() {
        return Err(RegularityError::NotAutonomous);
    }
    check_b_min(b_min)?;
    let items = point_items(set);
    let samples = measure_all(make(0.0), l, &items)?;
    let a = fit_linear_lower(&samples, b_min, &make);
    Ok(certificate(kind, make(a), vec![("a", a), ("b", b_min)], &samples, set.rng_seed()))
}

/// Midpoint convexity in ẍ over same-base pairs, with tolerance 1e-12.
pub fn convexity_on(l: &LagrangianExpr, set: &SampleSet) -> Result<Certificate, RegularityError> {
    let cond = Cond::Convex { tol: CONVEXITY_TOL };
    let items: Vec<_> = set.pairs().iter().map(|(a, b)| (a, Some(b))).collect();
    let samples = measure_all(cond, l, &items)?;
    Ok(certificate(
        Kind::Convexity,
        cond,
        vec![("tolerance", CONVEXITY_TOL)],
        &samples,
        set.rng_seed(),
    ))
}

/// Smallest offset `r >= 0` making `c * v + r - u >= 0` on every finite
/// sample, for the given `c`.
fn offset_for(samples: &[Sample], c: f64, make: &impl Fn(f64, f64) -> Cond) -> f64 {
    let finite = || samples.iter().filter(|s| s.m.0.is_finite() && !s.m.1.is_nan());
    let mut r = finite().map(|s| s.m.0 - c * s.m.1).fold(0.0, f64::max);
    for _ in 0..64 {
        let cond = make(c, r);
        if finite().all(|s| cond.slack(s.m) >= 0.0) {
            break;
        }
        r = r.next_up().max(r + r * 2.0 * f64::EPSILON);
    }
    r
}

/// `c` with `c = r(c)`, where `r(c)` is the smallest offset for `c`:
/// the minimax choice over `(c, r)`, floored at 1e-12.
fn balanced_fit(samples: &[Sample], make: &impl Fn(f64, f64) -> Cond) -> (f64, f64) {
    let finite: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.m.0.is_finite() && s.m.1.is_finite())
        .map(|s| s.m)
        .collect();
    let r_of = |c: f64| finite.iter().map(|(u, v)| u - c * v).fold(0.0, f64::max);
    let mut lo = MIN_LEADING;
    let mut hi = r_of(lo);
    if hi <= lo {
        return (lo, offset_for(samples, lo, make));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mid - r_of(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (hi, offset_for(samples, hi, make))
}

/// `|∂L/∂x| + |∂L/∂ẋ| <= c|L| + r`.
pub fn tonelli_morrey_on(l: &LagrangianExpr, set: &SampleSet) -> Result<Certificate, RegularityError> {
    let make = |c, r| Cond::Envelope {
        which: Envelope::TonelliMorrey,
        c,
        r,
    };
    let items = point_items(set);
    let samples = measure_all(make(0.0, 0.0), l, &items)?;
    let (c, r) = balanced_fit(&samples, &make);
    Ok(certificate(Kind::TonelliMorrey, make(c, r), vec![("c", c), ("r", r)], &samples, set.rng_seed()))
}

/// `|∂L/∂t| <= c|L| + k` with a constant `k`. Autonomous Lagrangians hold
/// with `(0, 0)`; otherwise `c` is the largest ratio `|∂L/∂t| / |L|` over
/// samples with `L != 0` and `k` the remaining offset.
pub fn autonomy_on(l: &LagrangianExpr, set: &SampleSet) -> Result<Certificate, RegularityError> {
    let make = |c, r| Cond::Envelope {
        which: Envelope::Autonomy,
        c,
        r,
    };
    let items = point_items(set);
    let samples = measure_all(make(0.0, 0.0), l, &items)?;
    let (c, k) = if l.is_autonomous() {
        (0.0, 0.0)
    } else {
        let c = samples
            .iter()
            .filter(|s| s.m.1 > 0.0 && s.m.1.is_finite() && s.m.0.is_finite())
            .map(|s| s.m.0 / s.m.1)
            .fold(0.0, f64::max);
        (c, offset_for(&samples, c, &make))
    };
    Ok(certificate(Kind::Autonomy, make(c, k), vec![("c", c), ("k", k)], &samples, set.rng_seed()))
}

/// `(|∂L/∂t| + |∂L/∂x|)|ẋ|^μ <= γ L^β + η`.
pub fn sarychev_torres_on(l: &LagrangianExpr, set: &SampleSet, beta: f64, mu: f64) -> Result<Certificate, RegularityError> {
    if !(beta < 2.0) || !beta.is_finite() {
        return Err(RegularityError::InvalidParameter(format!("beta must be < 2, got {beta}")));
    }
    if !(mu >= (beta - 1.0).max(-1.0)) || !mu.is_finite() {
        return Err(RegularityError::InvalidParameter(format!(
            "mu must be >= max(beta - 1, -1), got {mu}"
        )));
    }
    let make = |c, r| Cond::Envelope {
        which: Envelope::SarychevTorres { beta, mu },
        c,
        r,
    };
    let items = point_items(set);
    let samples = measure_all(make(0.0, 0.0), l, &items)?;
    let (gamma, eta) = balanced_fit(&samples, &make);
    Ok(certificate(
        Kind::SarychevTorres,
        make(gamma, eta),
        vec![("gamma", gamma), ("beta", beta), ("mu", mu), ("eta", eta)],
        &samples,
        set.rng_seed(),
    ))
}

pub fn check_superlinearity(l: &LagrangianExpr, dom: &SampleDomain, b_min: f64) -> Result<Certificate, RegularityError> {
    superlinearity_on(l, &SampleSet::generate(dom, l.dim())?, b_min)
}

pub fn check_quadratic_coercivity(l: &LagrangianExpr, dom: &SampleDomain, b_min: f64) -> Result<Certificate, RegularityError> {
    quadratic_coercivity_on(l, &SampleSet::generate(dom, l.dim())?, b_min)
}

pub fn check_convexity_last_arg(l: &LagrangianExpr, dom: &SampleDomain) -> Result<Certificate, RegularityError> {
    convexity_on(l, &SampleSet::generate(dom, l.dim())?)
}

pub fn check_tonelli_morrey(l: &LagrangianExpr, dom: &SampleDomain) -> Result<Certificate, RegularityError> {
    tonelli_morrey_on(l, &SampleSet::generate(dom, l.dim())?)
}

pub fn check_autonomy_condition(l: &LagrangianExpr, dom: &SampleDomain) -> Result<Certificate, RegularityError> {
    autonomy_on(l, &SampleSet::generate(dom, l.dim())?)
}

pub fn check_sarychev_torres(
    l: &LagrangianExpr,
    dom: &SampleDomain,
    beta: f64,
    mu: f64,
) -> Result<Certificate, RegularityError> {
    sarychev_torres_on(l, &SampleSet::generate(dom, l.dim())?, beta, mu)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoercivityVerdict {
    SuperlinearOnSamples,
    NotSuperlinear,
}

/// `Θ̂(r)`, the minimum of `L` over the shell `|ẍ| = r`, per radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercivityTable {
    pub radii: Vec<f64>,
    pub theta: Vec<f64>,
    pub ratios: Vec<f64>,
    pub argmin: Vec<EvalPoint>,
    pub verdict: CoercivityVerdict,
    pub rng_seed: u64,
}

/// Unit directions in ẍ-space: `±e_i`, plus 16 random ones when `n > 1`.
fn shell_directions(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut d = vec![0.0; n];
            d[i] = s;
            dirs.push(d);
        }
    }
    if n > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        while dirs.len() < 2 * n + 16 {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let len = norm(&v);
            if len > 1e-3 && len <= 1.0 {
                dirs.push(v.iter().map(|c| c / len).collect());
            }
        }
    }
    dirs
}

/// Shell sampling over the set's `(t, x, ẋ)` bases. The verdict is positive
/// iff `Θ̂(r)/r` strictly increases over the last three radii.
pub fn coercivity_on(l: &LagrangianExpr, set: &SampleSet, radii: &[f64]) -> Result<CoercivityTable, RegularityError> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(RegularityError::InvalidParameter(
            "radii must be nonempty, positive and increasing".into(),
        ));
    }
    let dirs = shell_directions(l.dim(), set.rng_seed());
    let mut theta = Vec::with_capacity(radii.len());
    let mut argmin = Vec::with_capacity(radii.len());
    for &r in radii {
        let points: Vec<EvalPoint> = set
            .bases()
            .iter()
            .flat_map(|(t, x, xd)| {
                dirs.iter()
                    .map(move |d| EvalPoint::new(*t, x.clone(), xd.clone(), d.iter().map(|c| c * r).collect()))
            })
            .collect();
        let values: Vec<f64> = points
            .par_iter()
            .map(|p| l.eval(p).map_err(|source| RegularityError::Domain { t: p.t, source }))
            .collect::<Result<_, _>>()?;
        let mut best = 0;
        for j in 1..values.len() {
            let o = values[j].total_cmp(&values[best]);
            if o.is_lt() || (o.is_eq() && cmp_points(&points[j], &points[best]).is_lt()) {
                best = j;
            }
        }
        theta.push(values[best]);
        argmin.push(points[best].clone());
    }
    let ratios: Vec<f64> = theta.iter().zip(radii).map(|(t, r)| t / r).collect();
    let tail = &ratios[ratios.len().saturating_sub(3)..];
    let increasing = tail.len() >= 2 && tail.windows(2).all(|w| w[1] > w[0]);
    Ok(CoercivityTable {
        radii: radii.to_vec(),
        theta,
        ratios,
        argmin,
        verdict: if increasing {
            CoercivityVerdict::SuperlinearOnSamples
        } else {
            CoercivityVerdict::NotSuperlinear
        },
        rng_seed: set.rng_seed(),
    })
}

pub fn check_coercivity(l: &LagrangianExpr, dom: &SampleDomain, radii: &[f64]) -> Result<CoercivityTable, RegularityError> {
    coercivity_on(l, &SampleSet::generate(dom, l.dim())?, radii)
}

#[cfg(test)]
mod tests;
