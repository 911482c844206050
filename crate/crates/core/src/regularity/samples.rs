use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::RegularityError;
use crate::expr::EvalPoint;

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub fn new(lo: f64, hi: f64) -> Self {
        Range { lo, hi }
    }

    fn grid(&self, count: usize) -> Vec<f64> {
        (0..count)
            .map(|j| {
                if j + 1 == count {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * j as f64 / (count - 1) as f64
                }
            })
            .collect()
    }
}

/// Samples per axis of each variable group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCounts {
    pub t: usize,
    pub x: usize,
    pub xd: usize,
    pub xdd: usize,
}

/// Box over `(t, x, xd, xdd)`; the same range applies to every component of
/// a group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleDomain {
    pub t: Range,
    pub x: Range,
    pub xd: Range,
    pub xdd: Range,
    pub grid_counts: GridCounts,
    pub rng_seed: u64,
    pub random_count: usize,
}

impl Default for SampleDomain {
    fn default() -> Self {
        SampleDomain {
            t: Range::new(0.0, 1.0),
            x: Range::new(-2.0, 2.0),
            xd: Range::new(-2.0, 2.0),
            xdd: Range::new(-5.0, 5.0),
            grid_counts: GridCounts {
                t: 3,
                x: 5,
                xd: 5,
                xdd: 11,
            },
            rng_seed: 0,
            random_count: 256,
        }
    }
}

impl SampleDomain {
    pub fn validate(&self) -> Result<(), RegularityError> {
        let c = &self.grid_counts;
        for (name, r, count) in [
            ("t", self.t, c.t),
            ("x", self.x, c.x),
            ("xd", self.xd, c.xd),
            ("xdd", self.xdd, c.xdd),
        ] {
            if !(r.lo < r.hi) || !r.lo.is_finite() || !r.hi.is_finite() {
                return Err(RegularityError::InvalidDomain(format!("{name} range must satisfy lo < hi")));
            }
            if count < 2 {
                return Err(RegularityError::InvalidDomain(format!("{name} count must be at least 2")));
            }
        }
        Ok(())
    }
}

fn tensor(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        out = out
            .iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

/// Points for the one-sided checks and same-base pairs for the convexity
/// check, in a fixed enumeration order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    points: Vec<EvalPoint>,
    pairs: Vec<(EvalPoint, EvalPoint)>,
    bases: Vec<(f64, Vec<f64>, Vec<f64>)>,
    rng_seed: u64,
}

/// Pairs per base are exhaustive up to this many ẍ samples, banded above it.
const FULL_PAIR_LIMIT: usize = 24;

impl SampleSet {
    /// Tensor grid over the box, forced points (`xdd = 0` and each ẍ axis at
    /// its extremes) at every grid base, then `random_count` uniform points
    /// and as many random same-base pairs.
    pub fn generate(dom: &SampleDomain, n: usize) -> Result<Self, RegularityError> {
        dom.validate()?;
        let c = &dom.grid_counts;
        let tg = dom.t.grid(c.t);
        let xs = tensor(&vec![dom.x.grid(c.x); n]);
        let xds = tensor(&vec![dom.xd.grid(c.xd); n]);
        let mut ws = tensor(&vec![dom.xdd.grid(c.xdd); n]);
        let mut forced = vec![vec![0.0; n]];
        for i in 0..n {
            for v in [dom.xdd.lo, dom.xdd.hi] {
                let mut w = vec![0.0; n];
                w[i] = v;
                forced.push(w);
            }
        }
        for w in forced {
            if !ws.contains(&w) {
                ws.push(w);
            }
        }

        let mut bases = Vec::with_capacity(tg.len() * xs.len() * xds.len());
        for &t in &tg {
            for x in &xs {
                for xd in &xds {
                    bases.push((t, x.clone(), xd.clone()));
                }
            }
        }

        let mut points = Vec::with_capacity(bases.len() * ws.len() + dom.random_count);
        let mut pairs = Vec::new();
        let m = ws.len();
        for (t, x, xd) in &bases {
            let at = |w: &Vec<f64>| EvalPoint::new(*t, x.clone(), xd.clone(), w.clone());
            points.extend(ws.iter().map(at));
            for i in 0..m {
                if m <= FULL_PAIR_LIMIT {
                    for j in i + 1..m {
                        pairs.push((at(&ws[i]), at(&ws[j])));
                    }
                } else {
                    for k in 1..=4 {
                        pairs.push((at(&ws[i]), at(&ws[(i + k) % m])));
                    }
                }
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(dom.rng_seed);
        let mut draw = |r: Range, k: usize| -> Vec<f64> { (0..k).map(|_| rng.gen_range(r.lo..=r.hi)).collect() };
        for _ in 0..dom.random_count {
            let t = draw(dom.t, 1)[0];
            points.push(EvalPoint::new(t, draw(dom.x, n), draw(dom.xd, n), draw(dom.xdd, n)));
        }
        for _ in 0..dom.random_count {
            let t = draw(dom.t, 1)[0];
            let (x, xd) = (draw(dom.x, n), draw(dom.xd, n));
            let (w1, w2) = (draw(dom.xdd, n), draw(dom.xdd, n));
            pairs.push((
                EvalPoint::new(t, x.clone(), xd.clone(), w1),
                EvalPoint::new(t, x, xd, w2),
            ));
        }
        Ok(SampleSet {
            points,
            pairs,
            bases,
            rng_seed: dom.rng_seed,
        })
    }

    /// An explicit sample set; `bases` (used for shell sampling) are taken
    /// from the distinct `(t, x, xd)` of the points.
    pub fn from_points(points: Vec<EvalPoint>, pairs: Vec<(EvalPoint, EvalPoint)>, rng_seed: u64) -> Self {
        let mut bases: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::new();
        for p in &points {
            let b = (p.t, p.x.clone(), p.xd.clone());
            if !bases.contains(&b) {
                bases.push(b);
            }
        }
        SampleSet {
            points,
            pairs,
            bases,
            rng_seed,
        }
    }

    pub fn points(&self) -> &[EvalPoint] {
        &self.points
    }

    pub fn pairs(&self) -> &[(EvalPoint, EvalPoint)] {
        &self.pairs
    }

    pub fn bases(&self) -> &[(f64, Vec<f64>, Vec<f64>)] {
        &self.bases
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }
}
