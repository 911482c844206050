//! Pointwise smooth-case forms, for cross-checking the integral profiles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ConditionError;
use crate::expr::Partials;
use crate::trajectory::{Curve, Problem};

/// Samples of the classical Euler–Lagrange residual
/// `L_x - d/dt L_xd + d²/dt² L_xdd` (one row of `n` per sample) and of
/// `L - xd·L_xd - xdd·L_xdd + xd·d/dt L_xdd`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalResiduals {
    pub t: Vec<f64>,
    pub el_residual: Vec<Vec<f64>>,
    pub dbr_values: Vec<f64>,
}

/// Sample times: cell midpoints, pushed to at least 5% of a piece away from
/// the nearest breakpoint.
fn sample_times(curve: &impl Curve, grid_size: usize) -> Vec<(f64, f64)> {
    let (a, b) = curve.span();
    let mut cuts: Vec<f64> = curve.breakpoints().into_iter().filter(|t| *t > a && *t < b).collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    (0..grid_size)
        .map(|j| {
            let t = a + (b - a) * (j as f64 + 0.5) / grid_size as f64;
            let k = cuts.partition_point(|&c| c <= t).clamp(1, cuts.len() - 1);
            let (lo, hi) = (cuts[k - 1], cuts[k]);
            let margin = 0.05 * (hi - lo);
            let t = t.clamp(lo + margin, hi - margin);
            let dist = (t - lo).min(hi - t);
            (t, (1e-4 * (b - a)).min(0.25 * dist))
        })
        .collect()
}

pub fn classical_residuals(
    p: &Problem,
    curve: &impl Curve,
    grid_size: usize,
) -> Result<ClassicalResiduals, ConditionError> {
    let l = p.lagrangian();
    let n = p.n();
    let at = |t: f64| -> Result<Partials, ConditionError> {
        l.partials(&curve.state(t).at(t))
            .map_err(|source| ConditionError::Domain { t, source })
    };
    let rows: Vec<(f64, Vec<f64>, f64)> = sample_times(curve, grid_size)
        .into_par_iter()
        .map(|(t, h)| {
            let st = curve.state(t);
            let (m, c, pl) = (at(t - h)?, at(t)?, at(t + h)?);
            let mut el = Vec::with_capacity(n);
            let mut dbr = c.value;
            for i in 0..n {
                let d_xd = (pl.xd[i] - m.xd[i]) / (2.0 * h);
                let d_xdd = (pl.xdd[i] - m.xdd[i]) / (2.0 * h);
                let dd_xdd = (pl.xdd[i] - 2.0 * c.xdd[i] + m.xdd[i]) / (h * h);
                el.push(c.x[i] - d_xd + dd_xdd);
                dbr += -st.xd[i] * c.xd[i] - st.xdd[i] * c.xdd[i] + st.xd[i] * d_xdd;
            }
            Ok((t, el, dbr))
        })
        .collect::<Result<_, ConditionError>>()?;
    let mut out = ClassicalResiduals {
        t: Vec::with_capacity(rows.len()),
        el_residual: Vec::with_capacity(rows.len()),
        dbr_values: Vec::with_capacity(rows.len()),
    };
    for (t, el, dbr) in rows {
        out.t.push(t);
        out.el_residual.push(el);
        out.dbr_values.push(dbr);
    }
    Ok(out)
}
