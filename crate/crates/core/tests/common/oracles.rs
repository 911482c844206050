//! Closed-form and high-resolution reference values.

use varcheck_core::quadrature::GaussRule;

/// Continuous oracle for `min ∫ u² + mu (|u| - M)₊²` over `u = xdd` with
/// bc (0,1,0,0), i.e. `∫ u = 0` and `∫ (1-t) u = 1`. Stationarity makes
/// `g'(u(t))` affine, `g'(u) = λ + νt`; Newton on `(λ, ν)`.
pub fn penalized_oracle(mu: f64, cap: f64) -> f64 {
    let u_of = |y: f64| {
        if y.abs() <= 2.0 * cap {
            (y / 2.0, 0.5)
        } else {
            (y.signum() * (y.abs() + 2.0 * mu * cap) / (2.0 + 2.0 * mu), 1.0 / (2.0 + 2.0 * mu))
        }
    };
    let rule = GaussRule::new(7);
    let cells = 20_000;
    let integrate = |f: &dyn Fn(f64) -> f64| -> f64 {
        (0..cells)
            .map(|k| rule.integrate(k as f64 / cells as f64, (k + 1) as f64 / cells as f64, f))
            .sum()
    };
    let (mut lam, mut nu) = (12.0, -24.0);
    for _ in 0..50 {
        let r1 = integrate(&|t| u_of(lam + nu * t).0);
        let r2 = integrate(&|t| (1.0 - t) * u_of(lam + nu * t).0) - 1.0;
        let a11 = integrate(&|t| u_of(lam + nu * t).1);
        let a12 = integrate(&|t| t * u_of(lam + nu * t).1);
        let a21 = integrate(&|t| (1.0 - t) * u_of(lam + nu * t).1);
        let a22 = integrate(&|t| (1.0 - t) * t * u_of(lam + nu * t).1);
        let det = a11 * a22 - a12 * a21;
        let dl = (r1 * a22 - r2 * a12) / det;
        let dn = (a11 * r2 - a21 * r1) / det;
        lam -= dl;
        nu -= dn;
        if dl.abs() + dn.abs() < 1e-13 {
            break;
        }
    }
    integrate(&|t| {
        let u = u_of(lam + nu * t).0;
        let e = (u.abs() - cap).max(0.0);
        u * u + mu * e * e
    })
}
