//! Finite-difference oracles shared by the integration tests.

/// Ridders' extrapolated central difference in coordinate `k`, starting
/// from a wide step and keeping the tableau entry with the smallest error
/// estimate over the whole tableau. Handles partials that are small next to `F` and coordinates
/// along which `F` varies on very different scales.
pub fn ridders(f: impl Fn(&[f64]) -> f64, base: &[f64], k: usize) -> f64 {
    const CON: f64 = 1.4;
    const NTAB: usize = 16;
    let central = |h: f64| {
        let mut hi = base.to_vec();
        let mut lo = base.to_vec();
        hi[k] += h;
        lo[k] -= h;
        (f(&hi) - f(&lo)) / (2.0 * h)
    };
    // the t' step must stay well inside (0, t')
    let mut h = if k == 1 { 1e-2 * base[1] } else { 1e-2 * (1.0 + base[k].abs()) };
    let mut a = [[0.0; NTAB]; NTAB];
    a[0][0] = central(h);
    let (mut best, mut err) = (a[0][0], f64::INFINITY);
    for i in 1..NTAB {
        h /= CON;
        a[0][i] = central(h);
        let mut fac = CON * CON;
        for j in 1..=i {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
            fac *= CON * CON;
            let e = (a[j][i] - a[j - 1][i]).abs().max((a[j][i] - a[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = a[j][i];
            }
        }
    }
    best
}
