use super::*;
use crate::trajectory::{graded_mesh, uniform_mesh, BoundaryData, Endpoint, PowerLaw};

fn problem(l: &str, bc: BoundaryData) -> Problem {
    Problem::new(0.0, 1.0, LagrangianExpr::parse(l, 1).unwrap(), bc).unwrap()
}

fn smoothstep() -> BoundaryData {
    BoundaryData::scalar(0.0, 1.0, 0.0, 0.0)
}

fn cubic(p: &Problem, k: usize) -> Trajectory {
    Trajectory::boundary_cubic(p, uniform_mesh(0.0, 1.0, k)).unwrap()
}

fn point(tp: f64, tpp: f64, xp: f64, xpp: f64) -> ReparamPoint {
    ReparamPoint {
        t: 0.3,
        x: vec![0.7],
        tprime: tp,
        xprime: vec![xp],
        tsecond: tpp,
        xsecond: vec![xpp],
    }
}

#[test]
fn rejects_nonpositive_tprime() {
    let l = LagrangianExpr::parse("pow(xdd1,2)", 1).unwrap();
    for tp in [0.0, -0.5, f64::NAN] {
        assert!(matches!(
            f_partials(&l, &point(tp, 0.0, 0.0, 1.0)),
            Err(ConditionError::NonPositiveTprime(_))
        ));
    }
}

#[test]
fn zero_xprime_kills_tsecond_partial() {
    let l = LagrangianExpr::parse("pow(xdd1,2)*exp(t)+x1*xd1", 1).unwrap();
    let fp = f_partials(&l, &point(0.6, -0.2, 0.0, 1.3)).unwrap();
    assert_eq!(fp.tsecond, 0.0);
}

#[test]
fn unit_speed_point_reduces_to_l() {
    let l = LagrangianExpr::parse("pow(xdd1,2)+t*xd1*x1+pow(xd1,3)", 1).unwrap();
    let (x, xd, xdd) = (0.7, -1.1, 2.5);
    let fp = f_partials(&l, &point(1.0, 0.0, xd, xdd)).unwrap();
    let lv = xdd * xdd + 0.3 * xd * x + xd.powi(3);
    let l_xd = 0.3 * x + 3.0 * xd * xd;
    let l_xdd = 2.0 * xdd;
    assert!((fp.value - lv).abs() < 1e-14);
    assert!((fp.tprime - (lv - l_xd * xd - 2.0 * l_xdd * xdd)).abs() < 1e-13);
    assert!((fp.xsecond[0] - l_xdd).abs() < 1e-14);
}

#[test]
fn point_round_trips_through_mapping() {
    let p = problem("pow(xdd1,2)", smoothstep());
    let traj = cubic(&p, 4);
    let q = ReparamPoint::on_curve(&traj, 0.37);
    let e = q.mapped();
    let st = traj.state(0.37);
    assert!((e.xd[0] - st.xd[0]).abs() < 1e-14);
    assert!((e.xdd[0] - st.xdd[0]).abs() < 1e-13);
}

// For the exact cubic 3t²-2t³ both profiles are affine in s:
// φ₀ = 36 s and φ₁ = 12 - 24 s (the slopes follow from differentiating the
// profiles at s = 0, where xd = 0, t' = 1, t'' = 0).
#[test]
fn cubic_profiles_match_affine_closed_forms() {
    let p = problem("pow(xdd1,2)", smoothstep());
    let traj = cubic(&p, 8);
    let chart = ArcLengthChart::build(&traj, 4096).unwrap();
    let phi0 = dbr_profile(&p, &traj, &chart, 1024).unwrap();
    let phi1 = el_profile(&p, &traj, &chart, 1, 1024).unwrap();
    for (j, &s) in phi0.s_grid.iter().enumerate() {
        assert!((phi0.values[j] - 36.0 * s).abs() < 5e-4, "{s} {}", phi0.values[j]);
        assert!((phi1.values[j] - (12.0 - 24.0 * s)).abs() < 5e-4, "{s} {}", phi1.values[j]);
    }
    assert!((phi0.slope - 36.0).abs() < 1e-3);
    assert!((phi1.slope + 24.0).abs() < 1e-3);
    assert!(phi0.affine_deviation < 1e-4 && phi1.affine_deviation < 1e-4);
    assert!(phi0.deviation > 1.0 && phi1.deviation > 1.0);
    assert!(!phi0.singular_endpoint);
}

#[test]
fn affine_deviation_shrinks_with_grid() {
    let p = problem("pow(xdd1,2)", smoothstep());
    let traj = cubic(&p, 8);
    let chart = ArcLengthChart::build(&traj, 4096).unwrap();
    let devs: Vec<f64> = [64, 128, 256, 512]
        .iter()
        .map(|&g| dbr_profile(&p, &traj, &chart, g).unwrap().affine_deviation)
        .collect();
    assert!(devs.windows(2).all(|w| w[1] < w[0]), "{devs:?}");
}

#[test]
fn perturbed_trajectory_separates() {
    let p = problem("pow(xdd1,2)", smoothstep());
    let traj = cubic(&p, 8);
    let mut bent = traj.clone();
    bent.slope_mut(4)[0] += 0.2;
    let dev = |t: &Trajectory| {
        let chart = ArcLengthChart::build(t, 4096).unwrap();
        (
            dbr_profile(&p, t, &chart, 256).unwrap().affine_deviation,
            el_profile(&p, t, &chart, 1, 256).unwrap().affine_deviation,
        )
    };
    let (m0, m1) = dev(&traj);
    let (b0, b1) = dev(&bent);
    assert!(b0 > 10.0 * m0 && b1 > 10.0 * m1, "{m0} {b0} {m1} {b1}");
}

#[test]
fn constant_lagrangian_profiles() {
    let p = problem("1", smoothstep());
    let traj = cubic(&p, 5);
    let chart = ArcLengthChart::build(&traj, 512).unwrap();
    let phi1 = el_profile(&p, &traj, &chart, 1, 64).unwrap();
    assert!(phi1.values.iter().all(|&v| v == 0.0));
    // F = t', so φ₀ = -s with no double-integral contribution
    let phi0 = dbr_profile(&p, &traj, &chart, 64).unwrap();
    for (s, v) in phi0.s_grid.iter().zip(&phi0.values) {
        assert!((v + s).abs() < 1e-12);
    }
}

#[test]
fn profile_argument_errors() {
    let p = problem("pow(xdd1,2)", smoothstep());
    let traj = cubic(&p, 4);
    let chart = ArcLengthChart::build(&traj, 256).unwrap();
    assert_eq!(dbr_profile(&p, &traj, &chart, 15), Err(ConditionError::GridTooSmall(15)));
    assert!(matches!(
        el_profile(&p, &traj, &chart, 2, 64),
        Err(ConditionError::ComponentOutOfRange { index: 2, dim: 1 })
    ));
    let mut other = traj.clone();
    other.slope_mut(1)[0] += 0.1;
    assert_eq!(dbr_profile(&p, &other, &chart, 64), Err(ConditionError::ChartMismatch));
}

#[test]
fn classical_dbr_on_cubic() {
    let p = problem("pow(xdd1,2)", smoothstep());
    let traj = cubic(&p, 16);
    let r = classical_residuals(&p, &traj, 200).unwrap();
    assert_eq!(r.t.len(), 200);
    assert!(r.dbr_values.iter().all(|v| (v + 36.0).abs() < 1e-6), "{:?}", r.dbr_values);
    assert!(r.el_residual.iter().all(|e| e[0].abs() < 1e-3));
}

#[test]
fn classical_el_on_power_law() {
    let k = (0.6f64).powf(5.0 / 3.0);
    let p = problem("0.01*pow(xdd1,2)", BoundaryData::scalar(0.0, k, 0.0, 5.0 * k / 3.0));
    let law = PowerLaw {
        coeff: k,
        exponent: 5.0 / 3.0,
        origin: 0.0,
        end: 1.0,
    };
    let r = classical_residuals(&p, &law, 64).unwrap();
    for (t, e) in r.t.iter().zip(&r.el_residual) {
        let exact = 0.02 * k * 40.0 / 81.0 * t.powf(-7.0 / 3.0);
        assert!((e[0] - exact).abs() < 1e-3 * exact, "{t} {} {exact}", e[0]);
    }
}

#[test]
fn singular_flag_on_graded_power_law() {
    let k = (0.6f64).powf(5.0 / 3.0);
    let p = problem("0.01*pow(xdd1,2)", BoundaryData::scalar(0.0, k, 0.0, 5.0 * k / 3.0));
    let law = PowerLaw {
        coeff: k,
        exponent: 5.0 / 3.0,
        origin: 0.0,
        end: 1.0,
    };
    let traj = law.sample(graded_mesh(0.0, 1.0, 40, 2.0, Endpoint::Start)).unwrap();
    let chart = ArcLengthChart::build(&traj, 2048).unwrap();
    let phi = el_profile(&p, &traj, &chart, 1, 128).unwrap();
    assert!(phi.singular_endpoint);
    assert!(phi.values.iter().all(|v| v.is_finite()));
}

#[test]
fn csv_round_trip() {
    let p = problem("pow(xdd1,2)", smoothstep());
    let traj = cubic(&p, 4);
    let chart = ArcLengthChart::build(&traj, 256).unwrap();
    let phi = dbr_profile(&p, &traj, &chart, 32).unwrap();
    let (c, d, s, v) = ConditionProfile::parse_csv(&phi.to_csv()).unwrap();
    assert_eq!((c, d), (phi.c_hat, phi.deviation));
    assert_eq!(s, phi.s_grid);
    assert_eq!(v, phi.values);
    assert!(matches!(
        ConditionProfile::parse_csv("# c_hat=1 deviation=0\ns,phi\n1,2,3\n"),
        Err(ConditionError::Csv { line: 3, .. })
    ));
}
