use super::*;

const CV90: &str = "pow(abs(pow(x1,2)-pow(xd1,5)),2)*pow(abs(xdd1),22)+0.01*pow(xdd1,2)";
const SINH: &str = "(exp(xdd1)-exp(-xdd1))/2";

fn expr(s: &str) -> LagrangianExpr {
    LagrangianExpr::parse(s, 1).unwrap()
}

fn dom() -> SampleDomain {
    SampleDomain {
        random_count: 64,
        ..Default::default()
    }
}

fn set() -> SampleSet {
    SampleSet::generate(&dom(), 1).unwrap()
}

fn assert_sound(l: &LagrangianExpr, c: &Certificate) {
    assert_eq!(c.verdict == Verdict::Violated, c.witness.is_some());
    assert_eq!(c.witness.is_some(), c.margin < 0.0);
    if let Some(s) = c.recheck(l).unwrap() {
        assert_eq!(s.to_bits(), c.margin.to_bits());
    }
}

#[test]
fn default_set_contains_origin_at_every_base() {
    let s = set();
    for (t, x, xd) in s.bases() {
        assert!(s
            .points()
            .iter()
            .any(|p| p.t == *t && &p.x == x && &p.xd == xd && p.xdd == vec![0.0]));
    }
    assert!(s.points().iter().any(|p| p.xdd == vec![-5.0]));
}

#[test]
fn domain_validation() {
    let mut d = dom();
    d.x = Range::new(1.0, 1.0);
    assert!(matches!(SampleSet::generate(&d, 1), Err(RegularityError::InvalidDomain(_))));
    let mut d = dom();
    d.grid_counts.xdd = 1;
    assert!(SampleSet::generate(&d, 1).is_err());
}

#[test]
fn cv90_fails_superlinearity_at_origin() {
    let l = expr(CV90);
    for c in [
        superlinearity_on(&l, &set(), 1.0).unwrap(),
        quadratic_coercivity_on(&l, &set(), 1.0).unwrap(),
    ] {
        assert_eq!(c.verdict, Verdict::Violated);
        assert_eq!(c.witness.as_ref().unwrap().xdd, vec![0.0]);
        assert_sound(&l, &c);
    }
}

#[test]
fn square_fails_superlinearity_at_origin() {
    let l = expr("pow(xdd1,2)");
    let c = superlinearity_on(&l, &set(), 0.5).unwrap();
    assert_eq!(c.verdict, Verdict::Violated);
    assert_eq!(c.witness.as_ref().unwrap().xdd, vec![0.0]);
    assert_eq!(c.margin, -0.5);
    assert_sound(&l, &c);
}

#[test]
fn affine_term_example_fails_where_derivative_vanishes() {
    let l = expr("1*pow(xdd1,2)+2*xdd1");
    let c = superlinearity_on(&l, &set(), 1.0).unwrap();
    assert_eq!(c.verdict, Verdict::Violated);
    assert_eq!(c.witness.as_ref().unwrap().xdd, vec![-1.0]);
    assert_sound(&l, &c);
}

#[test]
fn sinh_is_superlinear_with_oracle_slope() {
    let l = expr(SINH);
    let s = set();
    let c = superlinearity_on(&l, &s, 0.5).unwrap();
    assert_eq!(c.verdict, Verdict::HoldsOnSamples);
    let oracle = s
        .points()
        .iter()
        .map(|p| p.xdd[0])
        .filter(|w| *w != 0.0)
        .map(|w| (w.cosh() - 0.5) / w.abs())
        .fold(f64::INFINITY, f64::min);
    let a = c.constants["a"];
    assert!(a <= oracle * (1.0 + 1e-12) && a >= oracle * (1.0 - 1e-12), "{a} {oracle}");
    assert_eq!(c.constants["b"], 0.5);
    assert!(c.margin >= 0.0);
}

#[test]
fn quadratic_coercivity_implies_superlinearity() {
    let l = expr(SINH);
    let s = set();
    let q = quadratic_coercivity_on(&l, &s, 0.5).unwrap();
    assert_eq!(q.verdict, Verdict::HoldsOnSamples);
    let sl = superlinearity_on(&l, &s, 0.5).unwrap();
    let w_lo = s
        .points()
        .iter()
        .map(|p| p.xdd[0].abs())
        .filter(|w| *w > 0.0)
        .fold(f64::INFINITY, f64::min);
    assert_eq!(sl.verdict, Verdict::HoldsOnSamples);
    assert!(sl.constants["a"] >= q.constants["a"] * w_lo * (1.0 - 1e-12));
}

#[test]
fn non_autonomous_rejected() {
    let l = expr("t*pow(xdd1,2)");
    assert_eq!(superlinearity_on(&l, &set(), 1.0), Err(RegularityError::NotAutonomous));
    assert_eq!(quadratic_coercivity_on(&l, &set(), 1.0), Err(RegularityError::NotAutonomous));
    assert!(matches!(
        superlinearity_on(&expr("pow(xdd1,2)"), &set(), 0.0),
        Err(RegularityError::InvalidParameter(_))
    ));
}

#[test]
fn convexity_verdicts() {
    for s in ["pow(xdd1,2)", CV90] {
        let l = expr(s);
        let c = convexity_on(&l, &set()).unwrap();
        assert_eq!(c.verdict, Verdict::HoldsOnSamples, "{s}");
    }
    let l = expr("-pow(xdd1,2)");
    let c = convexity_on(&l, &set()).unwrap();
    assert_eq!(c.verdict, Verdict::Violated);
    let (w1, w2) = (c.witness.as_ref().unwrap(), c.witness_partner.as_ref().unwrap());
    assert_ne!(w1.xdd, w2.xdd);
    assert_eq!((w1.t, &w1.x, &w1.xd), (w2.t, &w2.x, &w2.xd));
    assert_sound(&l, &c);
}

#[test]
fn coercivity_tables() {
    let radii = [1.0, 2.0, 4.0, 8.0];
    let sq = coercivity_on(&expr("pow(xdd1,2)"), &set(), &radii).unwrap();
    assert_eq!(sq.theta, vec![1.0, 4.0, 16.0, 64.0]);
    assert_eq!(sq.verdict, CoercivityVerdict::SuperlinearOnSamples);
    let ab = coercivity_on(&expr("abs(xdd1)"), &set(), &radii).unwrap();
    assert_eq!(ab.ratios, vec![1.0; 4]);
    assert_eq!(ab.verdict, CoercivityVerdict::NotSuperlinear);
    let cv = coercivity_on(&expr(CV90), &set(), &radii).unwrap();
    assert_eq!(cv.verdict, CoercivityVerdict::SuperlinearOnSamples);
    for (t, r) in cv.theta.iter().zip(radii) {
        assert!(*t >= 0.01 * r * r * (1.0 - 1e-12));
    }
    assert!(coercivity_on(&expr("abs(xdd1)"), &set(), &[]).is_err());
    assert!(coercivity_on(&expr("abs(xdd1)"), &set(), &[2.0, 1.0]).is_err());
}

#[test]
fn coercivity_in_two_dimensions() {
    let l = LagrangianExpr::parse("pow(xdd1,2)+pow(xdd2,2)", 2).unwrap();
    let mut d = dom();
    d.grid_counts = GridCounts { t: 2, x: 2, xd: 2, xdd: 3 };
    let tab = check_coercivity(&l, &d, &[1.0, 2.0, 3.0]).unwrap();
    for (t, r) in tab.theta.iter().zip([1.0, 2.0, 3.0f64]) {
        assert!((t - r * r).abs() < 1e-12 * r * r);
    }
}

#[test]
fn tonelli_morrey_fits() {
    let l = expr("pow(xdd1,2)");
    let c = tonelli_morrey_on(&l, &set()).unwrap();
    assert_eq!(c.verdict, Verdict::HoldsOnSamples);
    assert_eq!((c.constants["c"], c.constants["r"]), (1e-12, 0.0));

    // 2|x| <= x² + w² + 1 with equality at x = ±1, w = 0, which the grid has
    let l = expr("pow(xdd1,2)+pow(x1,2)");
    let c = tonelli_morrey_on(&l, &set()).unwrap();
    assert_eq!(c.verdict, Verdict::HoldsOnSamples);
    assert!((c.constants["c"] - 1.0).abs() < 1e-9 && (c.constants["r"] - 1.0).abs() < 1e-9);
    assert!(c.constants["c"] <= 1.0 + 1e-9 && c.constants["r"] <= 1.0 + 1e-9);
}

/// Independent check of a minimax envelope fit: every sample satisfies the
/// inequality, `r <= c`, and shrinking `c` by 0.1% forces an offset above
/// the new `c`. Steep samples can make `r(c)` jump within one ulp of `c`, so
/// `r` may sit below `c`.
fn assert_minimax(pairs: &[(f64, f64)], c: f64, r: f64) {
    for &(u, v) in pairs {
        assert!(c * v + r >= u);
    }
    let c2 = c * 0.999;
    let r2 = pairs.iter().map(|(u, v)| u - c2 * v).fold(0.0, f64::max);
    assert!(r2 > c2 || c <= 1e-12);
    assert!(r <= c * (1.0 + 1e-12), "{c} {r}");
}

#[test]
fn cv90_envelopes_match_oracle() {
    let l = expr(CV90);
    let s = set();
    // closed-form partials of L = q²|w|²² + εw², q = x² - v⁵
    let pairs: Vec<(f64, f64)> = s
        .points()
        .iter()
        .map(|p| {
            let (x, v, w) = (p.x[0], p.xd[0], p.xdd[0]);
            let q = x * x - v.powi(5);
            let w22 = w.abs().powi(22);
            let lx = 2.0 * q * 2.0 * x * w22;
            let lv = 2.0 * q * (-5.0 * v.powi(4)) * w22;
            (lx.abs() + lv.abs(), q * q * w22 + 0.01 * w * w)
        })
        .collect();
    let tm = tonelli_morrey_on(&l, &s).unwrap();
    assert_eq!(tm.verdict, Verdict::HoldsOnSamples);
    assert_minimax(&pairs, tm.constants["c"], tm.constants["r"]);
    let st = sarychev_torres_on(&l, &s, 1.0, 0.0).unwrap();
    assert_eq!(st.verdict, Verdict::HoldsOnSamples);
    let lx_only: Vec<(f64, f64)> = s
        .points()
        .iter()
        .map(|p| {
            let (x, v, w) = (p.x[0], p.xd[0], p.xdd[0]);
            let q = x * x - v.powi(5);
            ((4.0 * q * x * w.abs().powi(22)).abs(), q * q * w.abs().powi(22) + 0.01 * w * w)
        })
        .collect();
    assert_minimax(&lx_only, st.constants["gamma"], st.constants["eta"]);
}

#[test]
fn autonomy_fits() {
    let c = autonomy_on(&expr(CV90), &set()).unwrap();
    assert_eq!(c.verdict, Verdict::HoldsOnSamples);
    assert_eq!((c.constants["c"], c.constants["k"]), (0.0, 0.0));

    let mut d = dom();
    d.t = Range::new(1.0, 2.0);
    let c = check_autonomy_condition(&expr("t*pow(xdd1,2)"), &d).unwrap();
    assert_eq!(c.verdict, Verdict::HoldsOnSamples);
    assert!((c.constants["c"] - 1.0).abs() < 1e-15);
    assert!(c.constants["k"] < 1e-12);

    for t in [Range::new(0.0, 1.0), Range::new(-3.0, 5.0)] {
        let mut d = dom();
        d.t = t;
        let c = check_autonomy_condition(&expr("exp(t)*pow(xdd1,2)"), &d).unwrap();
        assert_eq!(c.verdict, Verdict::HoldsOnSamples);
        assert!((c.constants["c"] - 1.0).abs() < 1e-15);
        assert!(c.constants["k"] < 1e-9);
    }
}

#[test]
fn sarychev_torres_fits() {
    let c = sarychev_torres_on(&expr("pow(xdd1,2)"), &set(), 1.0, 0.0).unwrap();
    assert_eq!(c.verdict, Verdict::HoldsOnSamples);
    assert_eq!(c.constants["eta"], 0.0);
    let c = sarychev_torres_on(&expr("pow(xdd1,2)+pow(x1,2)"), &set(), 1.0, 0.0).unwrap();
    assert!((c.constants["gamma"] - 1.0).abs() < 1e-9 && (c.constants["eta"] - 1.0).abs() < 1e-9);
    assert!(sarychev_torres_on(&expr("pow(xdd1,2)"), &set(), 2.0, 1.0).is_err());
    assert!(sarychev_torres_on(&expr("pow(xdd1,2)"), &set(), 1.5, 0.0).is_err());
    assert!(matches!(
        sarychev_torres_on(&expr("x1"), &set(), 0.5, 0.0),
        Err(RegularityError::NegativeLagrangian { .. })
    ));
}

#[test]
fn non_finite_measurement_is_a_violation() {
    // |xd|^-1 blows up at xd = 0 where ∂L/∂x ≠ 0
    let l = expr("pow(xdd1,2)+x1");
    let c = sarychev_torres_on(&l, &set(), 0.0, -1.0).unwrap();
    assert_eq!(c.verdict, Verdict::Violated);
    assert_eq!(c.margin, f64::NEG_INFINITY);
    assert_eq!(c.witness.as_ref().unwrap().xd, vec![0.0]);
    assert_sound(&l, &c);
}

fn all_certificates(l: &LagrangianExpr, s: &SampleSet) -> Vec<Certificate> {
    let mut v = vec![
        convexity_on(l, s).unwrap(),
        tonelli_morrey_on(l, s).unwrap(),
        autonomy_on(l, s).unwrap(),
        sarychev_torres_on(l, s, 1.0, 0.0).unwrap(),
    ];
    if l.is_autonomous() {
        v.push(superlinearity_on(l, s, 1.0).unwrap());
        v.push(quadratic_coercivity_on(l, s, 1.0).unwrap());
    }
    v
}

#[test]
fn permutation_invariance() {
    let s = set();
    let mut pts = s.points().to_vec();
    pts.reverse();
    let mut pairs: Vec<_> = s.pairs().iter().map(|(a, b)| (b.clone(), a.clone())).collect();
    pairs.reverse();
    let r = SampleSet::from_points(pts, pairs, s.rng_seed());
    for src in [CV90, "pow(xdd1,2)+pow(x1,2)", "-pow(xdd1,2)", SINH] {
        let l = expr(src);
        for (a, b) in all_certificates(&l, &s).iter().zip(all_certificates(&l, &r)) {
            assert_eq!(a.verdict, b.verdict, "{src} {:?}", a.kind);
            assert_eq!(a.constants, b.constants);
            assert_eq!(a.margin.to_bits(), b.margin.to_bits());
            if a.kind != Kind::Convexity {
                assert_eq!(a.witness, b.witness);
            }
        }
    }
}

#[test]
fn thread_count_invariance() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| all_certificates(&expr(CV90), &set()))
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn nested_samples() {
    let big = set();
    let half = big.points().len() / 2;
    let small = SampleSet::from_points(big.points()[..half].to_vec(), big.pairs()[..half].to_vec(), 0);
    let l = expr("pow(xdd1,2)");
    let (cb, cs) = (
        superlinearity_on(&l, &big, 1.0).unwrap(),
        superlinearity_on(&l, &small, 1.0).unwrap(),
    );
    assert!(cb.margin <= cs.margin);
    let l = expr(SINH);
    let (cb, cs) = (
        superlinearity_on(&l, &big, 0.5).unwrap(),
        superlinearity_on(&l, &small, 0.5).unwrap(),
    );
    assert_eq!(cb.verdict, Verdict::HoldsOnSamples);
    assert_eq!(cs.verdict, Verdict::HoldsOnSamples);
    assert!(cb.constants["a"] <= cs.constants["a"]);
}
