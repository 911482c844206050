use proptest::prelude::*;
use varcheck_core::{EvalPoint, LagrangianExpr};

/// Random expressions over t, x1..2, xd1..2, xdd1..2 that are defined and
/// smooth on [-1, 1]^7.
fn expr_text() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("t".to_string()),
        (1..=2usize).prop_map(|i| format!("x{i}")),
        (1..=2usize).prop_map(|i| format!("xd{i}")),
        (1..=2usize).prop_map(|i| format!("xdd{i}")),
        (-3.0..3.0f64).prop_map(|c| format!("({c:.3})")),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}+{b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}-{b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}*{b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}/(2+sin({b}))")),
            inner.clone().prop_map(|a| format!("(-{a})")),
            inner.clone().prop_map(|a| format!("pow({a},2)")),
            inner.clone().prop_map(|a| format!("pow({a},3)")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("exp(sin({a}))")),
            inner.clone().prop_map(|a| format!("sqrt(1+pow({a},2))")),
            inner.clone().prop_map(|a| format!("log(2+cos({a}))")),
            inner.prop_map(|a| format!("pow(1+pow({a},2),1.5)")),
        ]
    })
}

fn point() -> impl Strategy<Value = EvalPoint> {
    proptest::collection::vec(-1.0..1.0f64, 7)
        .prop_map(|v| EvalPoint::new(v[0], vec![v[1], v[2]], vec![v[3], v[4]], vec![v[5], v[6]]))
}

fn coords(p: &EvalPoint) -> Vec<f64> {
    let mut v = vec![p.t];
    v.extend(&p.x);
    v.extend(&p.xd);
    v.extend(&p.xdd);
    v
}

fn from_coords(v: &[f64]) -> EvalPoint {
    EvalPoint::new(v[0], v[1..3].to_vec(), v[3..5].to_vec(), v[5..7].to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn partials_match_central_differences(text in expr_text(), p in point()) {
        let l = LagrangianExpr::parse(&text, 2).unwrap();
        let d = l.partials(&p).unwrap();
        let mut analytic = vec![d.t];
        analytic.extend(&d.x);
        analytic.extend(&d.xd);
        analytic.extend(&d.xdd);
        let base = coords(&p);
        for (k, an) in analytic.iter().enumerate() {
            let h = 1e-6 * (1.0 + base[k].abs());
            let mut hi = base.clone();
            let mut lo = base.clone();
            hi[k] += h;
            lo[k] -= h;
            let fd = (l.eval(&from_coords(&hi)).unwrap() - l.eval(&from_coords(&lo)).unwrap()) / (2.0 * h);
            let scale = an.abs().max(1.0).max(1e-3 * d.value.abs());
            prop_assert!((fd - an).abs() <= 1e-6 * scale, "{text} d{k}: fd {fd} vs {an}");
        }
    }

    #[test]
    fn evaluation_is_pure_and_round_trips(text in expr_text(), p in point()) {
        let l = LagrangianExpr::parse(&text, 2).unwrap();
        let v1 = l.eval(&p).unwrap();
        let v2 = l.eval(&p).unwrap();
        prop_assert_eq!(v1.to_bits(), v2.to_bits());
        prop_assert_eq!(l.partials(&p).unwrap().value.to_bits(), v1.to_bits());
        let again = LagrangianExpr::parse(&l.canonical(), 2).unwrap();
        prop_assert_eq!(again.root(), l.root());
        prop_assert_eq!(again.eval(&p).unwrap().to_bits(), v1.to_bits());
    }

    #[test]
    fn autonomous_means_zero_time_partial(text in expr_text(), p in point()) {
        let l = LagrangianExpr::parse(&text, 2).unwrap();
        let mentions_t = text
            .split(|c: char| !c.is_ascii_alphanumeric())
            .any(|tok| tok == "t");
        prop_assert_eq!(l.is_autonomous(), !mentions_t);
        if l.is_autonomous() {
            prop_assert_eq!(l.partials(&p).unwrap().t, 0.0);
        }
    }
}
