use proptest::prelude::*;
use ramond_core::expr::*;
use ramond_core::series::{int, rat};

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0i64..500).prop_map(|n| Expr::Number(int(n))),
        (1i64..50, 2i64..9).prop_map(|(n, d)| Expr::Number(rat(n, d))),
        prop::sample::select(vec!["E2", "E4", "E6", "E8", "Delta"]).prop_map(|s| Expr::Name(s.to_string())),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), 1u32..5).prop_map(|(a, n)| Expr::Pow(Box::new(a), n)),
            inner.clone().prop_map(|a| Expr::Call("D".into(), vec![a])),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::Call("CK".into(), vec![a, b])),
            (1u32..30).prop_map(|m| Expr::Call("etaInvPow".into(), vec![Expr::Number(int(m as i64))])),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_parse_print(e in expr()) {
        let printed = e.to_string();
        let parsed = parse_expression(&printed).unwrap();
        prop_assert_eq!(parsed.to_string(), printed.clone());
        let reparsed = parse_expression(&parsed.to_string()).unwrap();
        prop_assert_eq!(reparsed, parsed);
    }
}

#[test]
fn normalized_weight_twelve_form() {
    let e = parse_expression("(E4^3 - 728*Delta) * etaInvPow(8)").unwrap();
    let v = evaluate(&e, &EvalConfig { q_order: 2, z_order: 0 }).unwrap();
    let s = v.expansion(2).unwrap();
    assert_eq!(s.coeffs(), &[int(1), int(0), int(196732)]);
}

#[test]
fn stray_operator_is_reported_at_its_offset() {
    let err = parse_expression("E4 + * Delta").unwrap_err();
    assert_eq!(err.offset, 5);
}

#[test]
fn nested_derivative_parses() {
    let e = parse_expression("D(D(E4))").unwrap();
    assert_eq!(e, Expr::Call("D".into(), vec![Expr::Call("D".into(), vec![Expr::Name("E4".into())])]));
}

#[test]
fn mixed_weight_sum_rejected_by_lift() {
    let e = parse_expression("CK(E4 + E6)").unwrap();
    assert!(evaluate(&e, &EvalConfig { q_order: 4, z_order: 4 }).is_err());
}
