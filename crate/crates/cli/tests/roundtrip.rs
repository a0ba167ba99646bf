use proptest::prelude::*;
use pshdef_cli::lower::parse_wpoly;

fn leaf() -> impl Strategy<Value = String> {
    prop_oneof![
        (-9i64..=9).prop_map(|n| n.to_string()),
        (1i64..=9, 2i64..=7).prop_map(|(p, q)| format!("({p}/{q})")),
        Just("i".to_string()),
        Just("z".to_string()),
        Just("zbar".to_string()),
        Just("w".to_string()),
        Just("wbar".to_string()),
    ]
}

fn expr() -> impl Strategy<Value = String> {
    leaf().prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} + {b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) * ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) ({b})")),
            (inner.clone(), 0u32..=3).prop_map(|(a, k)| format!("({a})^{k}")),
            inner.clone().prop_map(|a| format!("-({a})")),
            inner.clone().prop_map(|a| format!("Re({a})")),
            inner.clone().prop_map(|a| format!("Im({a})")),
            inner.clone().prop_map(|a| format!("conj({a})")),
            inner.clone().prop_map(|a| format!("abs2({a})")),
            (inner, 1i64..=5).prop_map(|(a, d)| format!("({a}) / {d}")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn canonical_text_round_trips(src in expr()) {
        let p = parse_wpoly(&src).unwrap();
        let text = p.to_string();
        let q = parse_wpoly(&text).unwrap();
        prop_assert_eq!(&q, &p, "{} -> {}", src, text);
        prop_assert_eq!(q.to_string(), text);
    }
}
