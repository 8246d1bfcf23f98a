use std::collections::BTreeMap;

use proptest::prelude::*;
use reynolds::expr::{self, Expansion, Expr};
use reynolds::identities::SeriesModel;
use reynolds::{Error, SeparableKernel, Series};

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-5i64..=9).prop_map(Expr::int),
        Just(Expr::X),
        Just(Expr::Lambda),
        prop::sample::select(vec!["f", "g", "h2"]).prop_map(Expr::sym),
    ]
}

fn expression() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            (inner.clone(), 0u32..4).prop_map(|(a, n)| Expr::pow(a, n)),
            inner.clone().prop_map(Expr::p),
            inner.prop_map(Expr::d),
        ]
    })
}

fn d_free() -> impl Strategy<Value = Expr> {
    prop_oneof![(-3i64..=3).prop_map(Expr::int), Just(Expr::sym("f")), Just(Expr::sym("g"))].prop_recursive(
        3,
        12,
        2,
        |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
                inner.prop_map(Expr::p),
            ]
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn print_then_parse(e in expression()) {
        let text = e.to_string();
        prop_assert_eq!(expr::parse(&text).unwrap(), e, "{}", text);
    }

    #[test]
    fn rewriting_preserves_value(e in d_free(), f in prop::collection::vec(-3i64..=3, 8), g in prop::collection::vec(-3i64..=3, 8)) {
        let order = 6;
        let model = SeriesModel::volterra(&SeparableKernel::exp(order + 1));
        let mut env = BTreeMap::new();
        env.insert("f".to_string(), Series::from_ints(&f, order + 1));
        env.insert("g".to_string(), Series::from_ints(&g, order + 1));
        let rewritten = expr::reynolds_expand(&e, order, true).unwrap().to_expr();
        let a = expr::eval(&e, &model, &env).unwrap();
        let b = expr::eval(&rewritten, &model, &env).unwrap();
        prop_assert!(a.equal_mod(&b, order).unwrap(), "{} vs {}", e, rewritten);
    }
}

#[test]
fn syntax_errors_carry_offsets() {
    assert!(matches!(expr::parse("P(f"), Err(Error::Syntax { offset: 3, .. })));
    assert!(matches!(expr::parse("f + * g"), Err(Error::Syntax { offset: 4, .. })));
    assert!(matches!(expr::parse(""), Err(Error::Syntax { offset: 0, .. })));
}

#[test]
fn unbound_symbols_are_reported() {
    let model = SeriesModel::volterra(&SeparableKernel::exp(4));
    let e = expr::parse("P(f) * g").unwrap();
    let mut env = BTreeMap::new();
    env.insert("f".to_string(), Series::one(4));
    assert!(matches!(expr::eval(&e, &model, &env), Err(Error::UnboundSymbol(s)) if s == "g"));
}

#[test]
fn reynolds_rule_on_product_of_integrals() {
    let e = expr::parse("P(f)*P(g)").unwrap();
    let got = expr::reynolds_expand(&e, 1, true).unwrap();
    let expected = Expansion::linearize(&expr::parse("P(f*P(g)) + P(g*P(f))").unwrap(), true).unwrap();
    assert_eq!(got, expected);
}
