use std::sync::Arc;

use num_traits::Zero;
use proptest::prelude::*;
use reynolds::algebra::{verify_modified_leibniz, BaseAlgebra, PolyAlg, ScalarAlg};
use reynolds::tensor::{complete_shuffle_words, complete_shuffle_words_direct, shuffle_words, Word};
use reynolds::{rat, Rational, TensorSeries};

const N: usize = 5;

fn coeff() -> impl Strategy<Value = Rational> {
    (-4i64..=4, 1i64..=3).prop_map(|(n, d)| rat(n, d))
}

fn word(letters: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0..letters, 1..=3)
}

fn algebra() -> impl Strategy<Value = (Arc<dyn BaseAlgebra>, usize)> {
    prop_oneof![
        (1i64..=3, 1i64..=3).prop_map(|(n, d)| {
            (Arc::new(ScalarAlg::from_mu(rat(n, d)).unwrap()) as Arc<dyn BaseAlgebra>, 1)
        }),
        Just((Arc::new(PolyAlg::default()) as Arc<dyn BaseAlgebra>, 3)),
    ]
}

fn tensor(alg: Arc<dyn BaseAlgebra>, letters: usize) -> impl Strategy<Value = TensorSeries> {
    prop::collection::vec((word(letters), coeff()), 0..4)
        .prop_map(move |terms| TensorSeries::from_terms(alg.clone(), N, terms))
}

fn triple() -> impl Strategy<Value = (TensorSeries, TensorSeries, TensorSeries)> {
    algebra().prop_flat_map(|(alg, l)| {
        (tensor(alg.clone(), l), tensor(alg.clone(), l), tensor(alg, l))
    })
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn diamond_is_commutative_and_associative((x, y, z) in triple()) {
        prop_assert_eq!(x.diamond(&y).unwrap(), y.diamond(&x).unwrap());
        let l = x.diamond(&y).unwrap().diamond(&z).unwrap();
        let r = x.diamond(&y.diamond(&z).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn diamond_distributes((x, y, z) in triple()) {
        let l = x.diamond(&y.add(&z).unwrap()).unwrap();
        let r = x.diamond(&y).unwrap().add(&x.diamond(&z).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn unit_is_neutral((x, _, _) in triple()) {
        let one = TensorSeries::unit(x.algebra().clone(), N);
        prop_assert_eq!(one.diamond(&x).unwrap(), x);
    }

    #[test]
    fn derivation_inverts_integration((x, _, _) in triple()) {
        prop_assert_eq!(x.reynolds_p().deriv_d().unwrap(), x);
    }

    #[test]
    fn q_lambda_round_trip((x, _, _) in triple()) {
        prop_assert_eq!(x.q_lambda().unwrap().q_lambda_inv().unwrap(), x.clone());
        prop_assert_eq!(x.q_lambda_inv().unwrap().q_lambda().unwrap(), x);
    }

    #[test]
    fn recursion_matches_enumeration(a in word(3), b in word(3), lam in coeff()) {
        let lambda = reynolds::algebra::AlgebraElement::term(0, lam);
        prop_assert_eq!(
            complete_shuffle_words(&a, &b, &lambda, 7),
            complete_shuffle_words_direct(&a, &b, &lambda, 7).0
        );
    }

    #[test]
    fn classic_shuffle_counts(a in word(1), b in word(1)) {
        let s = shuffle_words(&a, &b, 10);
        let total: Rational = s.values().cloned().sum();
        prop_assert_eq!(total, Rational::from_integer(binomial(a.len() + b.len(), a.len()).into()));
    }
}

#[test]
fn zero_weight_reduces_to_shuffle() {
    let zero = reynolds::algebra::AlgebraElement::zero();
    for (a, b) in [(vec![0, 1], vec![2]), (vec![1, 1], vec![0, 2])] {
        assert_eq!(complete_shuffle_words(&a, &b, &zero, 8), shuffle_words(&a, &b, 8));
    }
}

#[test]
fn base_algebras_satisfy_modified_leibniz() {
    assert!(verify_modified_leibniz(&ScalarAlg::from_mu(rat(2, 3)).unwrap(), 1).unwrap());
    assert!(verify_modified_leibniz(&PolyAlg::default(), 10).unwrap());
}

#[test]
fn json_round_trip() {
    let alg: Arc<dyn BaseAlgebra> = Arc::new(PolyAlg::default());
    let t = TensorSeries::from_terms(alg.clone(), 4, [(vec![1, 0], rat(-3, 2)), (vec![2], rat(1, 1))]);
    assert_eq!(TensorSeries::from_json(&t.to_json(), alg).unwrap(), t);
    let other: Arc<dyn BaseAlgebra> = Arc::new(ScalarAlg::with_lambda(Rational::zero()));
    assert!(TensorSeries::from_json(&t.to_json(), other).is_err());
}
