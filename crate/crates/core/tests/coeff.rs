//! Laurent coefficients checked against evaluation at rational points.

use dnorm::cli::parse_coeff;
use dnorm::coeff::{int, rat, split_ms, Coeff, Key, Rational, EXACT};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn laurent() -> impl Strategy<Value = Coeff> {
    prop::collection::vec((-3i32..4, -6i64..=6, 1i64..=5), 0..5).prop_map(|ts| {
        let terms = ts
            .into_iter()
            .map(|(e, n, d)| (Key::eps(e), rat(n, d)))
            .collect();
        Coeff::from_terms(terms, EXACT, None)
    })
}

fn unit() -> impl Strategy<Value = Coeff> {
    laurent().prop_filter("nonzero", |c| !c.is_zero())
}

/// Value of an exact Laurent polynomial at `e = r`.
fn eval(c: &Coeff, r: &Rational) -> Rational {
    c.terms().iter().fold(Rational::zero(), |acc, (k, q)| {
        let p = if k.eps >= 0 {
            num_traits::pow(r.clone(), k.eps as usize)
        } else {
            num_traits::pow(r.recip(), (-k.eps) as usize)
        };
        acc + q * p
    })
}

fn points() -> [Rational; 3] {
    [rat(1, 2), int(3), rat(-2, 7)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn ring_axioms(a in laurent(), b in laurent(), c in laurent()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_exact_zero());
        prop_assert_eq!(&a * &Coeff::one(), a.clone());
    }

    #[test]
    fn evaluation_is_a_homomorphism(a in laurent(), b in laurent()) {
        for r in points() {
            prop_assert_eq!(eval(&(&a * &b), &r), eval(&a, &r) * eval(&b, &r));
            prop_assert_eq!(eval(&(&a - &b), &r), eval(&a, &r) - eval(&b, &r));
        }
    }

    #[test]
    fn inverse_times_self_is_one(a in unit(), k in 0i32..8) {
        let inv = a.invert(k).unwrap();
        let prod = &a * &inv;
        prop_assert!(prod.validity() >= k || a.terms().len() == 1);
        prop_assert!(prod.agrees_with(&Coeff::one()), "{} * {} = {}", a, inv, prod);
    }

    #[test]
    fn minimal_subtraction_splits(a in laurent()) {
        let (neg, pos) = split_ms(&a);
        prop_assert!(neg.terms().iter().all(|(k, _)| k.eps < 0));
        prop_assert!(pos.terms().iter().all(|(k, _)| k.eps >= 0));
        prop_assert_eq!(&neg + &pos, a);
    }

    #[test]
    fn display_parses_back(a in laurent()) {
        prop_assert_eq!(parse_coeff(&a.to_string(), None).unwrap(), a);
    }

    #[test]
    fn truncated_display_parses_back(a in laurent(), v in -1i32..4) {
        let t = a.truncate(v);
        prop_assert_eq!(parse_coeff(&t.to_string(), None).unwrap(), t);
    }

    #[test]
    fn product_validity_rule(a in unit(), b in unit(), va in -1i32..5) {
        let ta = a.truncate(va);
        prop_assume!(!ta.terms().is_empty());
        let ord = |c: &Coeff| c.min_eps().unwrap();
        let p = &ta * &b;
        prop_assert_eq!(p.validity(), va + ord(&b));
        prop_assert!(p.agrees_with(&(&a * &b)));
    }
}

#[test]
fn geometric_inverse() {
    // 1/(2 + 2e) = (1/2) sum (-e)^n
    let a = Coeff::from_terms(vec![(Key::eps(0), int(2)), (Key::eps(1), int(2))], EXACT, None);
    let inv = a.invert(5).unwrap();
    for n in 0..=5 {
        let sign = if n % 2 == 0 { 1 } else { -1 };
        assert_eq!(inv.eps_coeff(n), rat(sign, 2));
    }
    assert_eq!(inv.validity(), 5);
}

#[test]
fn pole_inverse_shifts() {
    // 1/(e^-1 + 1) = e/(1 + e)
    let a = Coeff::from_terms(vec![(Key::eps(-1), int(1)), (Key::eps(0), int(1))], EXACT, None);
    let inv = a.invert(4).unwrap();
    assert_eq!(inv.eps_coeff(0), Rational::zero());
    assert_eq!(inv.eps_coeff(1), Rational::one());
    assert_eq!(inv.eps_coeff(2), int(-1));
    assert!(inv.validity() >= 4);
}

#[test]
fn zero_has_no_inverse() {
    assert!(Coeff::zero().invert(3).is_err());
}

#[test]
fn display_format() {
    let a = Coeff::from_terms(
        vec![(Key::eps(-1), int(2)), (Key::eps(0), int(3)), (Key::eps(1), rat(-3, 2))],
        4,
        None,
    );
    assert_eq!(a.to_string(), "2*e^-1 + 3 - 3/2*e + O(e^5)");
}
