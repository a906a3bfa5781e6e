//! Projections, the regularized inverse and the twist.

mod common;

use common::*;
use dnorm::coeff::{int, rat, Coeff, Key, EXACT};
use dnorm::diffeo::Diffeo;
use dnorm::regularize::{
    ensure_valid, i_eps, image_part, inv_on_image, kernel_part, proj_split, theta_diffeo,
    theta_field, validate_scheme, Diagonal, Scheme,
};
use dnorm::vfield::{Spectrum, VectorField};
use proptest::prelude::*;

const N: usize = 5;

fn schemes() -> Vec<Scheme> {
    vec![toy(N), saddle(N), nonresonant(N)]
}

fn field(seed: u64) -> VectorField {
    random_field(&mut rng(seed), 2, N, 1, N, 0.4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn projections_are_complementary(a in any::<u64>()) {
        let u = field(a);
        for s in schemes() {
            let (p, q) = proj_split(&u, &s);
            prop_assert_eq!(p.add(&q), u.clone());
            prop_assert_eq!(kernel_part(&p, &s), p.clone());
            prop_assert!(image_part(&p, &s).is_zero());
            prop_assert!(kernel_part(&q, &s).is_zero());
            prop_assert!(s.d().apply(&p).is_zero());
            prop_assert_eq!(s.d().apply(&inv_on_image(&q, &s).unwrap()), q);
        }
    }

    #[test]
    fn regularized_inverse_is_two_sided(a in any::<u64>()) {
        let u = field(a);
        for s in schemes() {
            let dd = s.regularized();
            let w = i_eps(&u, &s).unwrap();
            prop_assert!(dd.apply(&w).agrees_with(&u));
            prop_assert!(i_eps(&dd.apply(&u), &s).unwrap().agrees_with(&u));
            prop_assert!(w.validity() >= s.eps_order - 1);
        }
    }

    #[test]
    fn twist_is_a_flow(a in any::<u64>(), t1 in -3i64..4, t2 in -3i64..4) {
        let s = saddle(N);
        let u = field(a);
        let (c1, c2) = (Coeff::from(t1), Coeff::from(t2));
        let twice = theta_field(&theta_field(&u, &s, &c1), &s, &c2);
        let once = theta_field(&u, &s, &Coeff::from(t1 + t2));
        prop_assert!(twice.agrees_with(&once));
        prop_assert!(once.validity() >= s.eps_order);
    }

    #[test]
    fn twist_commutes_with_exp_and_d(a in any::<u64>(), t in -3i64..4) {
        let s = saddle(N);
        let u = field(a);
        let tau = Coeff::from(t);
        let lhs = theta_diffeo(&Diffeo::exp_field(&u), &s, &tau);
        let rhs = Diffeo::exp_field(&theta_field(&u, &s, &tau));
        prop_assert!(lhs.agrees_with(&rhs));
        let d = s.d();
        prop_assert!(d.apply(&theta_field(&u, &s, &tau)).agrees_with(&theta_field(&d.apply(&u), &s, &tau)));
    }
}

#[test]
fn inverse_on_resonant_term_has_simple_pole() {
    // toy: y^2 d/dy has d-eigenvalue 0 and grading eigenvalue 1
    let s = toy(N);
    let u = VectorField::term(2, N, mono(&[0, 2]), 1, Coeff::from(3)).unwrap();
    let w = i_eps(&u, &s).unwrap();
    assert_eq!(w.coeff(&mono(&[0, 2]), 1), Coeff::monomial(int(3), -1));
}

#[test]
fn inverse_on_nonresonant_term_expands_geometrically() {
    // x^2 y^2 d/dy: eigenvalues 2 and 3, so 1/(2 + 3e) = sum (-3/2)^n e^n / 2
    let s = toy(N);
    let u = VectorField::term(2, N, mono(&[2, 2]), 1, Coeff::one()).unwrap();
    let c = i_eps(&u, &s).unwrap().coeff(&mono(&[2, 2]), 1);
    for n in 0..=s.eps_order {
        assert_eq!(c.eps_coeff(n), num_traits::pow(rat(-3, 2), n as usize) * rat(1, 2));
    }
}

#[test]
fn inputs_with_poles_keep_precision() {
    let s = toy(N);
    let c = Coeff::from_terms(vec![(Key::eps(-1), int(1)), (Key::eps(0), int(2))], EXACT, None);
    let u = VectorField::term(2, N, mono(&[1, 2]), 1, c).unwrap();
    let w = i_eps(&u, &s).unwrap();
    assert!(s.regularized().apply(&w).agrees_with(&u));
}

#[test]
fn scheme_validation() {
    for s in schemes() {
        assert!(validate_scheme(&s).iter().all(|c| c.pass), "{:?}", s.lambda);
    }
    // delta equal to d itself vanishes on the kernel
    let lam = Spectrum::new(vec![int(1), int(0)]);
    let bad = Scheme::new(lam.clone(), Diagonal::Ad(lam), N);
    let failed: Vec<_> = validate_scheme(&bad).into_iter().filter(|c| !c.pass).collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0].name, "delta invertible on kernel");
    assert!(ensure_valid(&bad).is_err());
    // wrong arity
    let wrong = Scheme::new(Spectrum::new(vec![int(1), int(0)]), Diagonal::Ad(Spectrum::new(vec![int(1)])), N);
    assert!(!validate_scheme(&wrong)[0].pass);
    // a diagonal delta other than the grading
    let weighted = Scheme::new(
        Spectrum::new(vec![int(1), int(-1)]),
        Diagonal::Ad(Spectrum::new(vec![int(1), int(2)])),
        N,
    );
    let failures: Vec<_> = validate_scheme(&weighted).into_iter().filter(|c| !c.pass).map(|c| c.name).collect();
    // on the kernel x^(k+1) y^k d/dx the weight is 3k > 0
    assert!(failures.is_empty(), "{failures:?}");
}
