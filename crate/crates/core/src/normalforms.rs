//! Normal forms, linearization, renormalized normal forms and corrections.
//!
//! Every algorithm here runs the same graded recursion: at grade `n` the
//! unknown `alpha_n` enters the logarithmic derivative only through
//! `D(alpha_n)`, while all bracket corrections are Lie polynomials in lower
//! grades. Those corrections are computed by re-running the truncated Magnus
//! and conjugation series on `alpha_{<n}` at order `n`.

use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::birkhoff::{beta_and_residue, birkhoff_decompose, BirkhoffPair, Counterterm};
use crate::coeff::{eval_eps_zero, split_ms, Coeff, EXACT};
use crate::diffeo::{conjugate_by_log, log_d_magnus, magnus_left, magnus_right, Diffeo};
use crate::error::{Error, Result};
use crate::regularize::{
    ensure_valid, i_eps, image_part, inv_on_image, kernel_part, proj_split, Derivation, Diagonal,
    Scheme,
};
use crate::series::{Monomial, PowerCache, Series};
use crate::vfield::VectorField;

/// Hook returning a kernel element of the given grade, added to `alpha_n`.
pub type KernelChoice<'a> = &'a mut dyn FnMut(usize) -> VectorField;

fn no_choice(nu: usize, order: usize) -> impl FnMut(usize) -> VectorField {
    move |_| VectorField::zero(nu, order)
}

/// Which algorithm produced a certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Direct,
    EcalleVallet,
    Renormalized,
    Correction,
    Linearization,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::Direct => "direct",
            Kind::EcalleVallet => "ecalle_vallet",
            Kind::Renormalized => "renormalized",
            Kind::Correction => "correction",
            Kind::Linearization => "linearization",
        };
        f.write_str(s)
    }
}

/// Claim that `phi` d-conjugates `u` to `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugacyCertificate {
    pub u: VectorField,
    pub v: VectorField,
    pub phi: Diffeo,
    pub scheme: Scheme,
    pub kind: Kind,
}

/// Grade-`n` part of `sum (-1)^s/(s+1)! ad^s(D alpha)` for `alpha` of grades `< n`.
fn magnus_grade(alpha: &VectorField, d: &Derivation, n: usize) -> VectorField {
    let low = alpha.below_grade(n).with_order(n);
    magnus_left(&low, d).grade_part(n).with_order(alpha.order())
}

fn magnus_right_grade(alpha: &VectorField, d: &Derivation, n: usize) -> VectorField {
    let low = alpha.below_grade(n).with_order(n);
    magnus_right(&low, d).grade_part(n).with_order(alpha.order())
}

/// Grade-`n` part of `e^-alpha v e^alpha` with `alpha`, `v` of grades `< n`.
fn conj_grade(alpha: &VectorField, v: &VectorField, n: usize) -> VectorField {
    let a = alpha.below_grade(n).with_order(n);
    let w = v.below_grade(n).with_order(n);
    conjugate_by_log(&a, &w).grade_part(n).with_order(alpha.order())
}

fn check_scheme_fit(u: &VectorField, s: &Scheme) -> Result<()> {
    if u.nu() != s.nu() || u.order() != s.order {
        return Err(Error::DimensionMismatch(format!(
            "field has (nu, order) = ({}, {}), scheme expects ({}, {})",
            u.nu(),
            u.order(),
            s.nu(),
            s.order
        )));
    }
    Ok(())
}

fn cap(v: &VectorField, k: i32) -> VectorField {
    v.map_terms(|_, c| cap_coeff(c, k))
}

fn ensure_eps_free(u: &VectorField) -> Result<()> {
    if u.terms().values().all(|c| c.is_eps_free()) {
        Ok(())
    } else {
        Err(Error::NotEpsFree)
    }
}

/// Solves `log_D(exp alpha) = u` grade by grade.
///
/// With a plain `d`, kernel components of the right-hand side are collected
/// and reported as a resonance after the sweep.
fn solve_log(u: &VectorField, d: &Derivation, eps_cap: Option<i32>) -> Result<VectorField> {
    let mut alpha = VectorField::zero(u.nu(), u.order());
    let mut resonant = Vec::new();
    for n in 1..=u.order() {
        let rhs = u.grade_part(n).sub(&magnus_grade(&alpha, d, n));
        let an = match d.invert(&rhs) {
            Ok(a) => a,
            Err(Error::KernelComponent(terms)) => {
                resonant.extend(terms);
                let safe = rhs.filter(|k, _| {
                    let (a, b) = d.eigen(&k.mono, k.dir);
                    !(a.is_zero() && b.is_zero())
                });
                d.invert(&safe)?
            }
            Err(e) => return Err(e),
        };
        let an = match eps_cap {
            Some(k) => cap(&an, k),
            None => an,
        };
        alpha = alpha.add(&an);
    }
    if resonant.is_empty() {
        Ok(alpha)
    } else {
        Err(Error::Resonance(resonant))
    }
}

/// `phi` with `log_d(phi) = u`, or with `log_{d + e delta}(phi) = u` when regularized.
pub fn exp_d_solve(u: &VectorField, s: &Scheme, regularized: bool) -> Result<Diffeo> {
    Ok(Diffeo::exp_field(&exp_d_solve_log(u, s, regularized)?))
}

/// Exp-coordinate `alpha` of [`exp_d_solve`].
pub fn exp_d_solve_log(u: &VectorField, s: &Scheme, regularized: bool) -> Result<VectorField> {
    check_scheme_fit(u, s)?;
    if regularized {
        solve_log(u, &s.regularized(), Some(s.eps_order))
    } else {
        solve_log(u, &s.d(), None)
    }
}

/// Linearizing conjugator: `log_d(phi) = u`, normal form `0`.
pub fn linearize(u: &VectorField, s: &Scheme) -> Result<ConjugacyCertificate> {
    let phi = exp_d_solve(u, s, false)?;
    Ok(ConjugacyCertificate {
        u: u.clone(),
        v: VectorField::zero(u.nu(), u.order()),
        phi,
        scheme: s.clone(),
        kind: Kind::Linearization,
    })
}

/// Normal form `v in ker d` with kernel components of `alpha` set to zero.
pub fn normal_form_direct(u: &VectorField, s: &Scheme) -> Result<ConjugacyCertificate> {
    let mut zero = no_choice(u.nu(), u.order());
    normal_form_direct_with(u, s, &mut zero)
}

/// [`normal_form_direct`] with caller-chosen kernel components of `alpha`.
pub fn normal_form_direct_with(
    u: &VectorField,
    s: &Scheme,
    choice: KernelChoice<'_>,
) -> Result<ConjugacyCertificate> {
    check_scheme_fit(u, s)?;
    let d = s.d();
    let mut alpha = VectorField::zero(u.nu(), u.order());
    let mut v = VectorField::zero(u.nu(), u.order());
    for n in 1..=u.order() {
        let rhs = u
            .grade_part(n)
            .sub(&magnus_grade(&alpha, &d, n))
            .sub(&conj_grade(&alpha, &v, n));
        let (p, q) = proj_split(&rhs, s);
        v = v.add(&p);
        let kern = kernel_part(&choice(n).grade_part(n), s);
        alpha = alpha.add(&inv_on_image(&q, s)?).add(&kern);
    }
    Ok(ConjugacyCertificate {
        u: u.clone(),
        v,
        phi: Diffeo::exp_field(&alpha),
        scheme: s.clone(),
        kind: Kind::Direct,
    })
}

/// Unique normal form fixed by `p((delta phi) phi^-1) = 0`.
pub fn normal_form_ecalle_vallet(u: &VectorField, s: &Scheme) -> Result<ConjugacyCertificate> {
    check_scheme_fit(u, s)?;
    ensure_valid(s)?;
    let d = s.d();
    let delta = s.delta_derivation();
    let mut alpha = VectorField::zero(u.nu(), u.order());
    let mut v = VectorField::zero(u.nu(), u.order());
    for n in 1..=u.order() {
        let rhs = u
            .grade_part(n)
            .sub(&magnus_grade(&alpha, &d, n))
            .sub(&conj_grade(&alpha, &v, n));
        let (p, q) = proj_split(&rhs, s);
        v = v.add(&p);
        // p(delta(alpha_n) + R_{n-1}) = 0 fixes the kernel part of alpha_n
        let r = kernel_part(&magnus_right_grade(&alpha, &delta, n), s);
        let kern = delta.invert(&r.neg())?;
        alpha = alpha.add(&inv_on_image(&q, s)?).add(&kern);
    }
    Ok(ConjugacyCertificate {
        u: u.clone(),
        v,
        phi: Diffeo::exp_field(&alpha),
        scheme: s.clone(),
        kind: Kind::EcalleVallet,
    })
}

/// Output of the renormalization pipeline.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Renormalized {
    pub certificate: ConjugacyCertificate,
    /// Regularized solution `phi_e` with `log_{d + e delta}(phi_e) = u`.
    pub regularized: Diffeo,
    pub pair: BirkhoffPair,
    pub counterterm: Counterterm,
}

/// Normal form `beta` and conjugator `phi_ren = plus|_{e=0}` by minimal subtraction.
pub fn renormalized_normal_form(u: &VectorField, s: &Scheme) -> Result<Renormalized> {
    check_scheme_fit(u, s)?;
    ensure_eps_free(u)?;
    ensure_valid(s)?;
    let regularized = exp_d_solve(u, s, true)?;
    let pair = birkhoff_decompose(&regularized)?;
    let counterterm = beta_and_residue(&pair, s)?;
    let mut comps = Vec::with_capacity(u.nu());
    for c in pair.plus.components() {
        let mut out = Series::zero(c.nu(), c.max_deg());
        for (m, a) in c.terms() {
            out.add_term(*m, eval_eps_zero(a)?);
        }
        comps.push(out);
    }
    let phi = Diffeo::from_components(comps, u.order())?;
    let certificate = ConjugacyCertificate {
        u: u.clone(),
        v: counterterm.beta.clone(),
        phi,
        scheme: s.clone(),
        kind: Kind::Renormalized,
    };
    let report = check_conjugacy(&certificate);
    if !report.pass {
        return Err(Error::Invariant(format!(
            "renormalized conjugator fails: {}",
            report.violations.join("; ")
        )));
    }
    Ok(Renormalized {
        certificate,
        regularized,
        pair,
        counterterm,
    })
}

/// Result of [`correction`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correction {
    pub u_c: VectorField,
    pub phi: Diffeo,
    pub scheme: Scheme,
}

impl Correction {
    /// `phi` conjugates `u - u_c` to zero.
    pub fn certificate(&self, u: &VectorField) -> ConjugacyCertificate {
        ConjugacyCertificate {
            u: u.sub(&self.u_c),
            v: VectorField::zero(u.nu(), u.order()),
            phi: self.phi.clone(),
            scheme: self.scheme.clone(),
            kind: Kind::Correction,
        }
    }
}

/// The unique `u_c in ker d` with `u - u_c` d-conjugate to zero.
pub fn correction(u: &VectorField, s: &Scheme) -> Result<Correction> {
    let mut zero = no_choice(u.nu(), u.order());
    correction_with(u, s, &mut zero)
}

/// [`correction`] with caller-chosen kernel components of `alpha`.
pub fn correction_with(u: &VectorField, s: &Scheme, choice: KernelChoice<'_>) -> Result<Correction> {
    check_scheme_fit(u, s)?;
    let d = s.d();
    let mut alpha = VectorField::zero(u.nu(), u.order());
    let mut u_c = VectorField::zero(u.nu(), u.order());
    for n in 1..=u.order() {
        let rhs = u.grade_part(n).sub(&magnus_grade(&alpha, &d, n));
        let (p, q) = proj_split(&rhs, s);
        u_c = u_c.add(&p);
        let kern = kernel_part(&choice(n).grade_part(n), s);
        alpha = alpha.add(&inv_on_image(&q, s)?).add(&kern);
    }
    Ok(Correction {
        u_c,
        phi: Diffeo::exp_field(&alpha),
        scheme: s.clone(),
    })
}

/// Correction recovered from the additive splitting of `log_{d + e delta}`.
pub fn correction_additive(u: &VectorField, s: &Scheme) -> Result<VectorField> {
    check_scheme_fit(u, s)?;
    ensure_eps_free(u)?;
    ensure_valid(s)?;
    let dd = s.regularized();
    let alpha = exp_d_solve_log(u, s, true)?;
    let mut plus = VectorField::zero(u.nu(), u.order());
    let mut minus = VectorField::zero(u.nu(), u.order());
    for n in 1..=u.order() {
        let defect = magnus_grade(&alpha, &dd, n)
            .sub(&magnus_grade(&plus, &dd, n))
            .sub(&magnus_grade(&minus, &dd, n));
        let total = alpha.grade_part(n).add(&i_eps(&defect, s)?);
        for (k, c) in total.terms() {
            if c.validity() < -1 {
                return Err(Error::ValidityExhausted {
                    validity: c.validity(),
                });
            }
            let (neg, pos) = split_ms(c);
            minus.add_term(k.mono, k.dir, neg)?;
            plus.add_term(k.mono, k.dir, cap_coeff(&pos, s.eps_order))?;
        }
    }
    let gamma = magnus_left(&minus, &dd);
    if gamma.validity() < 0 {
        return Err(Error::ValidityExhausted {
            validity: gamma.validity(),
        });
    }
    ensure_eps_free(&gamma)?;
    let gamma = gamma.map_terms(|_, c| Coeff::from_terms(c.terms().to_vec(), EXACT, c.aux().cloned()));
    let leaked = image_part(&gamma, s);
    if !leaked.is_zero() {
        return Err(Error::Invariant(format!("additive correction has image part {}", leaked)));
    }
    Ok(gamma)
}

fn cap_coeff(c: &Coeff, k: i32) -> Coeff {
    if c.terms().iter().any(|t| t.0.eps > k) {
        c.truncate(k)
    } else {
        c.clone()
    }
}

/// Dynkin operator `log_Y`.
pub fn dynkin_log(phi: &Diffeo) -> VectorField {
    log_d_magnus(phi, &Derivation::plain(Diagonal::Grading))
}

/// Inverse of [`dynkin_log`].
pub fn dynkin_exp(u: &VectorField) -> Diffeo {
    let alpha = solve_log(u, &Derivation::plain(Diagonal::Grading), None)
        .expect("the grading is invertible on positive grades");
    Diffeo::exp_field(&alpha)
}

/// `L1 = I(delta x)`, `L_{k+1} = I([L_k, x])` for a grade-one `x`.
pub fn lseries(x: &VectorField, s: &Scheme, n_max: usize) -> Result<Vec<VectorField>> {
    check_scheme_fit(x, s)?;
    if x.terms().keys().any(|k| k.grade() != 1) {
        return Err(Error::Invariant("x must be homogeneous of grade 1".to_string()));
    }
    let resolve = |w: &VectorField| -> Result<VectorField> {
        inv_on_image(w, s).map_err(|e| match e {
            Error::KernelComponent(t) => Error::Resonance(t),
            e => e,
        })
    };
    let mut out = Vec::with_capacity(n_max);
    let mut cur = resolve(&s.delta_derivation().apply(x))?;
    for _ in 0..n_max {
        let next = resolve(&cur.lie(x))?;
        out.push(cur);
        cur = next;
    }
    Ok(out)
}

/// Outcome of [`check_conjugacy`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugacyReport {
    pub pass: bool,
    pub lie_level: bool,
    pub operator_level: bool,
    pub normal_form_in_kernel: bool,
    pub violations: Vec<String>,
}

/// Verifies `log_d(phi) + phi^-1 v phi = u` and `(X0 + v) F = F (X0 + u)` on
/// every monomial of degree `1..=N+1`.
pub fn check_conjugacy(cert: &ConjugacyCertificate) -> ConjugacyReport {
    let s = &cert.scheme;
    let names = crate::series::default_names(cert.u.nu());
    let mut violations = Vec::new();

    let lie = log_d_magnus(&cert.phi, &s.d()).add(&conjugate_by_log(&cert.phi.log(), &cert.v));
    let lie_level = match lie.first_disagreement(&cert.u) {
        None => true,
        Some(k) => {
            violations.push(format!(
                "Lie identity fails at {}: got {}, expected {}",
                crate::vfield::render_basis(&k.mono, k.dir, &names),
                lie.coeff(&k.mono, k.dir),
                cert.u.coeff(&k.mono, k.dir)
            ));
            false
        }
    };

    let nu = cert.u.nu();
    let top = cert.u.order() + 1;
    let comps = cert.phi.components().to_vec();
    let mut cache = PowerCache::new(&comps, top);
    let mut operator_level = true;
    for m in Monomial::enumerate(nu, 1, top) {
        let a = Series::monomial(nu, top, m, Coeff::one());
        let fa = a.substitute_cached(&mut cache);
        let lhs = s.lambda.apply_linear(&fa).add(&cert.v.apply(&fa));
        let inner = s.lambda.apply_linear(&a).add(&cert.u.apply(&a));
        let rhs = inner.substitute_cached(&mut cache);
        if let Some(bad) = lhs.first_disagreement(&rhs) {
            violations.push(format!(
                "operator identity fails on {} at {}",
                m.render(&names),
                bad.render(&names)
            ));
            operator_level = false;
            break;
        }
    }

    let normal_form_in_kernel = image_part(&cert.v, s).is_zero();
    if !normal_form_in_kernel {
        violations.push(format!("normal form leaves ker d: {}", image_part(&cert.v, s)));
    }
    ConjugacyReport {
        pass: lie_level && operator_level && normal_form_in_kernel,
        lie_level,
        operator_level,
        normal_form_in_kernel,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{int, rat, Key};
    use crate::vfield::Spectrum;

    fn mono(e: &[u32]) -> Monomial {
        Monomial::new(e).unwrap()
    }

    fn toy(n: usize) -> Scheme {
        Scheme::new(Spectrum::new(vec![int(1), int(0)]), Diagonal::Grading, n)
    }

    fn toy_field(n: usize, a: &[i64]) -> VectorField {
        let mut u = VectorField::zero(2, n);
        for (k, c) in a.iter().enumerate() {
            u.add_term(mono(&[k as u32, 2]), 1, Coeff::from(*c)).unwrap();
        }
        u
    }

    #[test]
    fn one_variable_second_step_vanishes() {
        let s = Scheme::new(Spectrum::new(vec![int(1)]), Diagonal::Grading, 4);
        let u = VectorField::term(1, 4, mono(&[2]), 0, Coeff::one()).unwrap();
        // eigenvalue of y^2 d/dy under lambda = 1 is 1
        let alpha = exp_d_solve_log(&u, &s, false).unwrap();
        assert_eq!(alpha, u);
    }

    #[test]
    fn toy_regularized_closed_form() {
        let n = 5;
        let s = toy(n);
        let a = [2, 3, 5, -1];
        let alpha = exp_d_solve_log(&toy_field(n, &a), &s, true).unwrap();
        for (k, ak) in a.iter().enumerate() {
            let c = alpha.coeff(&mono(&[k as u32, 2]), 1);
            let den = Coeff::from_terms(
                vec![(Key::eps(0), int(k as i64)), (Key::eps(1), int(k as i64 + 1))],
                EXACT,
                None,
            );
            assert!((&c * &den).agrees_with(&Coeff::from(*ak)));
        }
    }

    #[test]
    fn toy_normal_forms() {
        let n = 6;
        let s = toy(n);
        let u = toy_field(n, &[2, 3, 5]);
        let expected = toy_field(n, &[2]);
        let direct = normal_form_direct(&u, &s).unwrap();
        assert_eq!(direct.v, expected);
        assert!(check_conjugacy(&direct).pass);
        let ev = normal_form_ecalle_vallet(&u, &s).unwrap();
        assert_eq!(ev.v, expected);
        assert!(check_conjugacy(&ev).pass);
        let ren = renormalized_normal_form(&u, &s).unwrap();
        assert_eq!(ren.certificate.v, expected);
        let mut phi_log = VectorField::zero(2, n);
        phi_log.add_term(mono(&[1, 2]), 1, Coeff::from(3)).unwrap();
        phi_log
            .add_term(mono(&[2, 2]), 1, Coeff::constant(rat(5, 2)))
            .unwrap();
        assert_eq!(ren.certificate.phi, Diffeo::exp_field(&phi_log));
        assert_eq!(correction(&u, &s).unwrap().u_c, expected);
        assert_eq!(correction_additive(&u, &s).unwrap(), expected);
    }

    #[test]
    fn toy_linearization_is_resonant() {
        let s = toy(4);
        match linearize(&toy_field(4, &[2, 3]), &s) {
            Err(Error::Resonance(t)) => assert_eq!(t, vec![(mono(&[0, 2]), 1)]),
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn corrupted_certificate_is_caught() {
        let s = toy(4);
        let mut cert = normal_form_direct(&toy_field(4, &[2, 3]), &s).unwrap();
        cert.v = toy_field(4, &[7]);
        let r = check_conjugacy(&cert);
        assert!(!r.pass && !r.violations.is_empty());
    }

    #[test]
    fn lseries_one_variable() {
        let s = Scheme::new(Spectrum::new(vec![int(1)]), Diagonal::Grading, 4);
        let x = VectorField::term(1, 4, mono(&[2]), 0, Coeff::one()).unwrap();
        let l = lseries(&x, &s, 2).unwrap();
        assert_eq!(l[0], x);
        assert!(l[1].is_zero());
    }

    #[test]
    fn dynkin_single_grade() {
        let u = VectorField::term(1, 5, mono(&[2]), 0, Coeff::one()).unwrap();
        assert_eq!(dynkin_log(&Diffeo::exp_field(&u)), u);
        assert!(dynkin_log(&Diffeo::identity(2, 3)).is_zero());
        assert_eq!(dynkin_log(&dynkin_exp(&u)), u);
    }
}
