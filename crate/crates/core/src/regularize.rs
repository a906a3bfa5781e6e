//! The derivation pair `(d, delta)`: kernel/image splitting of `d = ad_X0`,
//! the partial inverse `I`, the regularized inverse `I_e` of `d + e*delta`,
//! scheme validation and the twist `theta_tau = exp(tau e delta)`.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::coeff::{coeff_invert, AuxSpec, Coeff, Key, Rational};
use crate::diffeo::Diffeo;
use crate::error::{Error, Result};
use crate::series::Monomial;
use crate::vfield::{ad_eigenvalue, FieldKey, Spectrum, VectorField};

/// A derivation acting diagonally on the basis `x^n d/dx_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagonal {
    /// The grading `Y`, eigenvalue `|n| - 1`.
    Grading,
    /// `ad` of a diagonal linear field with spectrum `mu`, eigenvalue `<mu, n> - mu_j`.
    Ad(Spectrum),
}

impl Diagonal {
    pub fn eigenvalue(&self, n: &Monomial, j: usize) -> Rational {
        match self {
            Diagonal::Grading => Rational::from_integer((n.degree() as i64 - 1).into()),
            Diagonal::Ad(mu) => ad_eigenvalue(mu, n, j),
        }
    }
}

/// `main + e * reg` with coefficients inverted up to `eps_order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub main: Diagonal,
    pub reg: Option<Diagonal>,
    pub eps_order: i32,
}

impl Derivation {
    pub fn plain(main: Diagonal) -> Self {
        Derivation {
            main,
            reg: None,
            eps_order: 0,
        }
    }

    pub fn regularized(main: Diagonal, reg: Diagonal, eps_order: i32) -> Self {
        Derivation {
            main,
            reg: Some(reg),
            eps_order,
        }
    }

    /// Eigenvalue `a + b e` on `x^n d/dx_j`.
    pub fn eigen(&self, n: &Monomial, j: usize) -> (Rational, Rational) {
        let a = self.main.eigenvalue(n, j);
        let b = self
            .reg
            .as_ref()
            .map(|r| r.eigenvalue(n, j))
            .unwrap_or_else(Rational::zero);
        (a, b)
    }

    fn eigen_coeff(a: &Rational, b: &Rational) -> Coeff {
        Coeff::from_terms(
            vec![(Key::eps(0), a.clone()), (Key::eps(1), b.clone())],
            crate::coeff::EXACT,
            None,
        )
    }

    pub fn apply(&self, u: &VectorField) -> VectorField {
        u.map_terms(|k, c| {
            let (a, b) = self.eigen(&k.mono, k.dir);
            if b.is_zero() {
                c.scale(&a)
            } else {
                c * &Self::eigen_coeff(&a, &b)
            }
        })
    }

    /// Termwise inverse; terms with vanishing eigenvalue are reported.
    pub fn invert(&self, u: &VectorField) -> Result<VectorField> {
        let mut kernel = Vec::new();
        let out = u.try_map_terms(|k, c| {
            let (a, b) = self.eigen(&k.mono, k.dir);
            if b.is_zero() {
                if a.is_zero() {
                    if !c.is_zero() {
                        kernel.push((k.mono, k.dir));
                    }
                    return Ok(Coeff::zero());
                }
                return Ok(c.scale(&a.recip()));
            }
            if a.is_zero() {
                return Ok(c.shift_eps(-1).scale(&b.recip()));
            }
            let ord = c.min_eps().unwrap_or(0);
            let inv = coeff_invert(&Self::eigen_coeff(&a, &b), self.eps_order - ord)?;
            Ok(c * &inv)
        })?;
        if kernel.is_empty() {
            Ok(out)
        } else {
            Err(Error::KernelComponent(kernel))
        }
    }
}

/// Regularization scheme: spectrum, regularizing derivation and truncation orders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scheme {
    pub lambda: Spectrum,
    pub delta: Diagonal,
    /// Grade order `N`.
    pub order: usize,
    /// Validity target `K` for `e`-expansions.
    pub eps_order: i32,
    /// Truncation `T` of the twist parameter.
    pub tau_order: u8,
}

impl Scheme {
    /// Scheme with default orders `K = N + 2`, `T = 3`.
    pub fn new(lambda: Spectrum, delta: Diagonal, order: usize) -> Self {
        Scheme {
            lambda,
            delta,
            order,
            eps_order: order as i32 + 2,
            tau_order: 3,
        }
    }

    pub fn with_eps_order(mut self, k: i32) -> Self {
        self.eps_order = k;
        self
    }

    pub fn with_tau_order(mut self, t: u8) -> Self {
        self.tau_order = t;
        self
    }

    pub fn nu(&self) -> usize {
        self.lambda.nu()
    }

    /// `d = ad_X0`.
    pub fn d(&self) -> Derivation {
        Derivation::plain(Diagonal::Ad(self.lambda.clone()))
    }

    /// `delta` alone.
    pub fn delta_derivation(&self) -> Derivation {
        Derivation::plain(self.delta.clone())
    }

    /// `d + e delta`.
    pub fn regularized(&self) -> Derivation {
        Derivation::regularized(
            Diagonal::Ad(self.lambda.clone()),
            self.delta.clone(),
            self.eps_order,
        )
    }

    pub fn is_resonant(&self, n: &Monomial, j: usize) -> bool {
        ad_eigenvalue(&self.lambda, n, j).is_zero()
    }
}

/// Projections `p` (onto `ker d`) and `q = id - p`.
pub fn proj_split(u: &VectorField, s: &Scheme) -> (VectorField, VectorField) {
    let p = u.filter(|k, _| s.is_resonant(&k.mono, k.dir));
    let q = u.filter(|k, _| !s.is_resonant(&k.mono, k.dir));
    (p, q)
}

/// `p(u)`.
pub fn kernel_part(u: &VectorField, s: &Scheme) -> VectorField {
    proj_split(u, s).0
}

/// `q(u)`.
pub fn image_part(u: &VectorField, s: &Scheme) -> VectorField {
    proj_split(u, s).1
}

/// Partial inverse `I` of `d` on its image.
pub fn inv_on_image(u: &VectorField, s: &Scheme) -> Result<VectorField> {
    s.d().invert(u)
}

/// Inverse of `d + e delta`, valid up to `e^K`.
pub fn i_eps(u: &VectorField, s: &Scheme) -> Result<VectorField> {
    s.regularized().invert(u)
}

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        }
    }
}

fn basis(nu: usize, order: usize) -> Vec<FieldKey> {
    let mut out = Vec::new();
    for m in Monomial::enumerate(nu, 2, order + 1) {
        for j in 0..nu {
            out.push(FieldKey::new(m, j));
        }
    }
    out
}

fn unit(nu: usize, order: usize, k: &FieldKey) -> VectorField {
    VectorField::term(nu, order, k.mono, k.dir, Coeff::one()).expect("basis element")
}

fn derivation_failure(
    nu: usize,
    order: usize,
    keys: &[FieldKey],
    der: &Derivation,
) -> Option<String> {
    for (i, a) in keys.iter().enumerate() {
        for b in &keys[i..] {
            if a.grade() + b.grade() > order {
                continue;
            }
            let x = unit(nu, order, a);
            let y = unit(nu, order, b);
            let lhs = der.apply(&x.lie(&y));
            let rhs = der.apply(&x).lie(&y).add(&x.lie(&der.apply(&y)));
            if lhs != rhs {
                let names = crate::series::default_names(nu);
                return Some(format!(
                    "fails on [{}, {}]",
                    crate::vfield::render_basis(&a.mono, a.dir, &names),
                    crate::vfield::render_basis(&b.mono, b.dir, &names)
                ));
            }
        }
    }
    None
}

/// Checks the regularization hypotheses up to order `N` on the monomial basis.
pub fn validate_scheme(s: &Scheme) -> Vec<Check> {
    let nu = s.nu();
    let mut checks = Vec::new();
    let arity_ok = match &s.delta {
        Diagonal::Ad(mu) => mu.nu() == nu,
        Diagonal::Grading => true,
    };
    checks.push(Check::new(
        "arity",
        arity_ok && nu > 0 && nu <= crate::series::MAX_VARS,
        format!("{} variables", nu),
    ));
    checks.push(Check::new(
        "orders",
        s.order >= 1 && s.eps_order >= 0,
        format!("N={}, K={}, T={}", s.order, s.eps_order, s.tau_order),
    ));
    if !arity_ok || nu == 0 || nu > crate::series::MAX_VARS {
        return checks;
    }
    let keys = basis(nu, s.order);
    let d = s.d();
    let delta = s.delta_derivation();
    let kernel: Vec<&FieldKey> = keys
        .iter()
        .filter(|k| s.is_resonant(&k.mono, k.dir))
        .collect();

    let unstable: Vec<String> = kernel
        .iter()
        .filter(|k| !image_part(&delta.apply(&unit(nu, s.order, k)), s).is_zero())
        .map(|k| crate::vfield::render_basis(&k.mono, k.dir, &crate::series::default_names(nu)))
        .collect();
    checks.push(Check::new(
        "kernel stable under delta",
        unstable.is_empty(),
        if unstable.is_empty() {
            format!("{} kernel basis elements", kernel.len())
        } else {
            unstable.join(", ")
        },
    ));

    let singular: Vec<String> = kernel
        .iter()
        .filter(|k| s.delta.eigenvalue(&k.mono, k.dir).is_zero())
        .map(|k| crate::vfield::render_basis(&k.mono, k.dir, &crate::series::default_names(nu)))
        .collect();
    checks.push(Check::new(
        "delta invertible on kernel",
        singular.is_empty(),
        if singular.is_empty() {
            "ok".to_string()
        } else {
            format!("delta vanishes on {}", singular.join(", "))
        },
    ));

    let noncommuting = keys.iter().find(|k| {
        let x = unit(nu, s.order, k);
        d.apply(&delta.apply(&x)) != delta.apply(&d.apply(&x))
    });
    checks.push(Check::new(
        "[d, delta] = 0",
        noncommuting.is_none(),
        "checked on the monomial basis",
    ));

    // cap the quadratic derivation check at a modest basis size
    let small: Vec<FieldKey> = keys.iter().copied().filter(|k| k.grade() <= 4).collect();
    let fail = derivation_failure(nu, s.order, &small, &delta)
        .or_else(|| derivation_failure(nu, s.order, &small, &d));
    checks.push(Check::new(
        "d and delta are derivations",
        fail.is_none(),
        fail.unwrap_or_else(|| "ok".to_string()),
    ));
    checks
}

/// Fails with [`Error::InvalidScheme`] unless every check passes.
pub fn ensure_valid(s: &Scheme) -> Result<()> {
    let failed: Vec<String> = validate_scheme(s)
        .into_iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{}: {}", c.name, c.detail))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidScheme(failed))
    }
}

/// `exp(tau e m)` truncated: at aux order for symbolic `tau`, else at `e^K`.
fn twist_factor(m: &Rational, tau: &Coeff, max_terms: usize) -> Coeff {
    let step = (tau * &Coeff::eps_pow(1)).scale(m);
    let mut acc = Coeff::one();
    let mut term = Coeff::one();
    for j in 1..=max_terms {
        term = (&term * &step).scale(&Rational::new(One::one(), (j as i64).into()));
        if term.is_exact_zero() {
            break;
        }
        acc = &acc + &term;
    }
    acc
}

fn twist_len(tau: &Coeff, s: &Scheme) -> usize {
    if tau.is_pure_eps() {
        s.eps_order.max(0) as usize + s.order + 1
    } else {
        s.tau_order as usize
    }
}

/// `theta_tau(u) = exp(tau e delta) u` on a field.
pub fn theta_field(u: &VectorField, s: &Scheme, tau: &Coeff) -> VectorField {
    if tau.is_exact_zero() {
        return u.clone();
    }
    let n = twist_len(tau, s);
    let cap = tau.is_pure_eps().then_some(s.eps_order);
    u.map_terms(|k, c| {
        let f = twist_factor(&s.delta.eigenvalue(&k.mono, k.dir), tau, n);
        let r = c * &f;
        match cap {
            Some(v) => r.truncate(v),
            None => r,
        }
    })
}

/// `theta_tau` on a diffeomorphism: conjugation by the `delta`-flow.
pub fn theta_diffeo(phi: &Diffeo, s: &Scheme, tau: &Coeff) -> Diffeo {
    if tau.is_exact_zero() {
        return phi.clone();
    }
    let n = twist_len(tau, s);
    let cap = tau.is_pure_eps().then_some(s.eps_order);
    phi.map_nonlinear(|m, i, c| {
        let f = twist_factor(&s.delta.eigenvalue(m, i), tau, n);
        let r = c * &f;
        match cap {
            Some(v) => r.truncate(v),
            None => r,
        }
    })
}

/// Symbolic twist parameter `tau` truncated at `T`.
pub fn tau_param(s: &Scheme) -> Coeff {
    let spec = AuxSpec::single("tau", s.tau_order);
    Coeff::aux_param(&spec, "tau").expect("declared parameter")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{int, rat, EXACT};

    fn mono(e: &[u32]) -> Monomial {
        Monomial::new(e).unwrap()
    }

    fn toy() -> Scheme {
        Scheme::new(Spectrum::new(vec![int(1), int(0)]), Diagonal::Grading, 5)
    }

    fn xy2(n: u32, c: Coeff) -> VectorField {
        VectorField::term(2, 5, mono(&[n, 2]), 1, c).unwrap()
    }

    #[test]
    fn split_toy() {
        let u = xy2(0, Coeff::from(2)).add(&xy2(1, Coeff::from(3)));
        let (p, q) = proj_split(&u, &toy());
        assert_eq!(p, xy2(0, Coeff::from(2)));
        assert_eq!(q, xy2(1, Coeff::from(3)));
        let nr = Scheme::new(Spectrum::new(vec![int(2), int(5)]), Diagonal::Grading, 5);
        assert!(proj_split(&u, &nr).0.is_zero());
    }

    #[test]
    fn inverse_on_image() {
        let s = toy();
        assert_eq!(
            inv_on_image(&xy2(1, Coeff::from(3)), &s).unwrap(),
            xy2(1, Coeff::from(3))
        );
        assert_eq!(
            inv_on_image(&xy2(2, Coeff::from(5)), &s).unwrap(),
            xy2(2, Coeff::constant(rat(5, 2)))
        );
        assert!(matches!(
            inv_on_image(&xy2(0, Coeff::one()), &s),
            Err(Error::KernelComponent(_))
        ));
    }

    #[test]
    fn i_eps_toy_terms() {
        let s = toy();
        let r = i_eps(&xy2(0, Coeff::one()), &s).unwrap();
        assert_eq!(r, xy2(0, Coeff::eps_pow(-1)));
        // x^2 y^2 d/dy: 1/(2 + 3e)
        let r = i_eps(&xy2(2, Coeff::one()), &s).unwrap();
        let c = r.coeff(&mono(&[2, 2]), 1);
        let back = &c
            * &Coeff::from_terms(vec![(Key::eps(0), int(2)), (Key::eps(1), int(3))], EXACT, None);
        assert!(back.agrees_with(&Coeff::one()));
        assert_eq!(c.validity(), s.eps_order);
        assert_eq!(c.eps_coeff(1), rat(-3, 4));
    }

    #[test]
    fn validation_examples() {
        assert!(validate_scheme(&toy()).iter().all(|c| c.pass));
        let bad = Scheme::new(
            Spectrum::new(vec![int(1), int(0)]),
            Diagonal::Ad(Spectrum::new(vec![int(1), int(0)])),
            4,
        );
        let checks = validate_scheme(&bad);
        assert!(!checks
            .iter()
            .find(|c| c.name == "delta invertible on kernel")
            .unwrap()
            .pass);
        let nr = Scheme::new(Spectrum::new(vec![int(2), int(5)]), Diagonal::Grading, 6);
        assert!(validate_scheme(&nr).iter().all(|c| c.pass));
    }

    #[test]
    fn twist_of_unit_grade() {
        let s = toy().with_tau_order(2);
        let tau = tau_param(&s);
        let u = xy2(0, Coeff::one());
        let t = theta_field(&u, &s, &tau);
        let te = &tau * &Coeff::eps_pow(1);
        let expected = &(&Coeff::one() + &te) + &(&te * &te).scale(&rat(1, 2));
        assert_eq!(t, xy2(0, expected));
        let zero = theta_field(&u, &s, &Coeff::zero());
        assert_eq!(zero, u);
    }
}
