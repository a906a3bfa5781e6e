//! Identity-tangent formal diffeomorphisms acting as substitution automorphisms.
//!
//! A [`Diffeo`] stores its coordinate series `psi_i = x_i + ...` and acts on
//! polynomials by `F.A = A o psi`. The group product is the operator product,
//! so [`Diffeo::compose`]`(a, b)` is the map `x -> b(a(x))`.

use num_traits::One;

use crate::coeff::{Coeff, Rational};
use crate::error::{Error, Result};
use crate::regularize::Derivation;
use crate::series::{Monomial, PowerCache, Series};
use crate::vfield::VectorField;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diffeo {
    order: usize,
    comps: Vec<Series>,
}

fn recip(n: usize) -> Rational {
    Rational::new(One::one(), (n as i64).into())
}

impl Diffeo {
    pub fn identity(nu: usize, order: usize) -> Self {
        Diffeo {
            order,
            comps: (0..nu).map(|i| Series::var(nu, order + 1, i)).collect(),
        }
    }

    /// Builds from coordinate series; they must read `x_i + O(x^2)` exactly.
    pub fn from_components(comps: Vec<Series>, order: usize) -> Result<Self> {
        let nu = comps.len();
        let mut out = Vec::with_capacity(nu);
        for (i, s) in comps.into_iter().enumerate() {
            if s.nu() != nu {
                return Err(Error::DimensionMismatch(format!(
                    "component {} lives in {} variables, expected {}",
                    i,
                    s.nu(),
                    nu
                )));
            }
            for (m, c) in s.terms() {
                if m.degree() > 1 {
                    break;
                }
                let expected = if *m == Monomial::var(i) {
                    Coeff::one()
                } else {
                    Coeff::zero()
                };
                if !c.is_exact() || *c != expected {
                    return Err(Error::NotIdentityTangent);
                }
            }
            if !s.terms().contains_key(&Monomial::var(i)) {
                return Err(Error::NotIdentityTangent);
            }
            out.push(s.with_max_deg(order + 1));
        }
        Ok(Diffeo { order, comps: out })
    }

    pub fn nu(&self) -> usize {
        self.comps.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn components(&self) -> &[Series] {
        &self.comps
    }

    /// `psi_i - x_i`.
    pub fn nonlinear(&self) -> Vec<Series> {
        let nu = self.nu();
        self.comps
            .iter()
            .enumerate()
            .map(|(i, s)| s.sub(&Series::var(nu, self.order + 1, i)))
            .collect()
    }

    /// Applies `f(x^n, i, c)` to every nonlinear coefficient of `psi_i`.
    pub fn map_nonlinear(&self, mut f: impl FnMut(&Monomial, usize, &Coeff) -> Coeff) -> Diffeo {
        let comps = self
            .comps
            .iter()
            .enumerate()
            .map(|(i, s)| s.map_coeffs(|m, c| if m.degree() >= 2 { f(m, i, c) } else { c.clone() }))
            .collect();
        Diffeo {
            order: self.order,
            comps,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.nonlinear().iter().all(|s| s.is_zero())
    }

    /// `F.A = A o psi`, truncated at `A`'s degree bound.
    pub fn apply(&self, a: &Series) -> Series {
        a.substitute(&self.comps)
    }

    fn check(&self, other: &Diffeo) -> Result<()> {
        if self.nu() != other.nu() || self.order != other.order {
            return Err(Error::DimensionMismatch(format!(
                "diffeos of (nu, order) = ({}, {}) and ({}, {})",
                self.nu(),
                self.order,
                other.nu(),
                other.order
            )));
        }
        Ok(())
    }

    /// Operator product `self * other`: the map `x -> other(self(x))`.
    pub fn compose(&self, other: &Diffeo) -> Result<Diffeo> {
        self.check(other)?;
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &Diffeo) -> Diffeo {
        let mut cache = PowerCache::new(&self.comps, self.order + 1);
        let comps = other
            .comps
            .iter()
            .map(|s| s.substitute_cached(&mut cache))
            .collect();
        Diffeo {
            order: self.order,
            comps,
        }
    }

    /// Compositional inverse by the fixed point `chi = x - h(chi)`.
    pub fn invert(&self) -> Diffeo {
        let nu = self.nu();
        let h = self.nonlinear();
        let x: Vec<Series> = (0..nu).map(|i| Series::var(nu, self.order + 1, i)).collect();
        let mut chi = x.clone();
        for _ in 0..self.order {
            let mut cache = PowerCache::new(&chi, self.order + 1);
            let next = (0..nu)
                .map(|i| x[i].sub(&h[i].substitute_cached(&mut cache)))
                .collect();
            chi = next;
        }
        Diffeo {
            order: self.order,
            comps: chi,
        }
    }

    /// `exp(X) = sum X^s / s!`, acting on each coordinate.
    pub fn exp_field(x: &VectorField) -> Diffeo {
        let nu = x.nu();
        let order = x.order();
        let comps = (0..nu)
            .map(|i| {
                let mut term = Series::var(nu, order + 1, i);
                let mut acc = term.clone();
                for s in 1..=order + 1 {
                    term = x.apply(&term).scale_rat(&recip(s));
                    if term.terms().is_empty() {
                        break;
                    }
                    acc = acc.add(&term);
                }
                acc
            })
            .collect();
        Diffeo { order, comps }
    }

    /// `log(F) = sum (-1)^(s-1)/s (F - Id)^s`, read off on the coordinates.
    pub fn log(&self) -> VectorField {
        let nu = self.nu();
        let top = self.order + 1;
        let mut cache = PowerCache::new(&self.comps, top);
        let mut comps = Vec::with_capacity(nu);
        for i in 0..nu {
            let mut b = Series::var(nu, top, i);
            let mut acc = Series::zero(nu, top);
            for s in 1..=top {
                b = b.substitute_cached(&mut cache).sub(&b);
                if b.terms().is_empty() {
                    break;
                }
                let r = recip(s);
                acc = acc.add(&b.scale_rat(&if s % 2 == 1 { r } else { -r }));
            }
            comps.push(acc);
        }
        VectorField::from_components(&comps, self.order)
            .expect("F - Id raises the degree of every coordinate")
    }

    pub fn agrees_with(&self, other: &Diffeo) -> bool {
        self.nu() == other.nu()
            && self
                .comps
                .iter()
                .zip(&other.comps)
                .all(|(a, b)| a.agrees_with(b))
    }

    /// Smallest validity over all coefficients.
    pub fn validity(&self) -> i32 {
        self.comps
            .iter()
            .flat_map(|s| s.terms().values().map(|c| c.validity()))
            .min()
            .unwrap_or(crate::coeff::EXACT)
    }

    /// Component-wise rendering, `x -> ...`.
    pub fn render(&self, names: &[String]) -> Vec<String> {
        self.comps
            .iter()
            .map(|s| {
                let t = s.render(names);
                if t.is_empty() {
                    "0".to_string()
                } else {
                    t.join(" + ")
                }
            })
            .collect()
    }
}

/// `exp(X)`.
pub fn exp_field(x: &VectorField) -> Diffeo {
    Diffeo::exp_field(x)
}

/// `log(psi)`.
pub fn log_diffeo(psi: &Diffeo) -> VectorField {
    psi.log()
}

/// `sum c_s ad_a^s(b)`, with `c_s` supplied per power.
fn ad_series(a: &VectorField, b: &VectorField, coef: impl Fn(usize) -> Rational) -> VectorField {
    let mut term = b.clone();
    let mut acc = b.scale_rat(&coef(0));
    for s in 1..=a.order() {
        term = a.lie(&term);
        if term.terms().is_empty() {
            break;
        }
        acc = acc.add(&term.scale_rat(&coef(s)));
    }
    acc
}

fn factorial(n: usize) -> Rational {
    (1..=n).fold(Rational::one(), |acc, k| acc * Rational::from_integer((k as i64).into()))
}

fn signed(s: usize, r: Rational) -> Rational {
    if s.is_multiple_of(2) {
        r
    } else {
        -r
    }
}

/// Left Magnus series `e^-a D(e^a) = sum (-1)^s/(s+1)! ad_a^s(D a)`.
pub fn magnus_left(alpha: &VectorField, d: &Derivation) -> VectorField {
    ad_series(alpha, &d.apply(alpha), |s| signed(s, factorial(s + 1).recip()))
}

/// Right Magnus series `D(e^a) e^-a = sum 1/(s+1)! ad_a^s(D a)`.
pub fn magnus_right(alpha: &VectorField, d: &Derivation) -> VectorField {
    ad_series(alpha, &d.apply(alpha), |s| factorial(s + 1).recip())
}

/// `e^-a v e^a = sum (-1)^i/i! ad_a^i(v)`.
pub fn conjugate_by_log(alpha: &VectorField, v: &VectorField) -> VectorField {
    ad_series(alpha, v, |s| signed(s, factorial(s).recip()))
}

/// Logarithmic derivative `phi^-1 d(phi)`.
pub fn log_d_magnus(phi: &Diffeo, d: &Derivation) -> VectorField {
    magnus_left(&phi.log(), d)
}

/// `phi^-1 v phi`.
pub fn conjugate_field(phi: &Diffeo, v: &VectorField) -> Result<VectorField> {
    if phi.nu() != v.nu() || phi.order() != v.order() {
        return Err(Error::DimensionMismatch(
            "diffeo and field differ in dimension or order".to_string(),
        ));
    }
    Ok(conjugate_by_log(&phi.log(), v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{int, AuxSpec};
    use crate::regularize::Diagonal;
    use crate::vfield::Spectrum;

    fn mono(e: &[u32]) -> Monomial {
        Monomial::new(e).unwrap()
    }

    /// Flow of `c y^2 d/dy` in one variable: y/(1 - c y) truncated.
    fn flow(c: &Coeff, order: usize) -> Diffeo {
        let mut s = Series::zero(1, order + 1);
        let mut p = Coeff::one();
        for k in 1..=order + 1 {
            s.add_term(mono(&[k as u32]), p.clone());
            p = &p * c;
        }
        Diffeo::from_components(vec![s], order).unwrap()
    }

    fn field(c: Coeff, order: usize) -> VectorField {
        VectorField::term(1, order, mono(&[2]), 0, c).unwrap()
    }

    #[test]
    fn exp_of_toy_flow() {
        let spec = AuxSpec::single("t", 9);
        let t = Coeff::aux_param(&spec, "t").unwrap();
        let e = exp_field(&field(t.clone(), 6));
        assert_eq!(e, flow(&t, 6));
        assert!(exp_field(&VectorField::zero(2, 4)).is_identity());
    }

    #[test]
    fn exp_of_x_dependent_flow() {
        // a(x) = 1 + 2x: psi_y = y / (1 - a(x) y)
        let n = 5;
        let a = Series::var(2, n + 1, 0)
            .scale_rat(&int(2))
            .add(&Series::monomial(2, n + 1, Monomial::one(), Coeff::one()));
        let y = Series::var(2, n + 1, 1);
        let mut u = VectorField::zero(2, n);
        for (m, c) in a.mul(&y).mul(&y).terms() {
            u.add_term(*m, 1, c.clone()).unwrap();
        }
        let e = exp_field(&u);
        let mut expected = Series::zero(2, n + 1);
        let mut p = y.clone();
        let ay = a.mul(&y);
        for _ in 0..=n {
            expected = expected.add(&p);
            p = p.mul(&ay);
        }
        assert_eq!(e.components()[1], expected);
        assert_eq!(e.components()[0], Series::var(2, n + 1, 0));
    }

    #[test]
    fn log_of_flow() {
        let a = Coeff::from(3);
        assert_eq!(flow(&a, 6).log(), field(a, 6));
        assert!(Diffeo::identity(2, 5).log().is_zero());
    }

    #[test]
    fn flows_compose_additively() {
        let spec = AuxSpec::new(vec![
            crate::coeff::AuxParam { name: "t".into(), order: 8 },
            crate::coeff::AuxParam { name: "s".into(), order: 8 },
        ])
        .unwrap();
        let t = Coeff::aux_param(&spec, "t").unwrap();
        let s = Coeff::aux_param(&spec, "s").unwrap();
        let lhs = flow(&t, 5).compose(&flow(&s, 5)).unwrap();
        assert_eq!(lhs, flow(&(&t + &s), 5));
    }

    #[test]
    fn inverse_of_flow() {
        let a = Coeff::from(2);
        let inv = flow(&a, 6).invert();
        assert_eq!(inv, flow(&-&a, 6));
        let psi = flow(&a, 6);
        assert!(psi.compose(&inv).unwrap().is_identity());
        assert_eq!(psi.compose(&Diffeo::identity(1, 6)).unwrap(), psi);
    }

    #[test]
    fn compose_is_substitution_in_reverse() {
        // F_{compose(psi, phi)} A = A o phi o psi
        let n = 4;
        let psi = exp_field(
            &VectorField::term(2, n, mono(&[1, 1]), 0, Coeff::from(2)).unwrap(),
        );
        let phi = exp_field(
            &VectorField::term(2, n, mono(&[0, 2]), 0, Coeff::from(-1)).unwrap(),
        );
        let a = Series::var(2, n + 1, 0).mul(&Series::var(2, n + 1, 1));
        let lhs = psi.compose(&phi).unwrap().apply(&a);
        let rhs = psi.apply(&phi.apply(&a));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn log_d_toy_abelian() {
        // d = ad_{x d/dx}, phi = exp(a(x) y^2 d/dy) -> x a'(x) y^2 d/dy
        let n = 5;
        let d = Derivation::plain(Diagonal::Ad(Spectrum::new(vec![int(1), int(0)])));
        let mut u = VectorField::zero(2, n);
        let mut expected = VectorField::zero(2, n);
        for k in 0..4u32 {
            let c = Coeff::from(k as i64 + 2);
            u.add_term(mono(&[k, 2]), 1, c.clone()).unwrap();
            expected
                .add_term(mono(&[k, 2]), 1, c.scale(&int(k as i64)))
                .unwrap();
        }
        assert_eq!(log_d_magnus(&exp_field(&u), &d), expected);
    }

    #[test]
    fn conjugation_in_abelian_subalgebra() {
        let n = 4;
        let alpha = VectorField::term(2, n, mono(&[1, 2]), 1, Coeff::one()).unwrap();
        let v = VectorField::term(2, n, mono(&[0, 2]), 1, Coeff::one()).unwrap();
        assert_eq!(conjugate_field(&exp_field(&alpha), &v).unwrap(), v);
        assert_eq!(conjugate_field(&Diffeo::identity(2, n), &v).unwrap(), v);
    }
}
