//! Exact coefficient ring.
//!
//! A [`Coeff`] is a truncated Laurent series in the regularization parameter
//! `e` (epsilon) over the rationals, tensored with truncated polynomials in a
//! small set of auxiliary formal parameters (`tau`, `t`, ...).
//!
//! Every coefficient carries a *validity*: the largest `e`-exponent up to
//! which the stored terms are exact. Products with poles shift validity down,
//! so losing precision shows up as an explicit error instead of silently
//! wrong low-order terms. Values built from exact data have validity
//! [`EXACT`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational number in canonical reduced form.
pub type Rational = BigRational;

/// Maximum number of auxiliary parameters a coefficient ring may declare.
pub const MAX_AUX: usize = 4;

/// Validity of a value known exactly to every order.
pub const EXACT: i32 = i32::MAX;

/// Convenience constructor for small rationals.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Integer as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn vshift(v: i32, by: i32) -> i32 {
    if v == EXACT {
        EXACT
    } else {
        v.saturating_add(by)
    }
}

/// An auxiliary formal parameter, truncated after `order`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AuxParam {
    pub name: String,
    pub order: u8,
}

/// Declared auxiliary parameters of a coefficient ring.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AuxSpec(Arc<[AuxParam]>);

impl AuxSpec {
    pub fn new(params: Vec<AuxParam>) -> Result<Self> {
        if params.len() > MAX_AUX {
            return Err(Error::TooManyAux(params.len()));
        }
        Ok(AuxSpec(params.into()))
    }

    /// A single parameter `name` truncated after `order`.
    pub fn single(name: &str, order: u8) -> Self {
        AuxSpec(
            vec![AuxParam {
                name: name.to_string(),
                order,
            }]
            .into(),
        )
    }

    pub fn params(&self) -> &[AuxParam] {
        &self.0
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|p| p.name == name)
    }
}

/// Exponent of a single term: power of `e` and powers of the auxiliary parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Key {
    pub eps: i32,
    pub aux: [u8; MAX_AUX],
}

impl Key {
    pub fn eps(eps: i32) -> Self {
        Key {
            eps,
            aux: [0; MAX_AUX],
        }
    }

    pub fn is_pure_eps(&self) -> bool {
        self.aux.iter().all(|&a| a == 0)
    }
}

/// Element of `Q((e)) ⊗ Q[aux]/(aux^(order+1))` with validity tracking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coeff {
    // sorted by key, no zero entries, every eps <= validity
    terms: Vec<(Key, Rational)>,
    validity: i32,
    aux: Option<AuxSpec>,
}

/// Arithmetic selector for [`coeff_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// Checked binary arithmetic; fails when the auxiliary declarations disagree.
pub fn coeff_arith(a: &Coeff, b: &Coeff, op: ArithOp) -> Result<Coeff> {
    let aux = merge_aux(&a.aux, &b.aux)?;
    Ok(match op {
        ArithOp::Add => a.combine(b, false, aux),
        ArithOp::Sub => a.combine(b, true, aux),
        ArithOp::Mul => a.product(b, aux),
    })
}

fn merge_aux(a: &Option<AuxSpec>, b: &Option<AuxSpec>) -> Result<Option<AuxSpec>> {
    match (a, b) {
        (None, None) => Ok(None),
        (Some(x), None) | (None, Some(x)) => Ok(Some(x.clone())),
        (Some(x), Some(y)) => {
            if x == y {
                Ok(Some(x.clone()))
            } else {
                Err(Error::AuxMismatch)
            }
        }
    }
}

impl Default for Coeff {
    fn default() -> Self {
        Coeff::zero()
    }
}

impl From<Rational> for Coeff {
    fn from(r: Rational) -> Self {
        Coeff::constant(r)
    }
}

impl From<i64> for Coeff {
    fn from(n: i64) -> Self {
        Coeff::constant(int(n))
    }
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff {
            terms: Vec::new(),
            validity: EXACT,
            aux: None,
        }
    }

    pub fn one() -> Self {
        Coeff::constant(Rational::one())
    }

    pub fn constant(r: Rational) -> Self {
        Coeff::monomial(r, 0)
    }

    /// `r * e^k`, exact.
    pub fn monomial(r: Rational, k: i32) -> Self {
        let terms = if r.is_zero() {
            Vec::new()
        } else {
            vec![(Key::eps(k), r)]
        };
        Coeff {
            terms,
            validity: EXACT,
            aux: None,
        }
    }

    /// `e^k`.
    pub fn eps_pow(k: i32) -> Self {
        Coeff::monomial(Rational::one(), k)
    }

    /// The auxiliary parameter `name` itself, or an error if undeclared.
    pub fn aux_param(spec: &AuxSpec, name: &str) -> Result<Self> {
        let idx = spec
            .index_of(name)
            .ok_or_else(|| Error::UnknownAux(name.to_string()))?;
        let mut key = Key::eps(0);
        key.aux[idx] = 1;
        Ok(Coeff::from_terms(vec![(key, Rational::one())], EXACT, Some(spec.clone())))
    }

    /// Builds a coefficient from raw terms. Terms beyond `validity` or beyond
    /// an auxiliary truncation are dropped; duplicates are summed.
    pub fn from_terms(terms: Vec<(Key, Rational)>, validity: i32, aux: Option<AuxSpec>) -> Self {
        let mut c = Coeff {
            terms,
            validity,
            aux,
        };
        c.normalize();
        c
    }

    fn normalize(&mut self) {
        let v = self.validity;
        let orders: Vec<u8> = match &self.aux {
            Some(s) => s.params().iter().map(|p| p.order).collect(),
            None => Vec::new(),
        };
        self.terms.retain(|(k, r)| {
            !r.is_zero()
                && k.eps <= v
                && k.aux.iter().enumerate().all(|(i, &a)| {
                    if i < orders.len() {
                        a <= orders[i]
                    } else {
                        a == 0
                    }
                })
        });
        self.terms.sort_by_key(|a| a.0);
        let mut merged: Vec<(Key, Rational)> = Vec::with_capacity(self.terms.len());
        for (k, r) in self.terms.drain(..) {
            match merged.last_mut() {
                Some((lk, lr)) if *lk == k => *lr += r,
                _ => merged.push((k, r)),
            }
        }
        merged.retain(|(_, r)| !r.is_zero());
        self.terms = merged;
    }

    pub fn terms(&self) -> &[(Key, Rational)] {
        &self.terms
    }

    pub fn validity(&self) -> i32 {
        self.validity
    }

    pub fn is_exact(&self) -> bool {
        self.validity == EXACT
    }

    pub fn aux(&self) -> Option<&AuxSpec> {
        self.aux.as_ref()
    }

    /// Coefficient of the auxiliary monomial with exponents `exps`, as a pure-`e` value.
    pub fn aux_coeff(&self, exps: &[u8]) -> Coeff {
        let mut want = [0u8; MAX_AUX];
        want[..exps.len()].copy_from_slice(exps);
        Coeff {
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.aux == want)
                .map(|(k, r)| (Key::eps(k.eps), r.clone()))
                .collect(),
            validity: self.validity,
            aux: None,
        }
    }

    /// Same value, re-declared over the auxiliary spec `spec`.
    pub fn with_aux(mut self, spec: &AuxSpec) -> Result<Self> {
        if let Some(own) = &self.aux {
            if own != spec {
                return Err(Error::AuxMismatch);
            }
        }
        self.aux = Some(spec.clone());
        Ok(self)
    }

    /// No stored terms (the value may still be `O(e^(validity+1))`).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exactly zero: no terms and exact.
    pub fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.validity == EXACT
    }

    /// Lowest stored `e`-exponent.
    pub fn min_eps(&self) -> Option<i32> {
        self.terms.iter().map(|(k, _)| k.eps).min()
    }

    /// Order in `e` including the unknown tail.
    fn order(&self) -> i32 {
        let tail = vshift(self.validity, 1);
        match self.min_eps() {
            Some(m) => m.min(tail),
            None => tail,
        }
    }

    /// Coefficient of `e^k` with no auxiliary powers.
    pub fn eps_coeff(&self, k: i32) -> Rational {
        self.terms
            .iter()
            .find(|(key, _)| key.eps == k && key.is_pure_eps())
            .map(|(_, r)| r.clone())
            .unwrap_or_else(Rational::zero)
    }

    /// True if the value carries no `e` (only `e^0` terms).
    pub fn is_eps_free(&self) -> bool {
        self.terms.iter().all(|(k, _)| k.eps == 0)
    }

    /// True if no term carries an auxiliary parameter.
    pub fn is_pure_eps(&self) -> bool {
        self.terms.iter().all(|(k, _)| k.is_pure_eps())
    }

    /// Exact rational value if this is an exact `e`-free, aux-free constant.
    pub fn as_rational(&self) -> Option<Rational> {
        if !self.is_exact() {
            return None;
        }
        match self.terms.as_slice() {
            [] => Some(Rational::zero()),
            [(k, r)] if *k == Key::eps(0) => Some(r.clone()),
            _ => None,
        }
    }

    /// Drops everything above `e^v` and lowers validity to `v` if needed.
    pub fn truncate(&self, v: i32) -> Coeff {
        let validity = self.validity.min(v);
        Coeff::from_terms(self.terms.clone(), validity, self.aux.clone())
    }

    /// Multiplies by a rational scalar. Validity is unchanged.
    pub fn scale(&self, r: &Rational) -> Coeff {
        if r.is_zero() {
            return Coeff {
                terms: Vec::new(),
                validity: self.validity,
                aux: self.aux.clone(),
            };
        }
        Coeff {
            terms: self.terms.iter().map(|(k, c)| (*k, c * r)).collect(),
            validity: self.validity,
            aux: self.aux.clone(),
        }
    }

    /// Multiplies by `e^k`.
    pub fn shift_eps(&self, k: i32) -> Coeff {
        Coeff {
            terms: self
                .terms
                .iter()
                .map(|(key, c)| {
                    let mut nk = *key;
                    nk.eps += k;
                    (nk, c.clone())
                })
                .collect(),
            validity: vshift(self.validity, k),
            aux: self.aux.clone(),
        }
    }

    /// Keeps only the terms whose key satisfies `pred`; validity unchanged.
    pub fn filter(&self, pred: impl Fn(&Key) -> bool) -> Coeff {
        Coeff {
            terms: self.terms.iter().filter(|(k, _)| pred(k)).cloned().collect(),
            validity: self.validity,
            aux: self.aux.clone(),
        }
    }

    fn combine(&self, other: &Coeff, negate: bool, aux: Option<AuxSpec>) -> Coeff {
        let validity = self.validity.min(other.validity);
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() || j < b.len() {
            let ord = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => x.0.cmp(&y.0),
                (Some(_), None) => Ordering::Less,
                (None, _) => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    let (k, r) = &b[j];
                    out.push((*k, if negate { -r } else { r.clone() }));
                    j += 1;
                }
                Ordering::Equal => {
                    let r = if negate {
                        &a[i].1 - &b[j].1
                    } else {
                        &a[i].1 + &b[j].1
                    };
                    if !r.is_zero() {
                        out.push((a[i].0, r));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.retain(|(k, _)| k.eps <= validity);
        Coeff {
            terms: out,
            validity,
            aux,
        }
    }

    fn product(&self, other: &Coeff, aux: Option<AuxSpec>) -> Coeff {
        let validity = vshift(self.validity, other.order())
            .min(vshift(other.validity, self.order()));
        if self.terms.is_empty() || other.terms.is_empty() {
            return Coeff {
                terms: Vec::new(),
                validity,
                aux,
            };
        }
        let orders: [u8; MAX_AUX] = {
            let mut o = [0u8; MAX_AUX];
            if let Some(s) = &aux {
                for (i, p) in s.params().iter().enumerate() {
                    o[i] = p.order;
                }
            }
            o
        };
        let mut raw = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ka, ra) in &self.terms {
            for (kb, rb) in &other.terms {
                let eps = ka.eps + kb.eps;
                if eps > validity {
                    continue;
                }
                let mut key = Key::eps(eps);
                let mut ok = true;
                for i in 0..MAX_AUX {
                    let s = ka.aux[i] as u16 + kb.aux[i] as u16;
                    if s > orders[i] as u16 {
                        ok = false;
                        break;
                    }
                    key.aux[i] = s as u8;
                }
                if ok {
                    raw.push((key, ra * rb));
                }
            }
        }
        raw.sort_by_key(|a| a.0);
        let mut merged: Vec<(Key, Rational)> = Vec::with_capacity(raw.len());
        for (k, r) in raw {
            match merged.last_mut() {
                Some((lk, lr)) if *lk == k => *lr += r,
                _ => merged.push((k, r)),
            }
        }
        merged.retain(|(_, r)| !r.is_zero());
        Coeff {
            terms: merged,
            validity,
            aux,
        }
    }

    /// True when both values agree on every term up to their common validity.
    pub fn agrees_with(&self, other: &Coeff) -> bool {
        let v = self.validity.min(other.validity);
        let a = self.terms.iter().filter(|(k, _)| k.eps <= v);
        let b = other.terms.iter().filter(|(k, _)| k.eps <= v);
        a.eq(b)
    }

    /// Inverse of a pure-`e` unit, with `self * result == 1` up to `target_validity`.
    pub fn invert(&self, target_validity: i32) -> Result<Coeff> {
        coeff_invert(self, target_validity)
    }
}

/// Inverts a pure-`e` coefficient by geometric expansion.
///
/// The lowest term must be nonzero and carry no auxiliary parameter; any
/// auxiliary term at all makes the value non-invertible here.
pub fn coeff_invert(a: &Coeff, target_validity: i32) -> Result<Coeff> {
    if a.terms.is_empty() || !a.is_pure_eps() {
        return Err(Error::NonInvertible);
    }
    let m = a.terms[0].0.eps;
    if m > a.validity {
        return Err(Error::NonInvertible);
    }
    let lead = a.terms[0].1.clone();
    let lead_inv = lead.recip();
    if a.terms.len() == 1 && a.is_exact() {
        return Ok(Coeff::monomial(lead_inv, -m));
    }
    // result validity: limited by the request and by the input precision
    let rv = vshift(target_validity, -m).min(vshift(a.validity, -2 * m));
    if rv == EXACT {
        return Err(Error::NonInvertible);
    }
    if rv + m < 0 {
        return Ok(Coeff::from_terms(Vec::new(), rv, None));
    }
    // a = e^m * lead * (1 + h), h = sum_{k>=1} h_k e^k
    let span = (rv + m) as usize;
    let mut h = vec![Rational::zero(); span + 1];
    for (k, r) in &a.terms[1..] {
        let idx = (k.eps - m) as usize;
        if idx <= span {
            h[idx] = r * &lead_inv;
        }
    }
    // g = 1/(1+h): g_0 = 1, g_n = -sum_{k=1..n} h_k g_{n-k}
    let mut g = vec![Rational::zero(); span + 1];
    g[0] = Rational::one();
    for n in 1..=span {
        let mut acc = Rational::zero();
        for k in 1..=n {
            if !h[k].is_zero() {
                acc -= &h[k] * &g[n - k];
            }
        }
        g[n] = acc;
    }
    let terms = g
        .into_iter()
        .enumerate()
        .map(|(n, c)| (Key::eps(n as i32 - m), c * &lead_inv))
        .collect();
    Ok(Coeff::from_terms(terms, rv, None))
}

/// Minimal subtraction: splits into the strictly negative `e`-part and the rest.
///
/// The pole part is exact as soon as the input is valid up to `e^-1`.
pub fn split_ms(a: &Coeff) -> (Coeff, Coeff) {
    let mut neg = a.filter(|k| k.eps < 0);
    if a.validity >= -1 {
        neg.validity = EXACT;
    }
    let pos = a.filter(|k| k.eps >= 0);
    (neg, pos)
}

/// Value at `e = 0` of a pole-free coefficient.
pub fn eval_eps_zero(a: &Coeff) -> Result<Coeff> {
    if let Some(m) = a.min_eps() {
        if m < 0 {
            return Err(Error::PoleAtZero);
        }
    }
    if a.validity < 0 {
        return Err(Error::ValidityExhausted {
            validity: a.validity,
        });
    }
    let mut c = a.filter(|k| k.eps == 0);
    c.validity = EXACT;
    Ok(c)
}

impl<'a> Add<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn add(self, rhs: &Coeff) -> Coeff {
        coeff_arith(self, rhs, ArithOp::Add).expect("auxiliary parameter mismatch")
    }
}

impl<'a> Sub<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn sub(self, rhs: &Coeff) -> Coeff {
        coeff_arith(self, rhs, ArithOp::Sub).expect("auxiliary parameter mismatch")
    }
}

impl<'a> Mul<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn mul(self, rhs: &Coeff) -> Coeff {
        coeff_arith(self, rhs, ArithOp::Mul).expect("auxiliary parameter mismatch")
    }
}

impl Add for Coeff {
    type Output = Coeff;
    fn add(self, rhs: Coeff) -> Coeff {
        &self + &rhs
    }
}

impl Sub for Coeff {
    type Output = Coeff;
    fn sub(self, rhs: Coeff) -> Coeff {
        &self - &rhs
    }
}

impl Mul for Coeff {
    type Output = Coeff;
    fn mul(self, rhs: Coeff) -> Coeff {
        &self * &rhs
    }
}

impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff {
            terms: self.terms.iter().map(|(k, r)| (*k, -r)).collect(),
            validity: self.validity,
            aux: self.aux.clone(),
        }
    }
}

impl Neg for Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        -&self
    }
}

/// Writes a rational as `p` or `p/q` (sign included).
pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Coeff {
    /// `p/q*e^k*tau^m` terms joined by ` + ` / ` - `, then `O(e^v)` if inexact.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = match &self.aux {
            Some(s) => s.params().iter().map(|p| p.name.as_str()).collect(),
            None => Vec::new(),
        };
        let mut first = true;
        for (k, r) in &self.terms {
            let mut factors = Vec::new();
            if k.eps == 1 {
                factors.push("e".to_string());
            } else if k.eps != 0 {
                factors.push(format!("e^{}", k.eps));
            }
            for (i, &a) in k.aux.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                let n = names.get(i).copied().unwrap_or("?");
                if a == 1 {
                    factors.push(n.to_string());
                } else {
                    factors.push(format!("{}^{}", n, a));
                }
            }
            let mag = r.abs();
            let body = if factors.is_empty() {
                fmt_rational(&mag)
            } else if mag.is_one() {
                factors.join("*")
            } else {
                format!("{}*{}", fmt_rational(&mag), factors.join("*"))
            };
            if first {
                if r.is_negative() {
                    write!(f, "-{}", body)?;
                } else {
                    write!(f, "{}", body)?;
                }
                first = false;
            } else if r.is_negative() {
                write!(f, " - {}", body)?;
            } else {
                write!(f, " + {}", body)?;
            }
        }
        if self.validity != EXACT {
            let o = self.validity as i64 + 1;
            if first {
                write!(f, "O(e^{})", o)?;
            } else {
                write!(f, " + O(e^{})", o)?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(terms: &[(i32, i64, i64)]) -> Coeff {
        Coeff::from_terms(
            terms
                .iter()
                .map(|&(k, p, q)| (Key::eps(k), rat(p, q)))
                .collect(),
            EXACT,
            None,
        )
    }

    #[test]
    fn pole_times_zero_order() {
        let p = &c(&[(-1, 1, 1)]) * &c(&[(1, 1, 1)]);
        assert_eq!(p, Coeff::one());
    }

    #[test]
    fn sum_merges_terms() {
        let a = c(&[(-1, 2, 1), (0, 3, 1)]);
        let b = c(&[(0, 1, 1), (1, 1, 1)]);
        assert_eq!(&a + &b, c(&[(-1, 2, 1), (0, 4, 1), (1, 1, 1)]));
    }

    #[test]
    fn aux_square_truncates() {
        let spec = AuxSpec::single("tau", 2);
        let tau = Coeff::aux_param(&spec, "tau").unwrap();
        let x = &Coeff::one() + &(&tau * &Coeff::eps_pow(1));
        let sq = &x * &x;
        // oracle: expand (1 + tau e)^2 by hand
        let mut k1 = Key::eps(1);
        k1.aux[0] = 1;
        let mut k2 = Key::eps(2);
        k2.aux[0] = 2;
        let expect = Coeff::from_terms(
            vec![(Key::eps(0), int(1)), (k1, int(2)), (k2, int(1))],
            EXACT,
            Some(spec.clone()),
        );
        assert_eq!(sq, expect);
        // cube drops tau^3
        let cube = &sq * &x;
        assert!(cube.terms().iter().all(|(k, _)| k.aux[0] <= 2));
    }

    #[test]
    fn mismatched_aux_is_error() {
        let a = Coeff::aux_param(&AuxSpec::single("tau", 2), "tau").unwrap();
        let b = Coeff::aux_param(&AuxSpec::single("t", 2), "t").unwrap();
        assert!(matches!(
            coeff_arith(&a, &b, ArithOp::Add),
            Err(Error::AuxMismatch)
        ));
        // an aux-free value embeds into any ring
        assert!(coeff_arith(&a, &Coeff::one(), ArithOp::Mul).is_ok());
    }

    #[test]
    fn invert_geometric() {
        let inv = coeff_invert(&c(&[(0, 1, 1), (1, 1, 1)]), 4).unwrap();
        assert_eq!(
            inv,
            Coeff::from_terms(
                (0..=4).map(|k| (Key::eps(k), int(if k % 2 == 0 { 1 } else { -1 }))).collect(),
                4,
                None
            )
        );
    }

    #[test]
    fn invert_monomial_is_exact() {
        let inv = coeff_invert(&c(&[(1, 2, 1)]), 3).unwrap();
        assert_eq!(inv, c(&[(-1, 1, 2)]));
    }

    #[test]
    fn invert_limited_by_input_validity() {
        let a = c(&[(0, 1, 1), (1, 2, 1)]).truncate(3);
        let inv = coeff_invert(&a, 3).unwrap();
        // multiply back: 1 up to e^3
        let back = &a * &inv;
        assert_eq!(back.validity(), 3);
        assert!(back.agrees_with(&Coeff::one()));
        assert_eq!(
            inv.terms().iter().map(|(_, r)| r.clone()).collect::<Vec<_>>(),
            vec![int(1), int(-2), int(4), int(-8)]
        );
    }

    #[test]
    fn invert_rejects_aux_and_zero() {
        let spec = AuxSpec::single("tau", 2);
        let tau = Coeff::aux_param(&spec, "tau").unwrap();
        assert!(coeff_invert(&tau, 3).is_err());
        assert!(coeff_invert(&Coeff::zero(), 3).is_err());
        let mixed = &Coeff::one() + &tau;
        assert!(coeff_invert(&mixed, 3).is_err());
    }

    #[test]
    fn split_examples() {
        let (n, p) = split_ms(&c(&[(-2, 2, 1), (0, 3, 1), (1, 1, 1)]));
        assert_eq!(n, c(&[(-2, 2, 1)]));
        assert_eq!(p, c(&[(0, 3, 1), (1, 1, 1)]));
        let (n, p) = split_ms(&Coeff::from(5));
        assert!(n.is_exact_zero());
        assert_eq!(p, Coeff::from(5));

        let spec = AuxSpec::single("tau", 2);
        let tau = Coeff::aux_param(&spec, "tau").unwrap();
        let x = &Coeff::eps_pow(-1) + &(&tau * &Coeff::eps_pow(-1));
        let (n, p) = split_ms(&x);
        assert_eq!(n, x);
        assert!(p.is_zero());
    }

    #[test]
    fn eval_at_zero() {
        assert_eq!(eval_eps_zero(&c(&[(0, 3, 1), (1, 1, 1)])).unwrap(), Coeff::from(3));
        assert!(matches!(
            eval_eps_zero(&c(&[(-1, 1, 1), (0, 1, 1)])),
            Err(Error::PoleAtZero)
        ));
        let three_over = &Coeff::from(3) * &coeff_invert(&c(&[(0, 1, 1), (1, 2, 1)]), 5).unwrap();
        assert_eq!(eval_eps_zero(&three_over).unwrap(), Coeff::from(3));
        let lost = Coeff::zero().truncate(-1);
        assert!(matches!(
            eval_eps_zero(&lost),
            Err(Error::ValidityExhausted { .. })
        ));
    }

    #[test]
    fn product_validity_rule() {
        // (e^-1 + O(e^3)) * (1 + O(e^2)) -> validity min(3 + 0, 2 - 1) = 1
        let a = c(&[(-1, 1, 1)]).truncate(2).truncate(3);
        let a = Coeff::from_terms(a.terms().to_vec(), 3, None);
        let b = Coeff::from_terms(vec![(Key::eps(0), int(1))], 2, None);
        assert_eq!((&a * &b).validity(), 1);
    }

    #[test]
    fn display() {
        let x = c(&[(-1, 2, 1), (0, 3, 1), (1, -3, 2)]);
        assert_eq!(x.to_string(), "2*e^-1 + 3 - 3/2*e");
        assert_eq!(Coeff::zero().to_string(), "0");
        assert_eq!(c(&[(0, 1, 1)]).truncate(2).to_string(), "1 + O(e^3)");
    }
}
