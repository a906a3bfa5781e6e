//! Graded polynomial vector fields without constant or linear part.
//!
//! A term `c x^n d/dx_j` has grade `|n| - 1`; fields are truncated at a
//! fixed grade `order`. The diagonal linear part `X0 = sum lambda_i x_i d/dx_i`
//! is kept separately as a [`Spectrum`], and `d = ad_X0` acts diagonally with
//! eigenvalue `<lambda, n> - lambda_j` on each term.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::coeff::{fmt_rational, Coeff, Rational};
use crate::error::{Error, Result};
use crate::series::{Monomial, Series};

/// Basis element `x^mono d/dx_dir` of the Lie algebra.
///
/// Ordered by (grade, exponents, direction).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldKey {
    pub mono: Monomial,
    pub dir: usize,
}

impl FieldKey {
    pub fn new(mono: Monomial, dir: usize) -> Self {
        FieldKey { mono, dir }
    }

    pub fn grade(&self) -> usize {
        self.mono.degree() - 1
    }
}

/// Diagonal spectrum of the linear part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spectrum(pub Vec<Rational>);

impl Spectrum {
    pub fn new(lambda: Vec<Rational>) -> Self {
        Spectrum(lambda)
    }

    pub fn nu(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    /// Eigenvalue of `ad_X0` on `x^n d/dx_j`.
    pub fn eigenvalue(&self, n: &Monomial, j: usize) -> Rational {
        ad_eigenvalue(self, n, j)
    }

    /// `X0 . A` for the linear field `X0 = sum lambda_i x_i d/dx_i`.
    pub fn apply_linear(&self, a: &Series) -> Series {
        a.map_coeffs(|m, c| c.scale(&m.weight(&self.0)))
    }
}

/// `<lambda, n> - lambda_j`.
pub fn ad_eigenvalue(lambda: &Spectrum, n: &Monomial, j: usize) -> Rational {
    n.weight(&lambda.0) - &lambda.0[j]
}

/// Every basis element of grade `1..=order` on which `ad_X0` vanishes.
pub fn resonant_set(lambda: &Spectrum, order: usize) -> Vec<(Monomial, usize)> {
    let nu = lambda.nu();
    let mut out = Vec::new();
    for m in Monomial::enumerate(nu, 2, order + 1) {
        for j in 0..nu {
            if ad_eigenvalue(lambda, &m, j).is_zero() {
                out.push((m, j));
            }
        }
    }
    out
}

/// Element of the graded Lie algebra of vector fields, truncated at grade `order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    nu: usize,
    order: usize,
    terms: BTreeMap<FieldKey, Coeff>,
}

impl VectorField {
    pub fn zero(nu: usize, order: usize) -> Self {
        VectorField {
            nu,
            order,
            terms: BTreeMap::new(),
        }
    }

    /// Single term `c x^mono d/dx_dir`.
    pub fn term(nu: usize, order: usize, mono: Monomial, dir: usize, c: Coeff) -> Result<Self> {
        let mut v = VectorField::zero(nu, order);
        v.add_term(mono, dir, c)?;
        Ok(v)
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> &BTreeMap<FieldKey, Coeff> {
        &self.terms
    }

    pub fn coeff(&self, mono: &Monomial, dir: usize) -> Coeff {
        self.terms
            .get(&FieldKey::new(*mono, dir))
            .cloned()
            .unwrap_or_default()
    }

    /// Adds `c x^mono d/dx_dir`; grades above `order` are dropped.
    pub fn add_term(&mut self, mono: Monomial, dir: usize, c: Coeff) -> Result<()> {
        if mono.degree() < 2 {
            return Err(Error::LowDegree(mono.degree()));
        }
        if dir >= self.nu {
            return Err(Error::DimensionMismatch(format!(
                "direction {} in dimension {}",
                dir, self.nu
            )));
        }
        self.insert(FieldKey::new(mono, dir), c);
        Ok(())
    }

    fn insert(&mut self, key: FieldKey, c: Coeff) {
        if key.mono.degree() > self.order + 1 || c.is_exact_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(old) => {
                let s = &*old + &c;
                if s.is_exact_zero() {
                    self.terms.remove(&key);
                } else {
                    *old = s;
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    /// True when no term is stored with a nonzero value.
    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.is_zero())
    }

    pub fn check_compatible(&self, other: &VectorField) -> Result<()> {
        if self.nu != other.nu || self.order != other.order {
            return Err(Error::DimensionMismatch(format!(
                "fields of (nu, order) = ({}, {}) and ({}, {})",
                self.nu, self.order, other.nu, other.order
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.insert(*k, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.insert(*k, -c);
        }
        out
    }

    pub fn neg(&self) -> VectorField {
        self.map_terms(|_, c| -c)
    }

    pub fn scale(&self, c: &Coeff) -> VectorField {
        self.map_terms(|_, a| a * c)
    }

    pub fn scale_rat(&self, r: &Rational) -> VectorField {
        self.map_terms(|_, a| a.scale(r))
    }

    /// Applies `f` to every coefficient; exact zeros are dropped.
    pub fn map_terms(&self, mut f: impl FnMut(&FieldKey, &Coeff) -> Coeff) -> VectorField {
        let mut out = VectorField::zero(self.nu, self.order);
        for (k, c) in &self.terms {
            out.insert(*k, f(k, c));
        }
        out
    }

    /// Fallible variant of [`map_terms`](Self::map_terms).
    pub fn try_map_terms(
        &self,
        mut f: impl FnMut(&FieldKey, &Coeff) -> Result<Coeff>,
    ) -> Result<VectorField> {
        let mut out = VectorField::zero(self.nu, self.order);
        for (k, c) in &self.terms {
            out.insert(*k, f(k, c)?);
        }
        Ok(out)
    }

    /// Keeps the terms satisfying `pred`.
    pub fn filter(&self, mut pred: impl FnMut(&FieldKey, &Coeff) -> bool) -> VectorField {
        VectorField {
            nu: self.nu,
            order: self.order,
            terms: self
                .terms
                .iter()
                .filter(|(k, c)| pred(k, c))
                .map(|(k, c)| (*k, c.clone()))
                .collect(),
        }
    }

    /// Homogeneous component of grade `g`.
    pub fn grade_part(&self, g: usize) -> VectorField {
        self.filter(|k, _| k.grade() == g)
    }

    /// Components of grade `< g`.
    pub fn below_grade(&self, g: usize) -> VectorField {
        self.filter(|k, _| k.grade() < g)
    }

    /// Same field with a new truncation order.
    pub fn with_order(&self, order: usize) -> VectorField {
        let mut out = VectorField::zero(self.nu, order);
        for (k, c) in &self.terms {
            out.insert(*k, c.clone());
        }
        out
    }

    /// Lie bracket `[self, other] = self*other - other*self` as operators.
    pub fn bracket(&self, other: &VectorField) -> Result<VectorField> {
        self.check_compatible(other)?;
        Ok(self.lie(other))
    }

    /// Bracket without the compatibility check; the result keeps `self`'s order.
    pub(crate) fn lie(&self, other: &VectorField) -> VectorField {
        let mut out = VectorField::zero(self.nu, self.order);
        let top = self.order + 1;
        // [a x^m d_i, b x^n d_j] = ab (n_i x^(m+n-e_i) d_j - m_j x^(m+n-e_j) d_i)
        for (ka, ca) in &self.terms {
            let da = ka.mono.degree();
            for (kb, cb) in &other.terms {
                if da + kb.mono.degree() - 1 > top {
                    break;
                }
                let i = ka.dir;
                let j = kb.dir;
                let prod = kb.mono.mul(&ka.mono);
                let ni = kb.mono.exp(i);
                let mj = ka.mono.exp(j);
                if ni == 0 && mj == 0 {
                    continue;
                }
                let ab = ca * cb;
                if ni != 0 {
                    let m = prod.div_var(i).unwrap();
                    out.insert(
                        FieldKey::new(m, j),
                        ab.scale(&Rational::from_integer((ni as i64).into())),
                    );
                }
                if mj != 0 {
                    let m = prod.div_var(j).unwrap();
                    out.insert(
                        FieldKey::new(m, i),
                        ab.scale(&Rational::from_integer((-(mj as i64)).into())),
                    );
                }
            }
        }
        out
    }

    /// Derivation action `sum_j f_j dA/dx_j`, truncated at `A`'s degree bound.
    pub fn apply(&self, a: &Series) -> Series {
        let mut out = Series::zero(a.nu(), a.max_deg());
        for (k, c) in &self.terms {
            let grade = k.grade();
            for (m, ca) in a.terms() {
                if m.degree() + grade > a.max_deg() {
                    break;
                }
                let e = m.exp(k.dir);
                if e == 0 {
                    continue;
                }
                let mono = m.div_var(k.dir).unwrap().mul(&k.mono);
                out.add_term(
                    mono,
                    (c * ca).scale(&Rational::from_integer((e as i64).into())),
                );
            }
        }
        out
    }

    /// Coordinate components `f_i = X . x_i` as series truncated at degree `order + 1`.
    pub fn components(&self) -> Vec<Series> {
        let mut comps = vec![Series::zero(self.nu, self.order + 1); self.nu];
        for (k, c) in &self.terms {
            comps[k.dir].add_term(k.mono, c.clone());
        }
        comps
    }

    /// Field with the given coordinate components; degrees below 2 must vanish.
    pub fn from_components(comps: &[Series], order: usize) -> Result<VectorField> {
        let nu = comps.len();
        let mut out = VectorField::zero(nu, order);
        for (j, s) in comps.iter().enumerate() {
            for (m, c) in s.terms() {
                if m.degree() < 2 {
                    if c.is_zero() {
                        continue;
                    }
                    return Err(Error::LowDegree(m.degree()));
                }
                out.insert(FieldKey::new(*m, j), c.clone());
            }
        }
        Ok(out)
    }

    /// Agreement on every term up to each coefficient's validity.
    pub fn agrees_with(&self, other: &VectorField) -> bool {
        self.first_disagreement(other).is_none()
    }

    pub fn first_disagreement(&self, other: &VectorField) -> Option<FieldKey> {
        let zero = Coeff::zero();
        let keys: std::collections::BTreeSet<&FieldKey> =
            self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter()
            .find(|k| {
                let a = self.terms.get(k).unwrap_or(&zero);
                let b = other.terms.get(k).unwrap_or(&zero);
                !a.agrees_with(b)
            })
            .copied()
    }

    /// Smallest validity over all coefficients.
    pub fn validity(&self) -> i32 {
        self.terms
            .values()
            .map(|c| c.validity())
            .min()
            .unwrap_or(crate::coeff::EXACT)
    }

    /// Canonical rendering, one `c * x^a * y^b d/dx` string per term.
    pub fn render(&self, names: &[String]) -> Vec<String> {
        self.terms
            .iter()
            .map(|(k, c)| {
                format!(
                    "{} * {} d/d{}",
                    render_coeff(c),
                    k.mono.render(names),
                    names[k.dir]
                )
            })
            .collect()
    }
}

/// Basis element rendered without coefficient, e.g. `y^2 d/dy`.
pub fn render_basis(m: &Monomial, dir: usize, names: &[String]) -> String {
    format!("{} d/d{}", m.render(names), names[dir])
}

/// Plain rational, or a parenthesized coefficient expression.
pub fn render_coeff(c: &Coeff) -> String {
    match c.as_rational() {
        Some(r) => fmt_rational(&r),
        None => format!("({})", c),
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = crate::series::default_names(self.nu);
        let t = self.render(&names);
        if t.is_empty() {
            write!(f, "0")
        } else {
            let mut s = t.join(" + ");
            s = s.replace("+ -", "- ");
            write!(f, "{}", s)
        }
    }
}

/// Sign-aware helper used by tests and reports.
pub fn is_nonnegative(r: &Rational) -> bool {
    !r.is_negative()
}
