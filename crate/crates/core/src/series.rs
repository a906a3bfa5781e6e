//! Truncated multivariate polynomial series over [`Coeff`].

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::coeff::{Coeff, Rational};
use crate::error::{Error, Result};

/// Maximum number of variables.
pub const MAX_VARS: usize = 8;

/// Exponent vector `x1^n1 ... x_nu^n_nu`; unused slots are zero.
///
/// Ordered by total degree first, then lexicographically on the exponents.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: [u8; MAX_VARS],
}

impl Monomial {
    pub fn one() -> Self {
        Monomial {
            exps: [0; MAX_VARS],
        }
    }

    pub fn var(i: usize) -> Self {
        let mut m = Monomial::one();
        m.exps[i] = 1;
        m
    }

    pub fn new(exps: &[u32]) -> Result<Self> {
        if exps.len() > MAX_VARS {
            return Err(Error::TooManyVariables(exps.len()));
        }
        let mut m = Monomial::one();
        for (i, &e) in exps.iter().enumerate() {
            m.exps[i] = u8::try_from(e)
                .map_err(|_| Error::DimensionMismatch(format!("exponent {} too large", e)))?;
        }
        Ok(m)
    }

    pub fn exp(&self, i: usize) -> u32 {
        self.exps[i] as u32
    }

    pub fn exps(&self, nu: usize) -> &[u8] {
        &self.exps[..nu]
    }

    pub fn degree(&self) -> usize {
        self.exps.iter().map(|&e| e as usize).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut m = *self;
        for i in 0..MAX_VARS {
            m.exps[i] += other.exps[i];
        }
        m
    }

    /// Divides by `x_i`; `None` if `x_i` does not divide.
    pub fn div_var(&self, i: usize) -> Option<Monomial> {
        if self.exps[i] == 0 {
            return None;
        }
        let mut m = *self;
        m.exps[i] -= 1;
        Some(m)
    }

    /// `<w, n>` for a weight vector `w`.
    pub fn weight(&self, w: &[Rational]) -> Rational {
        let mut acc = Rational::from_integer(0.into());
        for (i, wi) in w.iter().enumerate() {
            if self.exps[i] != 0 {
                acc += wi * Rational::from_integer((self.exps[i] as i64).into());
            }
        }
        acc
    }

    /// All monomials in `nu` variables with `lo <= degree <= hi`, in canonical order.
    pub fn enumerate(nu: usize, lo: usize, hi: usize) -> Vec<Monomial> {
        let mut out = Vec::new();
        for d in lo..=hi {
            let mut cur = [0u8; MAX_VARS];
            fill(nu, 0, d, &mut cur, &mut out);
        }
        out.sort();
        out
    }

    /// Renders with the given variable names, e.g. `x^2 * y`.
    pub fn render(&self, names: &[String]) -> String {
        let mut parts = Vec::new();
        for (i, n) in names.iter().enumerate() {
            match self.exps[i] {
                0 => {}
                1 => parts.push(n.clone()),
                e => parts.push(format!("{}^{}", n, e)),
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join(" * ")
        }
    }
}

fn fill(nu: usize, i: usize, left: usize, cur: &mut [u8; MAX_VARS], out: &mut Vec<Monomial>) {
    if nu == 0 {
        if left == 0 {
            out.push(Monomial { exps: *cur });
        }
        return;
    }
    if i == nu - 1 {
        cur[i] = left as u8;
        out.push(Monomial { exps: *cur });
        cur[i] = 0;
        return;
    }
    for e in 0..=left {
        cur[i] = e as u8;
        fill(nu, i + 1, left - e, cur, out);
    }
    cur[i] = 0;
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.exps.iter().rposition(|&e| e != 0).map_or(0, |p| p + 1);
        write!(f, "x{:?}", &self.exps[..last])
    }
}

/// Default variable names `x1, x2, ...`.
pub fn default_names(nu: usize) -> Vec<String> {
    (1..=nu).map(|i| format!("x{}", i)).collect()
}

/// Polynomial in `nu` variables truncated above total degree `max_deg`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    nu: usize,
    max_deg: usize,
    terms: BTreeMap<Monomial, Coeff>,
}

impl Series {
    pub fn zero(nu: usize, max_deg: usize) -> Self {
        Series {
            nu,
            max_deg,
            terms: BTreeMap::new(),
        }
    }

    pub fn var(nu: usize, max_deg: usize, i: usize) -> Self {
        let mut s = Series::zero(nu, max_deg);
        s.add_term(Monomial::var(i), Coeff::one());
        s
    }

    pub fn monomial(nu: usize, max_deg: usize, m: Monomial, c: Coeff) -> Self {
        let mut s = Series::zero(nu, max_deg);
        s.add_term(m, c);
        s
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn max_deg(&self) -> usize {
        self.max_deg
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Coeff> {
        &self.terms
    }

    pub fn coeff(&self, m: &Monomial) -> Coeff {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// Adds `c * m`, dropping it if beyond the truncation. Exact zeros are not stored.
    pub fn add_term(&mut self, m: Monomial, c: Coeff) {
        if m.degree() > self.max_deg || c.is_exact_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(old) => {
                let s = &*old + &c;
                if s.is_exact_zero() {
                    self.terms.remove(&m);
                } else {
                    *old = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.is_zero())
    }

    /// Lowest degree carrying a stored term.
    pub fn valuation(&self) -> Option<usize> {
        self.terms.keys().next().map(|m| m.degree())
    }

    pub fn add(&self, other: &Series) -> Series {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Series) -> Series {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, -c);
        }
        out
    }

    pub fn scale(&self, c: &Coeff) -> Series {
        let mut out = Series::zero(self.nu, self.max_deg);
        for (m, a) in &self.terms {
            out.add_term(*m, a * c);
        }
        out
    }

    pub fn scale_rat(&self, r: &Rational) -> Series {
        let mut out = Series::zero(self.nu, self.max_deg);
        for (m, a) in &self.terms {
            out.add_term(*m, a.scale(r));
        }
        out
    }

    pub fn mul(&self, other: &Series) -> Series {
        let mut out = Series::zero(self.nu, self.max_deg.min(other.max_deg));
        for (ma, ca) in &self.terms {
            let da = ma.degree();
            for (mb, cb) in &other.terms {
                if da + mb.degree() > out.max_deg {
                    break;
                }
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    /// Partial derivative in `x_i`.
    pub fn deriv(&self, i: usize) -> Series {
        let mut out = Series::zero(self.nu, self.max_deg);
        for (m, c) in &self.terms {
            if let Some(d) = m.div_var(i) {
                out.add_term(d, c.scale(&Rational::from_integer((m.exp(i) as i64).into())));
            }
        }
        out
    }

    /// Homogeneous part of degree `d`.
    pub fn degree_part(&self, d: usize) -> Series {
        let mut out = Series::zero(self.nu, self.max_deg);
        for (m, c) in self.terms.range(..) {
            if m.degree() == d {
                out.terms.insert(*m, c.clone());
            }
        }
        out
    }

    /// Same series with a different truncation.
    pub fn with_max_deg(&self, max_deg: usize) -> Series {
        let mut out = Series::zero(self.nu, max_deg);
        for (m, c) in &self.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn map_coeffs(&self, mut f: impl FnMut(&Monomial, &Coeff) -> Coeff) -> Series {
        let mut out = Series::zero(self.nu, self.max_deg);
        for (m, c) in &self.terms {
            out.add_term(*m, f(m, c));
        }
        out
    }

    /// Substitutes `x_i -> images[i]`; every image must have no constant term.
    pub fn substitute(&self, images: &[Series]) -> Series {
        let mut cache = PowerCache::new(images, self.max_deg);
        self.substitute_cached(&mut cache)
    }

    pub(crate) fn substitute_cached(&self, cache: &mut PowerCache<'_>) -> Series {
        let mut out = Series::zero(self.nu, self.max_deg.min(cache.max_deg));
        for (m, c) in &self.terms {
            let img = cache.monomial(m);
            for (mm, cc) in &img.terms {
                out.add_term(*mm, cc * c);
            }
        }
        out
    }

    /// Structural agreement up to each coefficient's validity.
    pub fn agrees_with(&self, other: &Series) -> bool {
        self.first_disagreement(other).is_none()
    }

    pub fn first_disagreement(&self, other: &Series) -> Option<Monomial> {
        let zero = Coeff::zero();
        let keys: std::collections::BTreeSet<&Monomial> =
            self.terms.keys().chain(other.terms.keys()).collect();
        for m in keys {
            let a = self.terms.get(m).unwrap_or(&zero);
            let b = other.terms.get(m).unwrap_or(&zero);
            if !a.agrees_with(b) {
                return Some(*m);
            }
        }
        None
    }

    /// Renders as `c * x^a * y^b + ...` with the given names.
    pub fn render(&self, names: &[String]) -> Vec<String> {
        self.terms
            .iter()
            .map(|(m, c)| format!("{} * {}", crate::vfield::render_coeff(c), m.render(names)))
            .collect()
    }
}

/// Memoized images of monomials under a substitution.
pub(crate) struct PowerCache<'a> {
    images: &'a [Series],
    max_deg: usize,
    memo: HashMap<Monomial, Series>,
}

impl<'a> PowerCache<'a> {
    pub(crate) fn new(images: &'a [Series], max_deg: usize) -> Self {
        PowerCache {
            images,
            max_deg,
            memo: HashMap::new(),
        }
    }

    fn monomial(&mut self, m: &Monomial) -> Series {
        if let Some(s) = self.memo.get(m) {
            return s.clone();
        }
        let nu = self.images.first().map_or(0, |s| s.nu);
        let val = match (0..MAX_VARS).find(|&i| m.exps[i] != 0) {
            None => Series::monomial(nu, self.max_deg, Monomial::one(), Coeff::one()),
            Some(i) => {
                let rest = m.div_var(i).unwrap();
                let r = self.monomial(&rest);
                r.mul(&self.images[i].with_max_deg(self.max_deg))
            }
        };
        self.memo.insert(*m, val.clone());
        val
    }
}
