//! Line-oriented problem files.
//!
//! ```text
//! vars: x y
//! lambda: 1 0
//! delta: grading
//! order: 8
//! eps-order: 10
//! tau-order: 3
//! field:
//!   2 * y^2 d/dy
//!   3 * x * y^2 d/dy
//! ```
//!
//! Coefficients are integers or `p/q`; a parenthesized expression such as
//! `(2*e^-1 + 3 + O(e^4))` gives a Laurent coefficient in `e`. An optional
//! `aux: t 3` line declares auxiliary parameters with their truncation.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::coeff::{fmt_rational, AuxParam, AuxSpec, Coeff, Key, Rational, EXACT};
use crate::error::{Error, Result};
use crate::regularize::{Diagonal, Scheme};
use crate::series::{Monomial, MAX_VARS};
use crate::vfield::{render_coeff, FieldKey, Spectrum, VectorField};

/// The `delta:` line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeltaSpec {
    Grading,
    Diag(Vec<Rational>),
}

/// Parsed problem: scheme data and the nonlinear field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemFile {
    pub vars: Vec<String>,
    pub lambda: Vec<Rational>,
    pub delta: DeltaSpec,
    pub aux: Option<AuxSpec>,
    pub order: usize,
    pub eps_order: Option<i32>,
    pub tau_order: Option<u8>,
    /// Terms in canonical (grade, exponents, direction) order.
    pub field: BTreeMap<FieldKey, Coeff>,
}

impl ProblemFile {
    pub fn scheme(&self) -> Scheme {
        let delta = match &self.delta {
            DeltaSpec::Grading => Diagonal::Grading,
            DeltaSpec::Diag(mu) => Diagonal::Ad(Spectrum::new(mu.clone())),
        };
        let mut s = Scheme::new(Spectrum::new(self.lambda.clone()), delta, self.order);
        if let Some(k) = self.eps_order {
            s = s.with_eps_order(k);
        }
        if let Some(t) = self.tau_order {
            s = s.with_tau_order(t);
        }
        s
    }

    /// The field truncated at the problem's order.
    pub fn vector_field(&self) -> VectorField {
        let mut u = VectorField::zero(self.vars.len(), self.order);
        for (k, c) in &self.field {
            u.add_term(k.mono, k.dir, c.clone())
                .expect("terms are checked at parse time");
        }
        u
    }
}

fn perr(line: usize, col: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col,
        message: message.into(),
    }
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col0: usize,
    vars: &'a [String],
    aux: Option<&'a AuxSpec>,
}

impl<'a> Cursor<'a> {
    fn new(text: &str, line: usize, col0: usize, vars: &'a [String], aux: Option<&'a AuxSpec>) -> Self {
        Cursor {
            chars: text.chars().collect(),
            pos: 0,
            line,
            col0,
            vars,
            aux,
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        perr(self.line, self.col0 + self.pos + 1, message)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{}`", c)))
        }
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn digits(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        Ok(s.parse().expect("ascii digits"))
    }

    fn rational(&mut self) -> Result<Rational> {
        let neg = self.eat('-');
        let num = self.digits()?;
        let den = if self.eat('/') {
            let at = self.pos;
            let d = self.digits()?;
            if d.is_zero() {
                self.pos = at;
                return Err(self.err("zero denominator"));
            }
            d
        } else {
            BigInt::one()
        };
        let r = Rational::new(num, den);
        Ok(if neg { -r } else { r })
    }

    fn int_exponent(&mut self) -> Result<i64> {
        if !self.eat('^') {
            return Ok(1);
        }
        let neg = self.eat('-');
        let at = self.pos;
        let d = self.digits()?;
        let v: i64 = d.try_into().map_err(|_| {
            self.pos = at;
            self.err("exponent too large")
        })?;
        Ok(if neg { -v } else { v })
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len()
            && (self.chars[self.pos].is_ascii_alphanumeric() || self.chars[self.pos] == '_')
        {
            if self.pos == start && self.chars[self.pos].is_ascii_digit() {
                break;
            }
            self.pos += 1;
        }
        (self.pos > start).then(|| self.chars[start..self.pos].iter().collect())
    }

    /// One factor: rational, `(expr)`, `e^k`, aux power, or (outside parens) a variable power.
    fn factor(&mut self, coeff: &mut Coeff, mono: Option<&mut [u32; MAX_VARS]>) -> Result<()> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(')')?;
                *coeff = &*coeff * &inner;
            }
            Some(c) if c.is_ascii_digit() => {
                let r = self.rational()?;
                *coeff = coeff.scale(&r);
            }
            Some(_) => {
                let at = self.pos;
                let name = self.ident().ok_or_else(|| self.err("unexpected character"))?;
                let k = self.int_exponent()?;
                if name == "e" {
                    let k = i32::try_from(k).map_err(|_| self.err("exponent too large"))?;
                    *coeff = &*coeff * &Coeff::eps_pow(k);
                } else if let Some(i) = self.aux.and_then(|s| s.index_of(&name)) {
                    if k < 0 {
                        return Err(self.err("negative power of an auxiliary parameter"));
                    }
                    let spec = self.aux.expect("checked");
                    let mut key = Key::eps(0);
                    key.aux[i] = u8::try_from(k).map_err(|_| self.err("exponent too large"))?;
                    let t = Coeff::from_terms(vec![(key, Rational::one())], EXACT, Some(spec.clone()));
                    *coeff = &*coeff * &t;
                } else if let Some(j) = self.vars.iter().position(|v| *v == name) {
                    let Some(m) = mono else {
                        self.pos = at;
                        return Err(self.err(format!("variable `{}` inside a coefficient", name)));
                    };
                    if k < 0 {
                        return Err(self.err("negative exponent on a variable"));
                    }
                    m[j] += k as u32;
                } else {
                    self.pos = at;
                    return Err(self.err(format!("unknown name `{}`", name)));
                }
            }
            None => return Err(self.err("unexpected end of term")),
        }
        Ok(())
    }

    /// Signed sum of products, with an optional `O(e^k)` tail.
    fn expr(&mut self) -> Result<Coeff> {
        let mut total = match self.aux {
            Some(s) => Coeff::zero().with_aux(s)?,
            None => Coeff::zero(),
        };
        let mut first = true;
        loop {
            let neg = if self.eat('-') {
                true
            } else {
                if !self.eat('+') && !first {
                    break;
                }
                false
            };
            first = false;
            if self.peek() == Some('O') {
                self.pos += 1;
                self.expect('(')?;
                let name = self.ident();
                if name.as_deref() != Some("e") {
                    return Err(self.err("expected `e` in O(...)"));
                }
                let k = self.int_exponent()?;
                self.expect(')')?;
                let v = i32::try_from(k - 1).map_err(|_| self.err("exponent too large"))?;
                total = total.truncate(v);
                continue;
            }
            let mut term = Coeff::one();
            self.factor(&mut term, None)?;
            while self.eat('*') {
                self.factor(&mut term, None)?;
            }
            total = if neg { &total - &term } else { &total + &term };
        }
        Ok(total)
    }
}

/// Parses a standalone coefficient such as `-3/2`, `e^-1` or `2*e^-1 + 3 + O(e^4)`.
pub fn parse_coeff(text: &str, aux: Option<&AuxSpec>) -> Result<Coeff> {
    let mut c = Cursor::new(text, 1, 0, &[], aux);
    let v = c.expr()?;
    if !c.at_end() {
        return Err(c.err("trailing input"));
    }
    Ok(v)
}

/// Parses `COEFF * MONOMIAL d/dVAR`.
fn parse_term(
    text: &str,
    line: usize,
    col0: usize,
    vars: &[String],
    aux: Option<&AuxSpec>,
) -> Result<(Monomial, usize, Coeff)> {
    let trimmed = text.trim_end();
    let split = trimmed
        .rfind(char::is_whitespace)
        .map(|i| i + 1)
        .unwrap_or(0);
    let last = &trimmed[split..];
    let dir_col = col0 + trimmed[..split].chars().count() + 1;
    let Some(dir_name) = last.strip_prefix("d/d") else {
        return Err(perr(line, dir_col, "term must end with `d/dVAR`"));
    };
    let dir = vars
        .iter()
        .position(|v| v == dir_name)
        .ok_or_else(|| perr(line, dir_col, format!("unknown variable `{}`", dir_name)))?;
    let body = &trimmed[..split];
    let mut cur = Cursor::new(body, line, col0, vars, aux);
    if cur.at_end() {
        return Err(cur.err("missing coefficient and monomial"));
    }
    let neg = cur.eat('-');
    let mut coeff = match aux {
        Some(s) => Coeff::one().with_aux(s)?,
        None => Coeff::one(),
    };
    let mut exps = [0u32; MAX_VARS];
    cur.factor(&mut coeff, Some(&mut exps))?;
    while cur.eat('*') {
        cur.factor(&mut coeff, Some(&mut exps))?;
    }
    if !cur.at_end() {
        return Err(cur.err("expected `*` or `d/dVAR`"));
    }
    if neg {
        coeff = -coeff;
    }
    let mono = Monomial::new(&exps[..vars.len()]).map_err(|e| perr(line, col0 + 1, e.to_string()))?;
    if mono.degree() < 2 {
        return Err(perr(
            line,
            col0 + 1,
            format!(
                "field term has degree {}; only degrees >= 2 are allowed",
                mono.degree()
            ),
        ));
    }
    Ok((mono, dir, coeff))
}

fn parse_rationals(text: &str, line: usize, col0: usize) -> Result<Vec<Rational>> {
    let mut cur = Cursor::new(text, line, col0, &[], None);
    let mut out = Vec::new();
    while !cur.at_end() {
        out.push(cur.rational()?);
    }
    Ok(out)
}

fn parse_uint(text: &str, line: usize, col0: usize) -> Result<u64> {
    text.trim()
        .parse()
        .map_err(|_| perr(line, col0 + 1, format!("expected a non-negative integer, got `{}`", text.trim())))
}

fn valid_name(n: &str) -> bool {
    let mut chars = n.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && n != "e"
        && n != "O"
}

/// Parses a problem file.
pub fn parse_problem(text: &str) -> Result<ProblemFile> {
    let mut header: BTreeMap<&str, (usize, usize, String)> = BTreeMap::new();
    let mut terms: Vec<(usize, usize, String)> = Vec::new();
    let mut in_field = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let indented = content.starts_with(char::is_whitespace);
        if in_field && indented {
            let lead = content.len() - content.trim_start().len();
            terms.push((line, lead, content.trim_start().to_string()));
            continue;
        }
        in_field = false;
        let Some(colon) = content.find(':') else {
            return Err(perr(line, 1, "expected `key: value`"));
        };
        let key = content[..colon].trim();
        let value = &content[colon + 1..];
        let vcol = colon + 1;
        let known = ["vars", "lambda", "delta", "aux", "order", "eps-order", "tau-order", "field"];
        let Some(key) = known.iter().find(|k| **k == key) else {
            return Err(perr(line, 1, format!("unknown key `{}`", key)));
        };
        if header.contains_key(key) {
            return Err(perr(line, 1, format!("duplicate key `{}`", key)));
        }
        if *key == "field" {
            in_field = true;
            if !value.trim().is_empty() {
                let lead = vcol + value.len() - value.trim_start().len();
                terms.push((line, lead, value.trim().to_string()));
            }
        }
        header.insert(key, (line, vcol, value.to_string()));
    }

    let need = |k: &str| -> Result<&(usize, usize, String)> {
        header
            .get(k)
            .ok_or_else(|| perr(text.lines().count().max(1), 1, format!("missing `{}:` line", k)))
    };

    let (vl, vc, vtext) = need("vars")?;
    let mut vars: Vec<String> = Vec::new();
    for name in vtext.split_whitespace() {
        let col = vc + vtext.find(name).unwrap_or(0) + 1;
        if !valid_name(name) {
            return Err(perr(*vl, col, format!("invalid variable name `{}`", name)));
        }
        if vars.iter().any(|v| v == name) {
            return Err(perr(*vl, col, format!("duplicate variable `{}`", name)));
        }
        vars.push(name.to_string());
    }
    if vars.is_empty() {
        return Err(perr(*vl, vc + 1, "no variables declared"));
    }
    if vars.len() > MAX_VARS {
        return Err(perr(*vl, vc + 1, Error::TooManyVariables(vars.len()).to_string()));
    }

    let (ll, lc, ltext) = need("lambda")?;
    let lambda = parse_rationals(ltext, *ll, *lc)?;
    if lambda.len() != vars.len() {
        return Err(perr(
            *ll,
            lc + 1,
            format!("lambda has {} entries for {} variables", lambda.len(), vars.len()),
        ));
    }

    let delta = match header.get("delta") {
        None => DeltaSpec::Grading,
        Some((dl, dc, dtext)) => {
            let t = dtext.trim();
            if t == "grading" {
                DeltaSpec::Grading
            } else if let Some(rest) = t.strip_prefix("diag") {
                let off = dc + dtext.find("diag").unwrap_or(0) + 4;
                let mu = parse_rationals(rest, *dl, off)?;
                if mu.len() != vars.len() {
                    return Err(perr(
                        *dl,
                        dc + 1,
                        format!("delta has {} entries for {} variables", mu.len(), vars.len()),
                    ));
                }
                DeltaSpec::Diag(mu)
            } else {
                return Err(perr(*dl, dc + 1, "expected `grading` or `diag ...`"));
            }
        }
    };

    let aux = match header.get("aux") {
        None => None,
        Some((al, ac, atext)) => {
            let toks: Vec<&str> = atext.split_whitespace().collect();
            if !toks.len().is_multiple_of(2) || toks.is_empty() {
                return Err(perr(*al, ac + 1, "expected `NAME ORDER` pairs"));
            }
            let mut params = Vec::new();
            for pair in toks.chunks(2) {
                if !valid_name(pair[0]) || vars.iter().any(|v| v == pair[0]) {
                    return Err(perr(*al, ac + 1, format!("invalid parameter name `{}`", pair[0])));
                }
                let order: u8 = pair[1]
                    .parse()
                    .map_err(|_| perr(*al, ac + 1, format!("invalid order `{}`", pair[1])))?;
                params.push(AuxParam {
                    name: pair[0].to_string(),
                    order,
                });
            }
            Some(AuxSpec::new(params).map_err(|e| perr(*al, ac + 1, e.to_string()))?)
        }
    };

    let (ol, oc, otext) = need("order")?;
    let order = parse_uint(otext, *ol, *oc)? as usize;
    if order == 0 {
        return Err(perr(*ol, oc + 1, "order must be at least 1"));
    }
    let eps_order = match header.get("eps-order") {
        None => None,
        Some((l, c, t)) => Some(
            i32::try_from(parse_uint(t, *l, *c)?).map_err(|_| perr(*l, c + 1, "eps-order too large"))?,
        ),
    };
    let tau_order = match header.get("tau-order") {
        None => None,
        Some((l, c, t)) => Some(
            u8::try_from(parse_uint(t, *l, *c)?).map_err(|_| perr(*l, c + 1, "tau-order too large"))?,
        ),
    };
    need("field")?;

    let mut field: BTreeMap<FieldKey, Coeff> = BTreeMap::new();
    for (line, col0, t) in &terms {
        let (m, j, c) = parse_term(t, *line, *col0, &vars, aux.as_ref())?;
        let key = FieldKey::new(m, j);
        let sum = match field.remove(&key) {
            Some(old) => &old + &c,
            None => c,
        };
        if !sum.is_exact_zero() {
            field.insert(key, sum);
        }
    }

    Ok(ProblemFile {
        vars,
        lambda,
        delta,
        aux,
        order,
        eps_order,
        tau_order,
        field,
    })
}

/// Canonical text of a problem; [`parse_problem`] reads it back unchanged.
pub fn serialize(p: &ProblemFile) -> String {
    let mut out = String::new();
    let rats = |v: &[Rational]| v.iter().map(fmt_rational).collect::<Vec<_>>().join(" ");
    writeln!(out, "vars: {}", p.vars.join(" ")).unwrap();
    writeln!(out, "lambda: {}", rats(&p.lambda)).unwrap();
    match &p.delta {
        DeltaSpec::Grading => writeln!(out, "delta: grading").unwrap(),
        DeltaSpec::Diag(mu) => writeln!(out, "delta: diag {}", rats(mu)).unwrap(),
    }
    if let Some(spec) = &p.aux {
        let parts: Vec<String> = spec
            .params()
            .iter()
            .map(|a| format!("{} {}", a.name, a.order))
            .collect();
        writeln!(out, "aux: {}", parts.join(" ")).unwrap();
    }
    writeln!(out, "order: {}", p.order).unwrap();
    if let Some(k) = p.eps_order {
        writeln!(out, "eps-order: {}", k).unwrap();
    }
    if let Some(t) = p.tau_order {
        writeln!(out, "tau-order: {}", t).unwrap();
    }
    writeln!(out, "field:").unwrap();
    for (k, c) in &p.field {
        writeln!(
            out,
            "  {} * {} d/d{}",
            render_coeff(c),
            k.mono.render(&p.vars),
            p.vars[k.dir]
        )
        .unwrap();
    }
    out
}
