//! Sparse multivariate polynomials with a graded-lex monomial order.

use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, Rational, Scalar};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

/// Exponent vector. Ordered by total degree, then lexicographically with
/// earlier variables first (`1 < x < y < x² < xy < y² …` for vars `x, y`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn eval<T: Scalar>(&self, point: &[T]) -> T {
        self.0
            .iter()
            .zip(point)
            .fold(T::one(), |acc, (&e, x)| acc * x.pow_u(e))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Every monomial in `nvars` variables of degree at most `d`, ascending.
pub fn monomials_up_to(nvars: usize, d: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; nvars];
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if i == cur.len() {
            out.push(Monomial(cur.clone()));
            return;
        }
        for e in 0..=left {
            cur[i] = e;
            rec(i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, d, &mut cur, &mut out);
    out.sort();
    out
}

pub type Vars = Arc<Vec<String>>;

pub fn vars(names: &[&str]) -> Vars {
    Arc::new(names.iter().map(|s| s.to_string()).collect())
}

/// Sparse polynomial; zero coefficients are never stored.
#[derive(Clone, PartialEq)]
pub struct Polynomial<T = Rational> {
    vars: Vars,
    terms: BTreeMap<Monomial, T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn zero(vars: &Vars) -> Self {
        Polynomial {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &Vars, c: T) -> Self {
        Self::monomial(vars, Monomial::one(vars.len()), c)
    }

    pub fn var(vars: &Vars, i: usize) -> Self {
        Self::monomial(vars, Monomial::var(vars.len(), i), T::one())
    }

    pub fn monomial(vars: &Vars, m: Monomial, c: T) -> Self {
        assert_eq!(m.0.len(), vars.len(), "exponent vector length");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial {
            vars: vars.clone(),
            terms,
        }
    }

    pub fn from_terms(vars: &Vars, terms: impl IntoIterator<Item = (Monomial, T)>) -> Self {
        let mut p = Self::zero(vars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &T)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> T {
        self.terms.get(m).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, m: Monomial, c: T) {
        assert_eq!(m.0.len(), self.vars.len(), "exponent vector length");
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v = v.clone() + c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        if c.is_zero() {
            return Self::zero(&self.vars);
        }
        Polynomial {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v.clone() * c.clone()))
                .collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(k, v)| (k.mul(m), v.clone())).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::constant(&self.vars, T::one()), |acc, _| &acc * self)
    }

    pub fn eval(&self, point: &[T]) -> T {
        self.terms
            .iter()
            .fold(T::zero(), |acc, (m, c)| acc + c.clone() * m.eval(point))
    }

    /// Replace each variable `i` by `subs[i]` (polynomials over `target`).
    pub fn substitute(&self, subs: &[Polynomial<T>], target: &Vars) -> Polynomial<T> {
        assert_eq!(subs.len(), self.vars.len(), "one substitute per variable");
        let mut out = Polynomial::zero(target);
        for (m, c) in &self.terms {
            let mut term = Polynomial::constant(target, c.clone());
            for (e, s) in m.0.iter().zip(subs) {
                if *e > 0 {
                    term = &term * &s.pow(*e);
                }
            }
            out = &out + &term;
        }
        out
    }

    /// Same coefficients over a different (equal-length) variable list.
    pub fn rename(&self, target: &Vars) -> Result<Self> {
        if target.len() != self.vars.len() {
            return Err(Error::DimensionMismatch {
                left: target.len(),
                right: self.vars.len(),
            });
        }
        Ok(Polynomial {
            vars: target.clone(),
            terms: self.terms.clone(),
        })
    }

    pub fn map_coeffs<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Polynomial<U> {
        Polynomial::from_terms(&self.vars, self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    fn check_vars(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars,
            "polynomials over different variables: {:?} vs {:?}",
            self.vars,
            other.vars
        );
    }
}

impl<'a, T: Scalar> Add<&'a Polynomial<T>> for &'a Polynomial<T> {
    type Output = Polynomial<T>;
    fn add(self, rhs: &Polynomial<T>) -> Polynomial<T> {
        self.check_vars(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a, T: Scalar> Sub<&'a Polynomial<T>> for &'a Polynomial<T> {
    type Output = Polynomial<T>;
    fn sub(self, rhs: &Polynomial<T>) -> Polynomial<T> {
        self.check_vars(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<'a, T: Scalar> Mul<&'a Polynomial<T>> for &'a Polynomial<T> {
    type Output = Polynomial<T>;
    fn mul(self, rhs: &Polynomial<T>) -> Polynomial<T> {
        self.check_vars(rhs);
        let mut out = Polynomial::zero(&self.vars);
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.add_term(a.mul(b), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<T: Scalar> Neg for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn neg(self) -> Polynomial<T> {
        self.scale(&-T::one())
    }
}

impl<T: Scalar> fmt::Debug for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<T: Scalar> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let body: Vec<String> = m
                .0
                .iter()
                .zip(self.vars.iter())
                .filter(|(e, _)| **e > 0)
                .map(|(e, v)| if *e == 1 { v.clone() } else { format!("{v}^{e}") })
                .collect();
            let unit = mag.is_one();
            match (unit, body.is_empty()) {
                (true, true) => write!(f, "1")?,
                (true, false) => write!(f, "{}", body.join("*"))?,
                (false, true) => write!(f, "{}", mag.render())?,
                (false, false) => write!(f, "{}*{}", mag.render(), body.join("*"))?,
            }
        }
        Ok(())
    }
}

impl Polynomial<Rational> {
    /// `[[exponents, "p/q"], …]`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.terms
                .iter()
                .map(|(m, c)| serde_json::json!([m.0, format_rational(c)]))
                .collect(),
        )
    }

    pub fn from_json(vars: &Vars, v: &serde_json::Value) -> Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Parse("polynomial must be an array of terms".into()))?;
        let mut p = Polynomial::zero(vars);
        for t in arr {
            let pair = t
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::Parse("term must be [exponents, coefficient]".into()))?;
            let exps: Vec<u32> = serde_json::from_value(pair[0].clone())
                .map_err(|e| Error::Parse(format!("exponent vector: {e}")))?;
            if exps.len() != vars.len() {
                return Err(Error::Parse(format!(
                    "exponent vector {exps:?} has length {}, expected {}",
                    exps.len(),
                    vars.len()
                )));
            }
            let c = match &pair[1] {
                serde_json::Value::String(s) => parse_rational(s)?,
                serde_json::Value::Number(n) => parse_rational(&n.to_string())?,
                other => return Err(Error::Parse(format!("bad coefficient {other}"))),
            };
            p.add_term(Monomial(exps), c);
        }
        Ok(p)
    }

    /// Parses `+ - * ^ ( )` expressions over the given variables, with
    /// integer, decimal and `p/q` constants.
    pub fn parse(vars: &Vars, src: &str) -> Result<Self> {
        let mut p = Parser {
            vars,
            chars: src.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
        };
        let out = p.expr()?;
        if p.pos != p.chars.len() {
            return Err(Error::Parse(format!(
                "unexpected '{}' at offset {} in {src:?}",
                p.chars[p.pos], p.pos
            )));
        }
        Ok(out)
    }
}

struct Parser<'a> {
    vars: &'a Vars,
    chars: Vec<char>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            if c == '+' || c == '-' {
                self.pos += 1;
                let t = self.term()?;
                acc = if c == '+' { &acc + &t } else { &acc - &t };
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        while let Some(c) = self.peek() {
            match c {
                '*' => {
                    self.pos += 1;
                    let f = self.unary()?;
                    acc = &acc * &f;
                }
                '/' => {
                    self.pos += 1;
                    let d = self.number()?;
                    if d == Rational::from_int(0) {
                        return Err(Error::Parse("division by zero".into()));
                    }
                    acc = acc.scale(&(Rational::from_int(1) / d));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial> {
        if self.peek() == Some('-') {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(-&inner);
        }
        if self.peek() == Some('+') {
            self.pos += 1;
        }
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let e = self.number()?;
            if !e.is_integer() || e < Rational::from_int(0) {
                return Err(Error::Parse(format!("exponent {e} must be a nonnegative integer")));
            }
            let e: u32 = e
                .to_integer()
                .try_into()
                .map_err(|_| Error::Parse("exponent too large".into()))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn number(&mut self) -> Result<Rational> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || c == '.' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if start == self.pos {
            return Err(Error::Parse(format!("expected a number at offset {start}")));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        parse_rational(&s)
    }

    fn atom(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(Error::Parse("missing ')'".into()));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let v = self.number()?;
                Ok(Polynomial::constant(self.vars, v))
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                let start = self.pos;
                while let Some(c) = self.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                let i = self
                    .vars
                    .iter()
                    .position(|v| *v == name)
                    .ok_or_else(|| Error::Parse(format!("unknown variable '{name}'")))?;
                Ok(Polynomial::var(self.vars, i))
            }
            other => Err(Error::Parse(format!("unexpected {other:?} at offset {}", self.pos))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> Rational {
        Rational::from_ratio(a, b)
    }

    #[test]
    fn order_is_graded_lex() {
        let ms = monomials_up_to(2, 2);
        let exps: Vec<Vec<u32>> = ms.into_iter().map(|m| m.0).collect();
        assert_eq!(
            exps,
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]
        );
    }

    #[test]
    fn arithmetic_and_parse() {
        let v = vars(&["y"]);
        let p = Polynomial::parse(&v, "(1-y)*(1+y)").unwrap();
        let q2 = Polynomial::parse(&v, "1 - y^2").unwrap();
        assert_eq!(p, q2);
        let half = Polynomial::parse(&v, "y/2 + 3/4").unwrap();
        assert_eq!(half.coeff(&Monomial(vec![1])), q(1, 2));
        assert_eq!(half.coeff(&Monomial(vec![0])), q(3, 4));
        assert_eq!((&p - &q2).degree(), 0);
        assert!((&p - &q2).is_zero());
        assert!(Polynomial::parse(&v, "x+1").is_err());
        assert_eq!(p.to_string(), "1 - y^2");
    }

    #[test]
    fn json_roundtrip() {
        let v = vars(&["x", "y"]);
        let p = Polynomial::parse(&v, "x^2*y - 3/7*y + 2").unwrap();
        let back = Polynomial::from_json(&v, &p.to_json()).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn substitution() {
        let v = vars(&["y"]);
        let w = vars(&["a", "b"]);
        let p = Polynomial::parse(&v, "1 - y^2").unwrap();
        let s = Polynomial::parse(&w, "a/2 + b/2").unwrap();
        let r = p.substitute(&[s], &w);
        assert_eq!(r, Polynomial::parse(&w, "1 - a^2/4 - a*b/2 - b^2/4").unwrap());
    }
}
