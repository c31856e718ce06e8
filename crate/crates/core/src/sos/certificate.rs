//! Degree-`d` SoS certificates: exact verification, composition and JSON.

use super::closure::{closure_e, closure_g, product, ConstraintSet};
use super::poly::{Monomial, Polynomial, Vars};
use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, Rational};
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

/// `α · m · p_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct EqTerm {
    pub constraint: usize,
    pub multiplier: Monomial,
    pub coeff: Rational,
}

/// `(Σ_k w_k s_k²) · Π q_i^{a_i}` with every `w_k ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct IneqTerm {
    pub exponents: Vec<u32>,
    pub squares: Vec<Polynomial>,
    pub weights: Vec<Rational>,
}

impl IneqTerm {
    pub fn unit(exponents: Vec<u32>, squares: Vec<Polynomial>) -> Self {
        let weights = vec![Rational::one(); squares.len()];
        IneqTerm {
            exponents,
            squares,
            weights,
        }
    }

    pub fn weighted(exponents: Vec<u32>, pairs: Vec<(Rational, Polynomial)>) -> Self {
        let (weights, squares) = pairs.into_iter().unzip();
        IneqTerm {
            exponents,
            squares,
            weights,
        }
    }

    /// `Σ w_k s_k²`.
    pub fn multiplier(&self, vars: &Vars) -> Polynomial {
        let mut r = Polynomial::zero(vars);
        for (s, w) in self.squares.iter().zip(&self.weights) {
            r = &r + &(s * s).scale(w);
        }
        r
    }

    fn square_degree(&self) -> u32 {
        self.squares.iter().map(|s| 2 * s.degree()).max().unwrap_or(0)
    }
}

/// Witness that `h = Σ α·(m·p) + Σ r·q` with every `r` a sum of squares.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub degree: u32,
    pub eq_terms: Vec<EqTerm>,
    pub ineq_terms: Vec<IneqTerm>,
}

impl Certificate {
    pub fn new(degree: u32) -> Self {
        Certificate {
            degree,
            eq_terms: Vec::new(),
            ineq_terms: Vec::new(),
        }
    }

    pub fn with_ineq(mut self, t: IneqTerm) -> Self {
        self.ineq_terms.push(t);
        self
    }

    pub fn with_eq(mut self, t: EqTerm) -> Self {
        self.eq_terms.push(t);
        self
    }

    /// The polynomial the certificate proves nonnegative.
    pub fn expand(&self, a: &ConstraintSet) -> Result<Polynomial> {
        let mut out = Polynomial::zero(&a.vars);
        for t in &self.eq_terms {
            let p = a.equalities.get(t.constraint).ok_or_else(|| {
                Error::Structural(format!("equality index {} out of range", t.constraint))
            })?;
            out = &out + &p.mul_monomial(&t.multiplier).scale(&t.coeff);
        }
        for t in &self.ineq_terms {
            if t.exponents.len() != a.inequalities.len() {
                return Err(Error::DimensionMismatch {
                    left: t.exponents.len(),
                    right: a.inequalities.len(),
                });
            }
            out = &out + &(&t.multiplier(&a.vars) * &product(a, &t.exponents));
        }
        Ok(out)
    }

    /// Degree and sign conditions, checked before any algebra.
    pub fn check_structure(&self, a: &ConstraintSet) -> Result<()> {
        for t in &self.eq_terms {
            let p = a.equalities.get(t.constraint).ok_or_else(|| {
                Error::Structural(format!("equality index {} out of range", t.constraint))
            })?;
            if t.multiplier.0.len() != a.vars.len() {
                return Err(Error::Structural("multiplier has wrong arity".into()));
            }
            let deg = t.multiplier.degree() + p.degree();
            if deg > self.degree {
                return Err(Error::Structural(format!(
                    "equality term of degree {deg} exceeds {}",
                    self.degree
                )));
            }
        }
        for t in &self.ineq_terms {
            if t.exponents.len() != a.inequalities.len() {
                return Err(Error::Structural(format!(
                    "exponent vector of length {} for {} inequalities",
                    t.exponents.len(),
                    a.inequalities.len()
                )));
            }
            if t.squares.len() != t.weights.len() {
                return Err(Error::Structural("one weight per square required".into()));
            }
            if let Some(w) = t.weights.iter().find(|w| w.is_negative()) {
                return Err(Error::Structural(format!("negative weight {w}")));
            }
            let gdeg: u32 = t
                .exponents
                .iter()
                .zip(&a.inequalities)
                .map(|(e, q)| e * q.degree())
                .sum();
            let deg = t.square_degree() + gdeg;
            if deg > self.degree {
                return Err(Error::Structural(format!(
                    "inequality term of degree {deg} exceeds {}",
                    self.degree
                )));
            }
        }
        Ok(())
    }

    /// Coefficient-wise images under a variable substitution; constraints
    /// are not touched, so callers must supply matching ones.
    pub fn map_squares(&self, f: impl Fn(&Polynomial) -> Polynomial) -> Self {
        Certificate {
            degree: self.degree,
            eq_terms: self.eq_terms.clone(),
            ineq_terms: self
                .ineq_terms
                .iter()
                .map(|t| IneqTerm {
                    exponents: t.exponents.clone(),
                    squares: t.squares.iter().map(&f).collect(),
                    weights: t.weights.clone(),
                })
                .collect(),
        }
    }

    /// Number of rational numbers a perturbation test can touch.
    pub fn coefficient_slots(&self) -> usize {
        self.eq_terms.len()
            + self
                .ineq_terms
                .iter()
                .map(|t| t.weights.len() + t.squares.iter().map(|s| s.num_terms()).sum::<usize>())
                .sum::<usize>()
    }

    /// Adds `delta` to the `slot`-th rational (same enumeration as
    /// [`Self::coefficient_slots`]).
    pub fn perturbed(&self, slot: usize, delta: &Rational) -> Self {
        let mut c = self.clone();
        let mut k = slot;
        if k < c.eq_terms.len() {
            c.eq_terms[k].coeff = c.eq_terms[k].coeff.clone() + delta;
            return c;
        }
        k -= c.eq_terms.len();
        for t in &mut c.ineq_terms {
            if k < t.weights.len() {
                t.weights[k] = t.weights[k].clone() + delta;
                return c;
            }
            k -= t.weights.len();
            for s in &mut t.squares {
                if k < s.num_terms() {
                    let m = s.terms().nth(k).map(|(m, _)| m.clone()).expect("slot in range");
                    s.add_term(m, delta.clone());
                    return c;
                }
                k -= s.num_terms();
            }
        }
        panic!("perturbation slot {slot} out of range");
    }

    pub fn to_json(&self, a: &ConstraintSet) -> Result<Value> {
        let ce = closure_e(a, self.degree)?;
        let cg = closure_g(a, self.degree)?;
        let mut eq = Vec::new();
        for t in &self.eq_terms {
            let idx = ce
                .iter()
                .position(|g| g.constraint == t.constraint && g.multiplier == t.multiplier)
                .ok_or_else(|| Error::Structural("equality term outside the closure".into()))?;
            eq.push(json!([idx, format_rational(&t.coeff)]));
        }
        let mut ineq = Vec::new();
        for t in &self.ineq_terms {
            let target = product(a, &t.exponents);
            let idx = cg
                .iter()
                .position(|g| g.exponents == t.exponents || g.poly == target)
                .ok_or_else(|| Error::Structural("inequality term outside the closure".into()))?;
            let squares: Vec<Value> = t.squares.iter().map(|s| s.to_json()).collect();
            if t.weights.iter().all(|w| w.is_one()) {
                ineq.push(json!([idx, squares]));
            } else {
                let w: Vec<String> = t.weights.iter().map(format_rational).collect();
                ineq.push(json!([idx, squares, w]));
            }
        }
        Ok(json!({"degree": self.degree, "equality_terms": eq, "inequality_terms": ineq}))
    }

    /// Reads the index-based form. An optional third entry on inequality
    /// terms gives nonnegative weights for the squares.
    pub fn from_json(a: &ConstraintSet, v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("certificate: {m}"));
        let degree = v
            .get("degree")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing degree"))? as u32;
        let ce = closure_e(a, degree)?;
        let cg = closure_g(a, degree)?;
        let mut cert = Certificate::new(degree);
        let empty = Vec::new();
        for t in v.get("equality_terms").and_then(Value::as_array).unwrap_or(&empty) {
            let arr = t.as_array().filter(|x| x.len() == 2).ok_or_else(|| bad("equality term shape"))?;
            let idx = arr[0].as_u64().ok_or_else(|| bad("equality index"))? as usize;
            let g = ce
                .get(idx)
                .ok_or_else(|| Error::Structural(format!("equality closure index {idx} out of range")))?;
            cert.eq_terms.push(EqTerm {
                constraint: g.constraint,
                multiplier: g.multiplier.clone(),
                coeff: rational_value(&arr[1])?,
            });
        }
        for t in v.get("inequality_terms").and_then(Value::as_array).unwrap_or(&empty) {
            let arr = t
                .as_array()
                .filter(|x| x.len() == 2 || x.len() == 3)
                .ok_or_else(|| bad("inequality term shape"))?;
            let idx = arr[0].as_u64().ok_or_else(|| bad("inequality index"))? as usize;
            let g = cg
                .get(idx)
                .ok_or_else(|| Error::Structural(format!("inequality closure index {idx} out of range")))?;
            let squares = arr[1]
                .as_array()
                .ok_or_else(|| bad("squares must be a list"))?
                .iter()
                .map(|p| Polynomial::from_json(&a.vars, p))
                .collect::<Result<Vec<_>>>()?;
            let weights = match arr.get(2) {
                Some(w) => w
                    .as_array()
                    .ok_or_else(|| bad("weights must be a list"))?
                    .iter()
                    .map(rational_value)
                    .collect::<Result<Vec<_>>>()?,
                None => vec![Rational::one(); squares.len()],
            };
            cert.ineq_terms.push(IneqTerm {
                exponents: g.exponents.clone(),
                squares,
                weights,
            });
        }
        Ok(cert)
    }
}

fn rational_value(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => parse_rational(&n.to_string()),
        other => Err(Error::Parse(format!("expected a rational, got {other}"))),
    }
}

/// Outcome of [`verify_certificate`]; valid iff the residual is zero.
#[derive(Debug, Clone)]
pub struct Verification {
    pub valid: bool,
    pub residual: Polynomial,
}

/// Exact check of `h − (Σ α·m·p + Σ r·q) = 0`.
pub fn verify_certificate(h: &Polynomial, a: &ConstraintSet, cert: &Certificate) -> Result<Verification> {
    cert.check_structure(a)?;
    if h.nvars() != a.vars.len() {
        return Err(Error::DimensionMismatch {
            left: h.nvars(),
            right: a.vars.len(),
        });
    }
    let h = h.rename(&a.vars)?;
    let residual = &h - &cert.expand(a)?;
    Ok(Verification {
        valid: residual.is_zero(),
        residual,
    })
}

/// A refutation proves `−1 ≥ 0`.
pub fn verify_refutation(a: &ConstraintSet, cert: &Certificate) -> Result<Verification> {
    let minus_one = Polynomial::constant(&a.vars, -Rational::one());
    verify_certificate(&minus_one, a, cert)
}

/// `p + q`.
pub fn sum(c1: &Certificate, c2: &Certificate) -> Certificate {
    let mut out = c1.clone();
    out.degree = c1.degree.max(c2.degree);
    out.eq_terms.extend(c2.eq_terms.iter().cloned());
    out.ineq_terms.extend(c2.ineq_terms.iter().cloned());
    out
}

/// `λ p` for `λ ≥ 0`.
pub fn scale(c: &Certificate, lambda: &Rational) -> Result<Certificate> {
    if lambda.is_negative() {
        return Err(Error::Domain(format!("scale factor {lambda} must be nonnegative")));
    }
    let mut out = c.clone();
    for t in &mut out.eq_terms {
        t.coeff = t.coeff.clone() * lambda;
    }
    for t in &mut out.ineq_terms {
        for w in &mut t.weights {
            *w = w.clone() * lambda;
        }
    }
    Ok(out)
}

/// From `p − q ≥ 0` and `q − r ≥ 0`, a certificate of `p − r ≥ 0`.
pub fn transitive(p_minus_q: &Certificate, q_minus_r: &Certificate) -> Certificate {
    sum(p_minus_q, q_minus_r)
}

/// `p · q ≥ 0` at degree `d + d′`, given certificates of `p` and `q`.
pub fn product_certificate(a: &ConstraintSet, c1: &Certificate, c2: &Certificate) -> Result<Certificate> {
    let p1 = c1.expand(a)?;
    let p2 = c2.expand(a)?;
    let mut out = Certificate::new(c1.degree + c2.degree);
    for t1 in &c1.ineq_terms {
        for t2 in &c2.ineq_terms {
            let exponents = t1.exponents.iter().zip(&t2.exponents).map(|(x, y)| x + y).collect();
            let mut pairs = Vec::new();
            for (s1, w1) in t1.squares.iter().zip(&t1.weights) {
                for (s2, w2) in t2.squares.iter().zip(&t2.weights) {
                    let w = w1 * w2;
                    if !w.is_zero() {
                        pairs.push((w, s1 * s2));
                    }
                }
            }
            out.ineq_terms.push(IneqTerm::weighted(exponents, pairs));
        }
    }
    // equality parts absorb the other factor as a polynomial multiplier;
    // t1·p2 counts the eq×eq cross terms once, so t2 pairs with p1 − eq1
    let eq_part1 = eq_only(c1);
    let ineq_part1 = &p1 - &eq_part1.expand(a)?;
    for (t, other) in c1.eq_terms.iter().map(|t| (t, &p2)).chain(c2.eq_terms.iter().map(|t| (t, &ineq_part1))) {
        for (m, coeff) in other.terms() {
            out.eq_terms.push(EqTerm {
                constraint: t.constraint,
                multiplier: t.multiplier.mul(m),
                coeff: &t.coeff * coeff,
            });
        }
    }
    Ok(out)
}

fn eq_only(c: &Certificate) -> Certificate {
    Certificate {
        degree: c.degree,
        eq_terms: c.eq_terms.clone(),
        ineq_terms: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;
    use crate::sos::poly::vars;

    fn q(a: i64, b: i64) -> Rational {
        Rational::from_ratio(a, b)
    }

    fn interval() -> (Vars, ConstraintSet) {
        let v = vars(&["y"]);
        let a = ConstraintSet::parse(&v, &[], &["1-y", "1+y"]).unwrap();
        (v, a)
    }

    fn one_minus_y2() -> Certificate {
        let (v, _) = interval();
        let p = |s: &str| Polynomial::parse(&v, s).unwrap();
        Certificate::new(3)
            .with_ineq(IneqTerm::weighted(vec![1, 0], vec![(q(1, 2), p("1+y"))]))
            .with_ineq(IneqTerm::weighted(vec![0, 1], vec![(q(1, 2), p("1-y"))]))
    }

    #[test]
    fn interval_square_bound_verifies() {
        let (v, a) = interval();
        let h = Polynomial::parse(&v, "1-y^2").unwrap();
        let r = verify_certificate(&h, &a, &one_minus_y2()).unwrap();
        assert!(r.valid, "residual {}", r.residual);
    }

    #[test]
    fn perturbations_fail() {
        let (v, a) = interval();
        let h = Polynomial::parse(&v, "1-y^2").unwrap();
        let c = one_minus_y2();
        for k in 0..c.coefficient_slots() {
            let r = verify_certificate(&h, &a, &c.perturbed(k, &q(1, 1000))).unwrap();
            assert!(!r.valid);
            assert!(!r.residual.is_zero());
        }
    }

    #[test]
    fn degree_violation_is_structural() {
        let (_, a) = interval();
        let mut c = one_minus_y2();
        c.degree = 2;
        assert!(matches!(c.check_structure(&a), Err(Error::Structural(_))));
    }

    #[test]
    fn json_roundtrip() {
        let (_, a) = interval();
        let c = one_minus_y2();
        let js = c.to_json(&a).unwrap();
        let back = Certificate::from_json(&a, &js).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn product_with_equalities() {
        let v = vars(&["x"]);
        let a = ConstraintSet::parse(&v, &["x^2-1"], &["x"]).unwrap();
        // x ≥ 0 and 1 + (x²−1) − x² ≥ 0 style mixtures
        let c1 = Certificate::new(2)
            .with_ineq(IneqTerm::unit(vec![1], vec![Polynomial::parse(&v, "1").unwrap()]))
            .with_eq(EqTerm {
                constraint: 0,
                multiplier: Monomial(vec![0]),
                coeff: q(2, 1),
            });
        let c2 = Certificate::new(2)
            .with_ineq(IneqTerm::unit(vec![0], vec![Polynomial::parse(&v, "x+1").unwrap()]))
            .with_eq(EqTerm {
                constraint: 0,
                multiplier: Monomial(vec![0]),
                coeff: q(-1, 1),
            });
        let prod = product_certificate(&a, &c1, &c2).unwrap();
        let want = &c1.expand(&a).unwrap() * &c2.expand(&a).unwrap();
        assert!(verify_certificate(&want, &a, &prod).unwrap().valid);
    }
}
