//! Pseudo-expectations: moment tables and the localized PSD test.

use super::closure::{closure_e, closure_g, ConstraintSet};
use super::poly::{monomials_up_to, Monomial, Polynomial, Vars};
use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, Mat};
use crate::scalar::{format_rational, parse_rational, ratio_to_f64, Rational, Scalar};
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;

pub const EQUALITY_TOLERANCE: f64 = 1e-10;
pub const PSD_TOLERANCE: f64 = 1e-8;

/// Linear functional on polynomials of degree `≤ degree`, given on monomials.
#[derive(Debug, Clone)]
pub struct PseudoExpectation<T = f64> {
    pub vars: Vars,
    pub degree: u32,
    pub moments: BTreeMap<Monomial, T>,
}

impl<T: Scalar> PseudoExpectation<T> {
    pub fn new(vars: &Vars, degree: u32) -> Self {
        PseudoExpectation {
            vars: vars.clone(),
            degree,
            moments: BTreeMap::new(),
        }
    }

    /// Moments of a finitely supported measure (weights normalised).
    pub fn from_distribution(vars: &Vars, degree: u32, atoms: &[(Vec<T>, T)]) -> Self {
        let total = atoms.iter().fold(T::zero(), |acc, (_, w)| acc + w.clone());
        let mut pe = Self::new(vars, degree);
        for m in monomials_up_to(vars.len(), degree) {
            let v = atoms
                .iter()
                .fold(T::zero(), |acc, (x, w)| acc + w.clone() * m.eval(x));
            pe.moments.insert(m, v / total.clone());
        }
        pe
    }

    pub fn moment(&self, m: &Monomial) -> Result<T> {
        self.moments
            .get(m)
            .cloned()
            .ok_or_else(|| Error::Structural(format!("missing moment for exponents {:?}", m.0)))
    }

    pub fn set(&mut self, m: Monomial, v: T) {
        self.moments.insert(m, v);
    }

    /// `Ẽ(p)` by linearity.
    pub fn apply(&self, p: &Polynomial) -> Result<T> {
        let mut acc = T::zero();
        for (m, c) in p.terms() {
            acc = acc + T::from_rational(c) * self.moment(m)?;
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> Value {
        let moments: Vec<Value> = self
            .moments
            .iter()
            .map(|(m, v)| json!([m.0, v.render()]))
            .collect();
        json!({"variables": *self.vars, "degree": self.degree, "moments": moments})
    }
}

impl PseudoExpectation<f64> {
    pub fn from_json(v: &Value) -> Result<Self> {
        let names: Vec<String> = serde_json::from_value(
            v.get("variables").cloned().ok_or_else(|| Error::Parse("missing variables".into()))?,
        )
        .map_err(|e| Error::Parse(format!("variables: {e}")))?;
        let vars: Vars = std::sync::Arc::new(names);
        let degree = v
            .get("degree")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("missing degree".into()))? as u32;
        let mut pe = PseudoExpectation::new(&vars, degree);
        for t in v
            .get("moments")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing moments".into()))?
        {
            let exps: Vec<u32> = serde_json::from_value(t[0].clone())
                .map_err(|e| Error::Parse(format!("moment exponents: {e}")))?;
            if exps.len() != vars.len() {
                return Err(Error::Parse(format!("moment exponents {exps:?} have wrong length")));
            }
            let val = match &t[1] {
                Value::Number(n) => n.as_f64().unwrap_or(f64::NAN),
                Value::String(s) => ratio_to_f64(&parse_rational(s)?),
                other => return Err(Error::Parse(format!("bad moment value {other}"))),
            };
            pe.moments.insert(Monomial(exps), val);
        }
        Ok(pe)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalizedBlock {
    pub generator: String,
    pub size: usize,
    pub min_eigenvalue: f64,
    pub trace: f64,
    /// `min_eigenvalue + tolerance·(1 + trace)`; negative means failure.
    pub margin: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeReport {
    pub degree: u32,
    pub normalized: bool,
    pub max_equality_violation: f64,
    pub equalities_ok: bool,
    pub blocks: Vec<LocalizedBlock>,
    pub psd_ok: bool,
    /// Smallest block margin.
    pub worst_margin: f64,
    pub ok: bool,
}

/// Monomials `u` with `2 deg u + deg g ≤ d`.
pub fn localizing_basis(nvars: usize, d: u32, gdeg: u32) -> Vec<Monomial> {
    if gdeg > d {
        return Vec::new();
    }
    monomials_up_to(nvars, (d - gdeg) / 2)
}

/// `M[u, v] = Ẽ(u v g)`.
pub fn localizing_matrix<T: Scalar>(pe: &PseudoExpectation<T>, g: &Polynomial, basis: &[Monomial]) -> Result<Mat> {
    let n = basis.len();
    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for (mono, c) in g.terms() {
                let key = basis[i].mul(&basis[j]).mul(mono);
                acc += ratio_to_f64(c) * pe.moment(&key)?.to_double();
            }
            m[(i, j)] = acc;
            m[(j, i)] = acc;
        }
    }
    Ok(m)
}

pub fn check_pseudo_expectation<T: Scalar>(pe: &PseudoExpectation<T>, a: &ConstraintSet) -> Result<PeReport> {
    if a.vars.len() != pe.vars.len() {
        return Err(Error::DimensionMismatch {
            left: pe.vars.len(),
            right: a.vars.len(),
        });
    }
    if pe.degree < a.max_degree() {
        return Err(Error::Precondition(format!(
            "degree {} below constraint degree {}",
            pe.degree,
            a.max_degree()
        )));
    }
    let a = ConstraintSet {
        vars: pe.vars.clone(),
        equalities: a.equalities.iter().map(|p| p.rename(&pe.vars)).collect::<Result<_>>()?,
        inequalities: a.inequalities.iter().map(|p| p.rename(&pe.vars)).collect::<Result<_>>()?,
    };
    let d = pe.degree;
    let one = pe.moment(&Monomial::one(pe.vars.len()))?;
    let normalized = if T::is_exact() {
        one == T::one()
    } else {
        (one.to_double() - 1.0).abs() <= EQUALITY_TOLERANCE
    };
    let mut max_eq = 0.0f64;
    let mut eq_exact = true;
    for g in closure_e(&a, d)? {
        let mut acc = T::zero();
        for (m, c) in g.poly.terms() {
            acc = acc + T::from_rational(c) * pe.moment(m)?;
        }
        if !acc.is_zero() {
            eq_exact = false;
        }
        max_eq = max_eq.max(acc.to_double().abs());
    }
    let equalities_ok = if T::is_exact() { eq_exact } else { max_eq <= EQUALITY_TOLERANCE };
    let mut blocks = Vec::new();
    for g in closure_g(&a, d)? {
        let basis = localizing_basis(pe.vars.len(), d, g.poly.degree());
        if basis.is_empty() {
            continue;
        }
        let m = localizing_matrix(pe, &g.poly, &basis)?;
        let lam = min_eigenvalue(&m);
        let trace = m.trace();
        let margin = lam + PSD_TOLERANCE * (1.0 + trace.abs());
        blocks.push(LocalizedBlock {
            generator: g.poly.to_string(),
            size: basis.len(),
            min_eigenvalue: lam,
            trace,
            margin,
            ok: margin >= 0.0,
        });
    }
    let psd_ok = blocks.iter().all(|b| b.ok);
    let worst_margin = blocks.iter().map(|b| b.margin).fold(f64::INFINITY, f64::min);
    Ok(PeReport {
        degree: d,
        normalized,
        max_equality_violation: max_eq,
        equalities_ok,
        psd_ok,
        worst_margin,
        ok: normalized && equalities_ok && psd_ok,
        blocks,
    })
}

/// Renders a rational moment table for reports.
pub fn exact_table_json(pe: &PseudoExpectation<Rational>) -> Value {
    let moments: Vec<Value> = pe
        .moments
        .iter()
        .map(|(m, v)| json!([m.0, format_rational(v)]))
        .collect();
    json!({"variables": *pe.vars, "degree": pe.degree, "moments": moments})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sos::poly::vars;

    #[test]
    fn uniform_sign_passes_and_negative_square_fails() {
        let v = vars(&["y"]);
        let a = ConstraintSet::parse(&v, &["1-y^2"], &[]).unwrap();
        let atoms = vec![(vec![1.0], 0.5), (vec![-1.0], 0.5)];
        let mut pe = PseudoExpectation::from_distribution(&v, 2, &atoms);
        assert!(check_pseudo_expectation(&pe, &a).unwrap().ok);
        pe.set(Monomial(vec![2]), -0.5);
        let r = check_pseudo_expectation(&pe, &a).unwrap();
        assert!(!r.psd_ok);
        assert!(!r.ok);
    }

    #[test]
    fn cube_moments_exact() {
        let v = vars(&["a", "b", "c"]);
        let a = ConstraintSet::parse(&v, &["a^2-1", "b^2-1", "c^2-1"], &[]).unwrap();
        let atoms: Vec<(Vec<Rational>, Rational)> = (0..8)
            .map(|i| {
                let x = (0..3)
                    .map(|j| Rational::from_int(if i >> j & 1 == 0 { 1 } else { -1 }))
                    .collect();
                (x, Rational::from_int(1))
            })
            .collect();
        let pe = PseudoExpectation::from_distribution(&v, 4, &atoms);
        let r = check_pseudo_expectation(&pe, &a).unwrap();
        assert!(r.ok, "{r:?}");
        assert_eq!(r.max_equality_violation, 0.0);
    }

    #[test]
    fn missing_moment_is_structural() {
        let v = vars(&["y"]);
        let a = ConstraintSet::new(&v);
        let mut pe = PseudoExpectation::<f64>::new(&v, 2);
        pe.set(Monomial(vec![0]), 1.0);
        assert!(matches!(check_pseudo_expectation(&pe, &a), Err(Error::Structural(_))));
    }
}
