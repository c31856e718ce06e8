//! Constraint sets and their degree-`d` closures.

use super::poly::{monomials_up_to, Monomial, Polynomial, Vars};
use crate::error::{Error, Result};
use crate::scalar::Rational;
use std::collections::HashSet;

/// Largest closure either enumeration will build.
pub const CLOSURE_CAP: usize = 10_000;

/// `p = 0` constraints and `q ≥ 0` constraints over shared variables.
/// The constant `1 ≥ 0` is implicit.
#[derive(Debug, Clone)]
pub struct ConstraintSet {
    pub vars: Vars,
    pub equalities: Vec<Polynomial>,
    pub inequalities: Vec<Polynomial>,
}

impl ConstraintSet {
    pub fn new(vars: &Vars) -> Self {
        ConstraintSet {
            vars: vars.clone(),
            equalities: Vec::new(),
            inequalities: Vec::new(),
        }
    }

    pub fn with_equality(mut self, p: Polynomial) -> Self {
        self.equalities.push(p);
        self
    }

    pub fn with_inequality(mut self, q: Polynomial) -> Self {
        self.inequalities.push(q);
        self
    }

    /// `lo ≤ x_i ≤ hi` as `hi − x_i ≥ 0, x_i − lo ≥ 0` for every variable.
    pub fn boxed(vars: &Vars, lo: &Rational, hi: &Rational) -> Self {
        let mut a = ConstraintSet::new(vars);
        for i in 0..vars.len() {
            let x = Polynomial::var(vars, i);
            a.inequalities
                .push(&Polynomial::constant(vars, hi.clone()) - &x);
            a.inequalities
                .push(&x - &Polynomial::constant(vars, lo.clone()));
        }
        a
    }

    pub fn parse(vars: &Vars, equalities: &[&str], inequalities: &[&str]) -> Result<Self> {
        Ok(ConstraintSet {
            vars: vars.clone(),
            equalities: equalities
                .iter()
                .map(|s| Polynomial::parse(vars, s))
                .collect::<Result<_>>()?,
            inequalities: inequalities
                .iter()
                .map(|s| Polynomial::parse(vars, s))
                .collect::<Result<_>>()?,
        })
    }

    pub fn max_degree(&self) -> u32 {
        self.equalities
            .iter()
            .chain(&self.inequalities)
            .map(|p| p.degree())
            .max()
            .unwrap_or(0)
    }

    /// Whether `point` satisfies every constraint (equalities within `tol`).
    pub fn contains(&self, point: &[f64], tol: f64) -> bool {
        let fp = |p: &Polynomial| p.map_coeffs(crate::scalar::ratio_to_f64).eval(point);
        self.equalities.iter().all(|p| fp(p).abs() <= tol)
            && self.inequalities.iter().all(|q| fp(q) >= -tol)
    }
}

/// `m · p_i` with `deg m + deg p_i ≤ d`.
#[derive(Debug, Clone)]
pub struct EqGenerator {
    pub constraint: usize,
    pub multiplier: Monomial,
    pub poly: Polynomial,
}

/// `Π q_i^{a_i}` with `Σ a_i deg q_i ≤ d`.
#[derive(Debug, Clone)]
pub struct IneqGenerator {
    pub exponents: Vec<u32>,
    pub poly: Polynomial,
}

/// Ordered by constraint, then multiplier; later duplicates dropped.
pub fn closure_e(a: &ConstraintSet, d: u32) -> Result<Vec<EqGenerator>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, p) in a.equalities.iter().enumerate() {
        let dp = p.degree();
        if dp > d || p.is_zero() {
            continue;
        }
        for m in monomials_up_to(a.vars.len(), d - dp) {
            let poly = p.mul_monomial(&m);
            if seen.insert(poly.to_json().to_string()) {
                if out.len() >= CLOSURE_CAP {
                    return Err(Error::Resource {
                        what: "equality closure",
                        size: out.len() + 1,
                        cap: CLOSURE_CAP,
                    });
                }
                out.push(EqGenerator {
                    constraint: i,
                    multiplier: m,
                    poly,
                });
            }
        }
    }
    Ok(out)
}

/// Ordered by `Σ a_i`, then exponent vector descending; starts with `1`.
/// Constant constraints appear with exponent at most one.
pub fn closure_g(a: &ConstraintSet, d: u32) -> Result<Vec<IneqGenerator>> {
    let m = a.inequalities.len();
    let degs: Vec<u32> = a.inequalities.iter().map(|q| q.degree()).collect();
    let mut tuples: Vec<Vec<u32>> = Vec::new();
    let mut cur = vec![0u32; m];
    fn rec(
        i: usize,
        left: u32,
        degs: &[u32],
        cur: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) -> Result<()> {
        if i == degs.len() {
            if out.len() >= CLOSURE_CAP {
                return Err(Error::Resource {
                    what: "inequality closure",
                    size: out.len() + 1,
                    cap: CLOSURE_CAP,
                });
            }
            out.push(cur.clone());
            return Ok(());
        }
        let max_e = if degs[i] == 0 { 1 } else { left / degs[i] };
        for e in 0..=max_e {
            cur[i] = e;
            rec(i + 1, left - e * degs[i], degs, cur, out)?;
        }
        cur[i] = 0;
        Ok(())
    }
    rec(0, d, &degs, &mut cur, &mut tuples)?;
    tuples.sort_by(|x, y| {
        let sx: u32 = x.iter().sum();
        let sy: u32 = y.iter().sum();
        sx.cmp(&sy).then_with(|| y.cmp(x))
    });
    let mut out = Vec::with_capacity(tuples.len());
    let mut seen = HashSet::new();
    for t in tuples {
        let poly = product(a, &t);
        if poly.is_zero() || !seen.insert(poly.to_json().to_string()) {
            continue;
        }
        out.push(IneqGenerator { exponents: t, poly });
    }
    Ok(out)
}

/// `Π q_i^{a_i}` for an exponent vector over `a.inequalities`.
pub fn product(a: &ConstraintSet, exps: &[u32]) -> Polynomial {
    let mut p = Polynomial::constant(&a.vars, Rational::from_integer(1.into()));
    for (q, &e) in a.inequalities.iter().zip(exps) {
        if e > 0 {
            p = &p * &q.pow(e);
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sos::poly::vars;

    #[test]
    fn equality_closure_small() {
        let v = vars(&["x"]);
        let a = ConstraintSet::parse(&v, &["x"], &[]).unwrap();
        let c = closure_e(&a, 2).unwrap();
        let polys: Vec<String> = c.iter().map(|g| g.poly.to_string()).collect();
        assert_eq!(polys, vec!["x", "x^2"]);
    }

    #[test]
    fn inequality_closure_interval() {
        let v = vars(&["y"]);
        let a = ConstraintSet::parse(&v, &[], &["1-y", "1+y"]).unwrap();
        let c = closure_g(&a, 2).unwrap();
        let polys: Vec<Polynomial> = c.iter().map(|g| g.poly.clone()).collect();
        let want: Vec<Polynomial> = ["1", "1-y", "1+y", "(1-y)^2", "(1-y)*(1+y)", "(1+y)^2"]
            .iter()
            .map(|s| Polynomial::parse(&v, s).unwrap())
            .collect();
        assert_eq!(polys, want);
    }

    #[test]
    fn empty_set_closure_is_one() {
        let v = vars(&["a", "b"]);
        let a = ConstraintSet::new(&v);
        for d in 0..5 {
            let c = closure_g(&a, d).unwrap();
            assert_eq!(c.len(), 1);
            assert_eq!(c[0].poly.to_string(), "1");
        }
    }

    #[test]
    fn cap_is_enforced() {
        let names: Vec<String> = (0..12).map(|i| format!("x{i}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let v = vars(&refs);
        let a = ConstraintSet::boxed(&v, &Rational::from_integer((-1).into()), &Rational::from_integer(1.into()));
        assert!(matches!(closure_g(&a, 6), Err(Error::Resource { .. })));
    }
}
