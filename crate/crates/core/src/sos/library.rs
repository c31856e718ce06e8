//! Explicit certificates for the standard one- and two-variable bounds on
//! the box `[-1, 1]`, plus instances of the composition rules.

use super::certificate::{product_certificate, scale, sum, transitive, verify_certificate, Certificate, IneqTerm};
use super::closure::ConstraintSet;
use super::poly::{vars, Polynomial, Vars};
use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Rational, Scalar};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

/// A parameterised family of certified inequalities.
#[derive(Debug, Clone, PartialEq)]
pub enum LibraryFact {
    /// `0 ≤ y^k ≤ 1` (even `k`) or `−1 ≤ y^k ≤ 1` (odd `k`) on `[-1, 1]`.
    PowerBound { k: u32 },
    /// `y⁴ ≤ y²` on `[-1, 1]`.
    QuarticBelowSquare,
    /// `y^{2k} ≤ y⁴` on `[-1, 1]`, `k ≥ 3`.
    HighPowerBelowQuartic { k: u32 },
    /// `±y^m z^n ≤ y⁴ + z⁴` on `[-1, 1]²`, `m, n ≥ 2`.
    MixedPower { m: u32, n: u32 },
    /// `±y z^n ≤ y⁴ + z⁴` on `[-1, 1]²`, odd `n ≥ 3`.
    LinearOddPower { n: u32 },
    /// The power bounds for `y = Σ λ_i z_i`, `z_i ∈ [-1, 1]`, `λ` convex.
    Substitution { k: u32, lambdas: Vec<Rational> },
    /// `−1 ≤ x y^k ≤ 1` from `0 ≤ x ≤ 1` and `−1 ≤ y^k ≤ 1`, odd `k`.
    ProductBound { k: u32 },
    /// `(1 − y^a)(1 − y^b) ≥ 0` by multiplying two power bounds.
    ComposedProduct { a: u32, b: u32 },
    /// `y^{2k} ≤ y²` by chaining through `y⁴`.
    Chained { k: u32 },
}

impl LibraryFact {
    pub const IDS: [&'static str; 9] = [
        "power-bound",
        "quartic-below-square",
        "high-power-below-quartic",
        "mixed-power",
        "linear-odd-power",
        "substitution",
        "product-bound",
        "composed-product",
        "chained",
    ];

    /// Builds a fact from its id and `name=value` parameters.
    pub fn parse(id: &str, params: &BTreeMap<String, String>) -> Result<Self> {
        let int = |name: &str| -> Result<u32> {
            params
                .get(name)
                .ok_or_else(|| Error::Parse(format!("{id} needs parameter {name}")))?
                .parse()
                .map_err(|_| Error::Parse(format!("parameter {name} must be a nonnegative integer")))
        };
        Ok(match id {
            "power-bound" => LibraryFact::PowerBound { k: int("k")? },
            "quartic-below-square" => LibraryFact::QuarticBelowSquare,
            "high-power-below-quartic" => LibraryFact::HighPowerBelowQuartic { k: int("k")? },
            "mixed-power" => LibraryFact::MixedPower {
                m: int("m")?,
                n: int("n")?,
            },
            "linear-odd-power" => LibraryFact::LinearOddPower { n: int("n")? },
            "substitution" => {
                let raw = params
                    .get("lambdas")
                    .ok_or_else(|| Error::Parse("substitution needs lambdas".into()))?;
                let lambdas = raw.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
                LibraryFact::Substitution { k: int("k")?, lambdas }
            }
            "product-bound" => LibraryFact::ProductBound { k: int("k")? },
            "composed-product" => LibraryFact::ComposedProduct {
                a: int("a")?,
                b: int("b")?,
            },
            "chained" => LibraryFact::Chained { k: int("k")? },
            other => return Err(Error::Parse(format!("unknown library fact '{other}'"))),
        })
    }

    /// A spread of parameter choices covering every family.
    pub fn standard_instances() -> Vec<LibraryFact> {
        let q = |a, b| Rational::from_ratio(a, b);
        let mut out = Vec::new();
        out.extend((1..=8).map(|k| LibraryFact::PowerBound { k }));
        out.push(LibraryFact::QuarticBelowSquare);
        out.extend((3..=6).map(|k| LibraryFact::HighPowerBelowQuartic { k }));
        for m in 2..=4 {
            for n in 2..=4 {
                out.push(LibraryFact::MixedPower { m, n });
            }
        }
        out.extend([3, 5, 7, 9].map(|n| LibraryFact::LinearOddPower { n }));
        out.push(LibraryFact::Substitution {
            k: 2,
            lambdas: vec![q(1, 2), q(1, 2)],
        });
        out.push(LibraryFact::Substitution {
            k: 3,
            lambdas: vec![q(1, 3), q(1, 6), q(1, 2)],
        });
        out.extend([1, 3, 5].map(|k| LibraryFact::ProductBound { k }));
        out.push(LibraryFact::ComposedProduct { a: 2, b: 3 });
        out.push(LibraryFact::ComposedProduct { a: 4, b: 4 });
        out.extend((3..=5).map(|k| LibraryFact::Chained { k }));
        out
    }
}

/// A certified statement `A ⊢_d target ≥ 0`.
#[derive(Debug, Clone)]
pub struct LibraryEntry {
    pub name: String,
    pub target: Polynomial,
    pub constraints: ConstraintSet,
    pub certificate: Certificate,
}

/// Emits the certificates for `fact`; each is verified before returning.
pub fn certificate_library(fact: &LibraryFact) -> Result<Vec<LibraryEntry>> {
    let entries = match fact {
        LibraryFact::PowerBound { k } => power_bound(*k)?,
        LibraryFact::QuarticBelowSquare => vec![quartic_below_square()],
        LibraryFact::HighPowerBelowQuartic { k } => vec![high_power_below_quartic(*k)?],
        LibraryFact::MixedPower { m, n } => mixed_power(*m, *n)?,
        LibraryFact::LinearOddPower { n } => linear_odd_power(*n)?,
        LibraryFact::Substitution { k, lambdas } => substitution(*k, lambdas)?,
        LibraryFact::ProductBound { k } => product_bound(*k)?,
        LibraryFact::ComposedProduct { a, b } => vec![composed_product(*a, *b)?],
        LibraryFact::Chained { k } => vec![chained(*k)?],
    };
    for e in &entries {
        let v = verify_certificate(&e.target, &e.constraints, &e.certificate)?;
        if !v.valid {
            return Err(Error::Structural(format!(
                "library certificate for {} left residual {}",
                e.name, v.residual
            )));
        }
    }
    Ok(entries)
}

fn unit_interval() -> (Vars, ConstraintSet) {
    let v = vars(&["y"]);
    let a = ConstraintSet::boxed(&v, &-Rational::one(), &Rational::one());
    (v, a)
}

fn unit_square() -> (Vars, ConstraintSet) {
    let v = vars(&["y", "z"]);
    let a = ConstraintSet::boxed(&v, &-Rational::one(), &Rational::one());
    (v, a)
}

fn half() -> Rational {
    Rational::from_ratio(1, 2)
}

fn mono(v: &Vars, i: usize, e: u32) -> Polynomial {
    Polynomial::var(v, i).pow(e)
}

fn p(v: &Vars, s: &str) -> Polynomial {
    Polynomial::parse(v, s).expect("library literal parses")
}

fn entry(name: String, target: Polynomial, constraints: &ConstraintSet, certificate: Certificate) -> LibraryEntry {
    LibraryEntry {
        name,
        target,
        constraints: constraints.clone(),
        certificate,
    }
}

/// `y^{2j} (1 − y²) ≥ 0` on `[-1, 1]`, as two weighted terms.
fn shifted_square_gap(v: &Vars, j: u32) -> Vec<IneqTerm> {
    let yj = mono(v, 0, j);
    vec![
        IneqTerm::weighted(vec![1, 0], vec![(half(), &yj * &p(v, "1+y"))]),
        IneqTerm::weighted(vec![0, 1], vec![(half(), &yj * &p(v, "1-y"))]),
    ]
}

/// `1 − y^k` for even `k ≥ 2`: `Σ_{j<k/2} y^{2j}(1 − y²)`.
fn even_upper(v: &Vars, k: u32) -> Certificate {
    let mut c = Certificate::new(k + 1);
    for j in 0..k / 2 {
        c.ineq_terms.extend(shifted_square_gap(v, j));
    }
    c
}

/// `1 ∓ y^k` for odd `k`: `y^{k−1}(1 ∓ y) + Σ_{j ≤ (k−3)/2} y^{2j}(1 − y²)`.
fn odd_bound(v: &Vars, k: u32, upper: bool) -> Certificate {
    let mut c = Certificate::new(k);
    let exps = if upper { vec![1, 0] } else { vec![0, 1] };
    c.ineq_terms.push(IneqTerm::unit(exps, vec![mono(v, 0, (k - 1) / 2)]));
    if k >= 3 {
        for j in 0..=(k - 3) / 2 {
            c.ineq_terms.extend(shifted_square_gap(v, j));
        }
    }
    c
}

fn power_bound(k: u32) -> Result<Vec<LibraryEntry>> {
    if k == 0 {
        return Err(Error::Domain("power bound needs k ≥ 1".into()));
    }
    let (v, a) = unit_interval();
    let yk = mono(&v, 0, k);
    let one = Polynomial::constant(&v, Rational::one());
    if k.is_multiple_of(2) {
        let lower = Certificate::new(k + 1).with_ineq(IneqTerm::unit(vec![0, 0], vec![mono(&v, 0, k / 2)]));
        Ok(vec![
            entry(format!("y^{k} <= 1"), &one - &yk, &a, even_upper(&v, k)),
            entry(format!("y^{k} >= 0"), yk.clone(), &a, lower),
        ])
    } else {
        Ok(vec![
            entry(format!("y^{k} <= 1"), &one - &yk, &a, odd_bound(&v, k, true)),
            entry(format!("y^{k} >= -1"), &one + &yk, &a, odd_bound(&v, k, false)),
        ])
    }
}

fn quartic_below_square() -> LibraryEntry {
    let (v, a) = unit_interval();
    let c = Certificate::new(5).with_ineq_all(shifted_square_gap(&v, 1));
    entry("y^4 <= y^2".into(), p(&v, "y^2 - y^4"), &a, c)
}

impl Certificate {
    fn with_ineq_all(mut self, ts: Vec<IneqTerm>) -> Self {
        self.ineq_terms.extend(ts);
        self
    }
}

/// `y⁴ − y^{2k} = Σ_{j=3..k} y^{2j−2}(1 − y²)`.
fn high_power_cert(v: &Vars, k: u32) -> Certificate {
    let mut c = Certificate::new(2 * k + 1);
    for j in 3..=k {
        c.ineq_terms.extend(shifted_square_gap(v, j - 1));
    }
    c
}

fn high_power_below_quartic(k: u32) -> Result<LibraryEntry> {
    if k < 3 {
        return Err(Error::Domain(format!("need k ≥ 3, got {k}")));
    }
    let (v, a) = unit_interval();
    let target = &mono(&v, 0, 4) - &mono(&v, 0, 2 * k);
    Ok(entry(format!("y^{} <= y^4", 2 * k), target, &a, high_power_cert(&v, k)))
}

/// Moves a one-variable interval certificate onto variable `var` of the
/// square (generators `2var`, `2var+1`).
fn lift(cert: &Certificate, to: &Vars, var: usize) -> Certificate {
    let subs = [Polynomial::var(to, var)];
    let mut out = cert.map_squares(|s| s.substitute(&subs, to));
    for t in &mut out.ineq_terms {
        let mut e = vec![0; 2 * to.len()];
        e[2 * var] = t.exponents[0];
        e[2 * var + 1] = t.exponents[1];
        t.exponents = e;
    }
    out
}

/// `y⁴ − y^{2m} ≥ 0` lifted to `var` (empty when `m = 2`).
fn quartic_excess(to: &Vars, var: usize, m: u32) -> Certificate {
    let (v, _) = unit_interval();
    if m <= 2 {
        Certificate::new(2 * m + 1)
    } else {
        lift(&high_power_cert(&v, m), to, var)
    }
}

fn mixed_power(m: u32, n: u32) -> Result<Vec<LibraryEntry>> {
    if m < 2 || n < 2 {
        return Err(Error::Domain(format!("need m, n ≥ 2, got ({m}, {n})")));
    }
    let (v, a) = unit_square();
    let ym = mono(&v, 0, m);
    let zn = mono(&v, 1, n);
    let quartics = &mono(&v, 0, 4) + &mono(&v, 1, 4);
    let degree = 1 + 2 * m.max(n);
    let mut out = Vec::new();
    for sign in [1i64, -1] {
        let s = Rational::from_int(sign);
        // y^{2m} + z^{2n} − s y^m z^n = (y^m − s z^n/2)² + ¾ z^{2n}
        let core = Certificate::new(degree).with_ineq(IneqTerm::weighted(
            vec![0; 4],
            vec![
                (Rational::one(), &ym - &zn.scale(&(s.clone() * half()))),
                (Rational::from_ratio(3, 4), zn.clone()),
            ],
        ));
        let mut c = sum(&sum(&core, &quartic_excess(&v, 0, m)), &quartic_excess(&v, 1, n));
        c.degree = degree;
        let target = &quartics - &(&ym * &zn).scale(&s);
        let name = if sign > 0 {
            format!("y^{m} z^{n} <= y^4 + z^4")
        } else {
            format!("-y^{m} z^{n} <= y^4 + z^4")
        };
        out.push(entry(name, target, &a, c));
    }
    Ok(out)
}

fn linear_odd_power(n: u32) -> Result<Vec<LibraryEntry>> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::Domain(format!("need odd n ≥ 3, got {n}")));
    }
    let (v, a) = unit_square();
    let (yv, _) = unit_interval();
    // y⁴ + z⁴ − yz³ = (y² − z²/2)² + (yz − z²/2)² + ½ z⁴
    let base = vec![
        (Rational::one(), p(&v, "y^2 - z^2/2")),
        (Rational::one(), p(&v, "y*z - z^2/2")),
        (half(), p(&v, "z^2")),
    ];
    let shift = mono(&v, 1, (n - 3) / 2);
    let mut c = Certificate::new(n + 2).with_ineq(IneqTerm::weighted(
        vec![0; 4],
        base.into_iter().map(|(w, s)| (w, &shift * &s)).collect(),
    ));
    if n > 3 {
        // z⁴ − z^{n+1}
        c = sum(&c, &lift(&high_power_cert(&yv, n.div_ceil(2)), &v, 1));
        // y⁴ (1 − z^{n−3})
        let tail = lift(&even_upper(&yv, n - 3), &v, 1);
        let y2 = mono(&v, 0, 2);
        c = sum(&c, &tail.map_squares(|s| &y2 * s));
    }
    c.degree = n + 2;
    let upper_target = &(&mono(&v, 0, 4) + &mono(&v, 1, 4)) - &(&mono(&v, 0, 1) * &mono(&v, 1, n));
    // y ↦ −y swaps the two y generators
    let flip = [-&Polynomial::var(&v, 0), Polynomial::var(&v, 1)];
    let mut lower = c.map_squares(|s| s.substitute(&flip, &v));
    for t in &mut lower.ineq_terms {
        t.exponents.swap(0, 1);
    }
    let lower_target = upper_target.substitute(&flip, &v);
    Ok(vec![
        entry(format!("y z^{n} <= y^4 + z^4"), upper_target, &a, c),
        entry(format!("-y z^{n} <= y^4 + z^4"), lower_target, &a, lower),
    ])
}

/// Rewrites a certificate over `{hi − y ≥ 0, y − lo ≥ 0}` for `y = Σ λ_i z_i`
/// over `{hi − z_i ≥ 0, z_i − lo ≥ 0}`, using `hi − y = Σ λ_i (hi − z_i)`.
pub fn substitute_convex(
    cert: &Certificate,
    lambdas: &[Rational],
    target_vars: &Vars,
) -> Result<Certificate> {
    if lambdas.iter().any(|l| l.is_negative()) {
        return Err(Error::Domain("weights must be nonnegative".into()));
    }
    if lambdas.iter().cloned().fold(Rational::zero(), |a, b| a + b) != Rational::one() {
        return Err(Error::Domain("weights must sum to one".into()));
    }
    if lambdas.len() != target_vars.len() {
        return Err(Error::DimensionMismatch {
            left: lambdas.len(),
            right: target_vars.len(),
        });
    }
    if !cert.eq_terms.is_empty() {
        return Err(Error::Precondition("substitution takes interval certificates only".into()));
    }
    let y = Polynomial::from_terms(
        target_vars,
        lambdas.iter().enumerate().map(|(i, l)| {
            let mut e = vec![0; lambdas.len()];
            e[i] = 1;
            (super::poly::Monomial(e), l.clone())
        }),
    );
    let mut out = Certificate::new(cert.degree);
    for t in &cert.ineq_terms {
        let mut expansion: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
        expansion.insert(vec![0; 2 * lambdas.len()], Rational::one());
        for (side, &times) in t.exponents.iter().enumerate() {
            for _ in 0..times {
                let mut next = BTreeMap::new();
                for (e, c) in &expansion {
                    for (i, l) in lambdas.iter().enumerate() {
                        if l.is_zero() {
                            continue;
                        }
                        let mut e2 = e.clone();
                        e2[2 * i + side] += 1;
                        let slot = next.entry(e2).or_insert_with(Rational::zero);
                        *slot = slot.clone() + c * l;
                    }
                }
                expansion = next;
            }
        }
        let squares: Vec<Polynomial> = t
            .squares
            .iter()
            .map(|s| s.substitute(std::slice::from_ref(&y), target_vars))
            .collect();
        for (e, c) in expansion {
            let weights = t.weights.iter().map(|w| w * &c).collect();
            out.ineq_terms.push(IneqTerm {
                exponents: e,
                squares: squares.clone(),
                weights,
            });
        }
    }
    Ok(out)
}

fn substitution(k: u32, lambdas: &[Rational]) -> Result<Vec<LibraryEntry>> {
    if lambdas.is_empty() {
        return Err(Error::Domain("need at least one weight".into()));
    }
    let names: Vec<String> = (1..=lambdas.len()).map(|i| format!("z{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let zv = vars(&refs);
    let za = ConstraintSet::boxed(&zv, &-Rational::one(), &Rational::one());
    let y = Polynomial::from_terms(
        &zv,
        lambdas.iter().enumerate().map(|(i, l)| {
            let mut e = vec![0; lambdas.len()];
            e[i] = 1;
            (super::poly::Monomial(e), l.clone())
        }),
    );
    power_bound(k)?
        .into_iter()
        .map(|e| {
            let cert = substitute_convex(&e.certificate, lambdas, &zv)?;
            let target = e.target.substitute(std::slice::from_ref(&y), &zv);
            Ok(entry(format!("{} at y = sum l_i z_i", e.name), target, &za, cert))
        })
        .collect()
}

fn product_bound(k: u32) -> Result<Vec<LibraryEntry>> {
    if k.is_multiple_of(2) {
        return Err(Error::Domain(format!("need odd k, got {k}")));
    }
    let v = vars(&["x", "y"]);
    let a = ConstraintSet::parse(&v, &[], &["x", "1-x", "1-y", "1+y"])?;
    let one = || Polynomial::constant(&v, Rational::one());
    let gen = |i: usize| {
        let mut e = vec![0; 4];
        e[i] = 1;
        Certificate::new(1).with_ineq(IneqTerm::unit(e, vec![one()]))
    };
    let z_nonneg = Certificate::new(0).with_ineq(IneqTerm::unit(vec![0; 4], vec![one()]));
    let (yv, _) = unit_interval();
    let to_y = [Polynomial::var(&v, 1)];
    let embed = |c: &Certificate| {
        let mut out = c.map_squares(|s| s.substitute(&to_y, &v));
        for t in &mut out.ineq_terms {
            t.exponents = vec![0, 0, t.exponents[0], t.exponents[1]];
        }
        out
    };
    let xyk = &Polynomial::var(&v, 0) * &Polynomial::var(&v, 1).pow(k);
    let mut out = Vec::new();
    for upper in [true, false] {
        // z − xw = z(1 − x) + x(z − w) with z = 1, w = ±y^k
        let zw = embed(&odd_bound(&yv, k, upper));
        let c = sum(
            &product_certificate(&a, &z_nonneg, &gen(1))?,
            &product_certificate(&a, &gen(0), &zw)?,
        );
        let (name, target) = if upper {
            (format!("x y^{k} <= 1"), &one() - &xyk)
        } else {
            (format!("x y^{k} >= -1"), &one() + &xyk)
        };
        out.push(entry(name, target, &a, c));
    }
    Ok(out)
}

fn composed_product(a_exp: u32, b_exp: u32) -> Result<LibraryEntry> {
    let first = power_bound(a_exp)?.remove(0);
    let second = power_bound(b_exp)?.remove(0);
    let c = product_certificate(&first.constraints, &first.certificate, &second.certificate)?;
    let target = &first.target * &second.target;
    Ok(entry(
        format!("(1 - y^{a_exp})(1 - y^{b_exp}) >= 0"),
        target,
        &first.constraints,
        c,
    ))
}

fn chained(k: u32) -> Result<LibraryEntry> {
    let upper = high_power_below_quartic(k)?;
    let lower = quartic_below_square();
    let c = transitive(&upper.certificate, &scale(&lower.certificate, &Rational::one())?);
    let (v, a) = unit_interval();
    let target = &mono(&v, 0, 2) - &mono(&v, 0, 2 * k);
    Ok(entry(format!("y^{} <= y^2", 2 * k), target, &a, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_standard_instance_verifies() {
        for fact in LibraryFact::standard_instances() {
            let entries = certificate_library(&fact).unwrap_or_else(|e| panic!("{fact:?}: {e}"));
            assert!(!entries.is_empty());
        }
    }

    #[test]
    fn out_of_range_parameters() {
        assert!(certificate_library(&LibraryFact::MixedPower { m: 1, n: 3 }).is_err());
        assert!(certificate_library(&LibraryFact::LinearOddPower { n: 4 }).is_err());
        assert!(certificate_library(&LibraryFact::HighPowerBelowQuartic { k: 2 }).is_err());
        assert!(certificate_library(&LibraryFact::ProductBound { k: 2 }).is_err());
        let bad = LibraryFact::Substitution {
            k: 2,
            lambdas: vec![Rational::from_ratio(1, 2), Rational::from_ratio(1, 3)],
        };
        assert!(certificate_library(&bad).is_err());
    }

    #[test]
    fn power_bound_degrees() {
        let e = certificate_library(&LibraryFact::PowerBound { k: 4 }).unwrap();
        assert_eq!(e[0].certificate.degree, 5);
        let e = certificate_library(&LibraryFact::PowerBound { k: 5 }).unwrap();
        assert_eq!(e[0].certificate.degree, 5);
    }
}
