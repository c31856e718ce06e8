//! Bernstein operators in one and two variables and the polynomial
//! approximation `J̃` of the Gaussian quadrant function.

use crate::error::{domain, Error, Result};
use crate::gaussian::JEvaluator;
use crate::scalar::{format_rational, rational_from_decimal, Rational, Scalar};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

pub const DEFAULT_DEGREE_CAP: usize = 4096;
/// Largest per-variable degree for which exact monomial coefficients are
/// produced.
pub const EXACT_MONOMIAL_CAP: usize = 64;

fn binomial(n: usize, k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn binomial_row(n: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for k in 1..=n {
        let next = row[k - 1].clone() * BigInt::from(n - k + 1) / BigInt::from(k);
        row.push(next);
    }
    row
}

/// Dense univariate polynomial, `coeffs[j]` multiplying `x^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly1<T> {
    pub coeffs: Vec<T>,
}

impl<T: Scalar> Poly1<T> {
    pub fn eval(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    /// Drops trailing zero coefficients.
    pub fn trimmed(mut self) -> Self {
        while self.coeffs.len() > 1 && self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        self
    }
}

/// Forward differences `Δ^j f(0)` for `j = 0..=n` from samples `f(k/n)`.
fn forward_differences(samples: &[Rational]) -> Vec<Rational> {
    let mut work = samples.to_vec();
    let mut out = Vec::with_capacity(samples.len());
    for _ in 0..samples.len() {
        out.push(work[0].clone());
        work = work.windows(2).map(|w| w[1].clone() - w[0].clone()).collect();
    }
    out
}

/// `(B_n f)(x) = Σ_{k=0}^{n} f(k/n) C(n,k) x^k (1−x)^{n−k}` in the monomial
/// basis: the coefficient of `x^j` is `C(n,j) Δ^j f(0)` with step `1/n`.
pub fn bernstein_1d(f: impl Fn(&Rational) -> Rational, n: usize) -> Result<Poly1<Rational>> {
    if n == 0 {
        return domain("Bernstein degree must be at least 1");
    }
    let samples: Vec<Rational> = (0..=n)
        .map(|k| f(&Rational::new(BigInt::from(k), BigInt::from(n))))
        .collect();
    let binom = binomial_row(n);
    let coeffs = forward_differences(&samples)
        .into_iter()
        .zip(binom)
        .map(|(d, c)| d * Rational::from_integer(c))
        .collect();
    Ok(Poly1 { coeffs }.trimmed())
}

/// Dense bivariate polynomial, `coeffs[m][n]` multiplying `x^m y^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2<T> {
    coeffs: Vec<Vec<T>>,
}

impl<T: Scalar> Poly2<T> {
    /// Pads to a rectangular grid.
    pub fn new(mut coeffs: Vec<Vec<T>>) -> Self {
        let w = coeffs.iter().map(|r| r.len()).max().unwrap_or(0).max(1);
        if coeffs.is_empty() {
            coeffs.push(Vec::new());
        }
        for r in coeffs.iter_mut() {
            r.resize(w, T::zero());
        }
        Poly2 { coeffs }
    }

    /// From `(m, n, μ)` triples; repeated exponents accumulate.
    pub fn from_terms(terms: &[(usize, usize, T)]) -> Self {
        let mx = terms.iter().map(|t| t.0).max().unwrap_or(0);
        let ny = terms.iter().map(|t| t.1).max().unwrap_or(0);
        let mut coeffs = vec![vec![T::zero(); ny + 1]; mx + 1];
        for (m, n, c) in terms {
            coeffs[*m][*n] = coeffs[*m][*n].clone() + c.clone();
        }
        Poly2 { coeffs }
    }

    pub fn coeff(&self, m: usize, n: usize) -> T {
        self.coeffs
            .get(m)
            .and_then(|r| r.get(n))
            .cloned()
            .unwrap_or_else(T::zero)
    }

    pub fn coeffs(&self) -> &[Vec<T>] {
        &self.coeffs
    }

    /// Largest `m` and `n` with a nonzero coefficient.
    pub fn degrees(&self) -> (usize, usize) {
        let mut dm = 0;
        let mut dn = 0;
        for (m, row) in self.coeffs.iter().enumerate() {
            for (n, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    dm = dm.max(m);
                    dn = dn.max(n);
                }
            }
        }
        (dm, dn)
    }

    pub fn total_degree(&self) -> usize {
        let mut d = 0;
        for (m, row) in self.coeffs.iter().enumerate() {
            for (n, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    d = d.max(m + n);
                }
            }
        }
        d
    }

    pub fn max_abs_coeff(&self) -> T {
        self.coeffs
            .iter()
            .flatten()
            .fold(T::zero(), |acc, c| if c.abs() > acc { c.abs() } else { acc })
    }

    pub fn eval(&self, x: &T, y: &T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, row| {
            let inner = row
                .iter()
                .rev()
                .fold(T::zero(), |a, c| a * y.clone() + c.clone());
            acc * x.clone() + inner
        })
    }

    /// `∂^{dx+dy} p / ∂x^{dx} ∂y^{dy}`.
    pub fn partial(&self, dx: usize, dy: usize) -> Self {
        let falling = |m: usize, d: usize| (0..d).map(|i| (m - i) as i64).product::<i64>();
        let coeffs: Vec<Vec<T>> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(dx)
            .map(|(m, row)| {
                row.iter()
                    .enumerate()
                    .skip(dy)
                    .map(|(n, c)| c.clone() * T::from_int(falling(m, dx) * falling(n, dy)))
                    .collect()
            })
            .collect();
        Poly2::new(coeffs)
    }

    pub fn is_symmetric(&self) -> bool {
        let (dm, dn) = self.degrees();
        let d = dm.max(dn);
        (0..=d).all(|m| (0..=d).all(|n| self.coeff(m, n) == self.coeff(n, m)))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Poly2<U> {
        Poly2 {
            coeffs: self.coeffs.iter().map(|r| r.iter().map(&f).collect()).collect(),
        }
    }
}

/// `ν` with `p(a + x, b + y) = Σ ν_{m,n} x^m y^n`, by the double sum
/// `ν_{m,n} = Σ_{m₁≥m, n₁≥n} μ_{m₁,n₁} a^{m₁−m} b^{n₁−n} C(m₁,m) C(n₁,n)`.
pub fn shifted_expansion<T: Scalar>(p: &Poly2<T>, a: &T, b: &T) -> Poly2<T> {
    let (dm, dn) = p.degrees();
    let binom = |n: usize, k: usize| T::from_int(binomial(n, k).to_i64().expect("small binomial"));
    let mut out = vec![vec![T::zero(); dn + 1]; dm + 1];
    for (m, row) in out.iter_mut().enumerate() {
        for (n, slot) in row.iter_mut().enumerate() {
            let mut acc = T::zero();
            for m1 in m..=dm {
                for n1 in n..=dn {
                    let mu = p.coeff(m1, n1);
                    if mu.is_zero() {
                        continue;
                    }
                    acc = acc
                        + mu * a.pow_u((m1 - m) as u32)
                            * b.pow_u((n1 - n) as u32)
                            * binom(m1, m)
                            * binom(n1, n);
                }
            }
            *slot = acc;
        }
    }
    Poly2::new(out)
}

/// Tensor-product operator `Σ_{k,ℓ} f(k/n, ℓ/n) b_{k,n}(x) b_{ℓ,n}(y)` in
/// the monomial basis.
pub fn bernstein_2d(
    f: impl Fn(&Rational, &Rational) -> Rational,
    n: usize,
) -> Result<Poly2<Rational>> {
    if n == 0 {
        return domain("Bernstein degree must be at least 1");
    }
    let node = |k: usize| Rational::new(BigInt::from(k), BigInt::from(n));
    let grid: Vec<Vec<Rational>> = (0..=n)
        .map(|k| (0..=n).map(|l| f(&node(k), &node(l))).collect())
        .collect();
    Ok(Poly2::new(net_to_unit_monomials(&grid)))
}

/// Monomial coefficients (in `u, v ∈ [0,1]`) of a Bernstein control net.
fn net_to_unit_monomials(net: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = net.len() - 1;
    let binom: Vec<Rational> = binomial_row(n).into_iter().map(Rational::from_integer).collect();
    // differences along the first index, then along the second
    let cols: Vec<Vec<Rational>> = (0..=n)
        .map(|l| {
            let col: Vec<Rational> = net.iter().map(|r| r[l].clone()).collect();
            forward_differences(&col)
        })
        .collect();
    (0..=n)
        .map(|m| {
            let row: Vec<Rational> = cols.iter().map(|c| c[m].clone()).collect();
            forward_differences(&row)
                .into_iter()
                .enumerate()
                .map(|(k, d)| d * binom[m].clone() * binom[k].clone())
                .collect()
        })
        .collect()
}

/// Bernstein basis values `b_{k,n}(u)` for all `k`, via log-factorials.
struct BasisTable {
    ln_fact: Vec<f64>,
}

impl BasisTable {
    fn new(n: usize) -> Self {
        let mut ln_fact = vec![0.0; n + 1];
        for i in 1..=n {
            ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
        }
        BasisTable { ln_fact }
    }

    fn values(&self, n: usize, u: f64) -> Vec<f64> {
        if u <= 0.0 || u >= 1.0 {
            let mut v = vec![0.0; n + 1];
            v[if u <= 0.0 { 0 } else { n }] = 1.0;
            return v;
        }
        let (lu, lv) = (u.ln(), (-u).ln_1p());
        (0..=n)
            .map(|k| {
                let lc = self.ln_fact[n] - self.ln_fact[k] - self.ln_fact[n - k];
                (lc + k as f64 * lu + (n - k) as f64 * lv).exp()
            })
            .collect()
    }
}

/// `J̃` with its first and second partials at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jet2 {
    pub value: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dxy: f64,
    pub dyy: f64,
}

impl Jet2 {
    fn max_abs_diff(&self, o: &Jet2) -> [f64; 6] {
        [
            (self.value - o.value).abs(),
            (self.dx - o.dx).abs(),
            (self.dy - o.dy).abs(),
            (self.dxx - o.dxx).abs(),
            (self.dxy - o.dxy).abs(),
            (self.dyy - o.dyy).abs(),
        ]
    }
}

/// Sup errors on the validation grid for one ladder rung.
#[derive(Debug, Clone, Serialize)]
pub struct RungError {
    pub degree: usize,
    pub value: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dxy: f64,
    pub dyy: f64,
    pub max: f64,
}

/// Polynomial approximation of `J_ρ` on `[ε, 1−ε]²`.
///
/// Stored as the Bernstein net `F[k][ℓ] = J_ρ(ε + kL/n, ε + ℓL/n)`,
/// `L = 1 − 2ε`, of the tensor operator applied after the affine map
/// `u = (x − ε)/L`. The total degree is `K = 2n`.
#[derive(Debug, Clone)]
pub struct JTilde {
    pub rho: f64,
    pub eps: f64,
    pub delta: f64,
    pub n: usize,
    net: Vec<Vec<f64>>,
    pub ladder: Vec<RungError>,
}

impl JTilde {
    /// Net at a fixed degree; no validation.
    pub fn at_degree(rho: f64, eps: f64, n: usize) -> Result<Self> {
        check_params(rho, eps)?;
        if n == 0 {
            return domain("Bernstein degree must be at least 1");
        }
        let ev = JEvaluator::new(rho)?;
        let len = 1.0 - 2.0 * eps;
        let nodes: Vec<f64> = (0..=n).map(|k| eps + len * k as f64 / n as f64).collect();
        let net = if eps == 0.0 {
            // J on the boundary is min/max-free: J(0,·)=J(·,0)=0, J(1,y)=y
            zero_eps_net(&ev, &nodes)?
        } else {
            nodes
                .par_iter()
                .map(|&x| ev.tabulate(&[x], &nodes).map(|mut r| r.remove(0)))
                .collect::<Result<Vec<_>>>()?
        };
        Ok(JTilde {
            rho,
            eps,
            delta: f64::NAN,
            n,
            net,
            ladder: Vec::new(),
        })
    }

    pub fn net(&self) -> &[Vec<f64>] {
        &self.net
    }

    /// Total degree `K`.
    pub fn total_degree(&self) -> usize {
        2 * self.n
    }

    fn affine(&self) -> (f64, f64) {
        let len = 1.0 - 2.0 * self.eps;
        (1.0 / len, -self.eps / len)
    }

    fn jet_with(&self, table: &BasisTable, x: f64, y: f64) -> Jet2 {
        let (a, b) = self.affine();
        let wu = Weights::new(table, self.n, a * x + b);
        let wv = Weights::new(table, self.n, a * y + b);
        let r = self.contract_rows(&wu, wv.lo, wv.hi);
        finish_jet(&r, &wv, a)
    }

    /// `r[d][ℓ] = Σ_k W_d[k] F[k][ℓ]` for `ℓ` in `lo..=hi`.
    fn contract_rows(&self, wu: &Weights, lo: usize, hi: usize) -> [Vec<f64>; 3] {
        let n = self.n;
        let mut r = [vec![0.0; n + 1], vec![0.0; n + 1], vec![0.0; n + 1]];
        for k in wu.lo..=wu.hi {
            let row = &self.net[k][lo..=hi];
            let (w0, w1, w2) = (wu.w[0][k], wu.w[1][k], wu.w[2][k]);
            for (j, &fv) in row.iter().enumerate() {
                r[0][lo + j] += w0 * fv;
                r[1][lo + j] += w1 * fv;
                r[2][lo + j] += w2 * fv;
            }
        }
        r
    }

    /// Jets on the tensor grid `xs × ys`, row-major in `xs`.
    pub fn jets_grid(&self, xs: &[f64], ys: &[f64]) -> Vec<Jet2> {
        let table = BasisTable::new(self.n);
        let (a, b) = self.affine();
        let wys: Vec<Weights> = ys.iter().map(|&y| Weights::new(&table, self.n, a * y + b)).collect();
        xs.par_iter()
            .flat_map_iter(|&x| {
                let wu = Weights::new(&table, self.n, a * x + b);
                let r = self.contract_rows(&wu, 0, self.n);
                wys.iter().map(move |wv| finish_jet(&r, wv, a)).collect::<Vec<_>>()
            })
            .collect()
    }

    /// Value and partials up to order two at `(x, y)`.
    pub fn jet(&self, x: f64, y: f64) -> Jet2 {
        self.jet_with(&BasisTable::new(self.n), x, y)
    }

    pub fn jets(&self, pts: &[(f64, f64)]) -> Vec<Jet2> {
        let table = BasisTable::new(self.n);
        pts.par_iter().map(|&(x, y)| self.jet_with(&table, x, y)).collect()
    }

    /// Values only; cheaper than [`JTilde::jets`] by skipping the derivative weights.
    pub fn values(&self, pts: &[(f64, f64)]) -> Vec<f64> {
        let table = BasisTable::new(self.n);
        let (a, b) = self.affine();
        let window = |u: f64| {
            let w = table.values(self.n, u);
            let cut = w.iter().cloned().fold(0.0, f64::max) * 1e-20;
            let lo = w.iter().position(|&v| v > cut).unwrap_or(0);
            let hi = w.iter().rposition(|&v| v > cut).unwrap_or(self.n);
            (lo, hi, w)
        };
        pts.par_iter()
            .map(|&(x, y)| {
                let (xl, xh, wx) = window(a * x + b);
                let (yl, yh, wy) = window(a * y + b);
                (xl..=xh)
                    .map(|k| wx[k] * (yl..=yh).map(|l| self.net[k][l] * wy[l]).sum::<f64>())
                    .sum()
            })
            .collect()
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.jet(x, y).value
    }

    /// Upper bound on `log₂ c`, `c` the largest monomial coefficient in
    /// the original coordinates.
    ///
    /// With `u = ax + b`, the `u^p` coefficient of the net's polynomial is
    /// at most `max|F| C(n,p) 2^p` in size, and `|[x^m](ax+b)^p|` summed over
    /// `p ≥ m` is at most `a^m/(1−|b|)^{m+1}`.
    pub fn log2_max_abs_coeff_bound(&self) -> f64 {
        let n = self.n;
        let table = BasisTable::new(n);
        let ln2 = std::f64::consts::LN_2;
        let max_f = self.net.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let binom_part = (0..=n)
            .map(|p| (table.ln_fact[n] - table.ln_fact[p] - table.ln_fact[n - p]) / ln2 + p as f64)
            .fold(f64::MIN, f64::max);
        let (a, b) = self.affine();
        let q = 1.0 - b.abs();
        let affine_part = (0..=n)
            .map(|m| m as f64 * a.log2() - (m + 1) as f64 * q.log2())
            .fold(f64::MIN, f64::max);
        max_f.log2() + 2.0 * (binom_part + affine_part)
    }

    /// `log₂ c_γ` for `c_γ = 2cK⁴2^{2K}` with `c` bounded as above.
    pub fn log2_c_gamma(&self) -> f64 {
        let k = self.total_degree() as f64;
        1.0 + self.log2_max_abs_coeff_bound() + 4.0 * k.log2() + 2.0 * k
    }

    /// Exact monomial coefficients in the original coordinates.
    pub fn monomial_exact(&self) -> Result<Poly2<Rational>> {
        if self.n > EXACT_MONOMIAL_CAP {
            return Err(Error::Resource {
                what: "exact monomial expansion degree",
                size: self.n,
                cap: EXACT_MONOMIAL_CAP,
            });
        }
        let net: Vec<Vec<Rational>> = self
            .net
            .iter()
            .map(|r| r.iter().map(|v| Rational::from_double(*v)).collect())
            .collect();
        let unit = Poly2::new(net_to_unit_monomials(&net));
        let eps = rational_from_decimal(self.eps);
        let len = Rational::one() - eps.clone() * Rational::from_int(2);
        let a = Rational::one() / len;
        let b = -eps * a.clone();
        Ok(compose_affine(&unit, &a, &b))
    }

    pub fn to_file(&self, with_net: bool) -> Result<JTildeFile> {
        let exact = if self.n <= EXACT_MONOMIAL_CAP {
            Some(self.monomial_exact()?)
        } else {
            None
        };
        let coeffs = exact.as_ref().map(|p| {
            let mut out = Vec::new();
            for (m, row) in p.coeffs().iter().enumerate() {
                for (n, c) in row.iter().enumerate() {
                    if !c.is_zero() {
                        out.push((m, n, format_rational(c)));
                    }
                }
            }
            out
        });
        Ok(JTildeFile {
            k: self.total_degree(),
            degree_per_variable: self.n,
            rho: self.rho,
            eps: self.eps,
            delta: self.delta,
            max_abs_coeff: exact.as_ref().map(|p| p.max_abs_coeff().to_double()),
            log2_max_abs_coeff: match &exact {
                Some(p) => p.max_abs_coeff().to_double().log2(),
                None => self.log2_max_abs_coeff_bound(),
            },
            log2_c_gamma: self.log2_c_gamma(),
            coeffs,
            net: with_net.then(|| self.net.clone()),
            ladder: self.ladder.clone(),
        })
    }
}

/// `p(ax + b, ay + b)`.
fn compose_affine(p: &Poly2<Rational>, a: &Rational, b: &Rational) -> Poly2<Rational> {
    let (dm, dn) = p.degrees();
    let d = dm.max(dn);
    // s[p][m] = [x^m] (ax + b)^p
    let mut s = vec![vec![Rational::zero(); d + 1]; d + 1];
    s[0][0] = Rational::one();
    for q in 1..=d {
        for m in 0..=q {
            let mut v = b.clone() * s[q - 1][m].clone();
            if m > 0 {
                v += a.clone() * s[q - 1][m - 1].clone();
            }
            s[q][m] = v;
        }
    }
    let mut half = vec![vec![Rational::zero(); dn + 1]; d + 1];
    for q in 0..=dm {
        for m in 0..=q {
            if s[q][m].is_zero() {
                continue;
            }
            for n in 0..=dn {
                let c = p.coeff(q, n);
                if !c.is_zero() {
                    half[m][n] += s[q][m].clone() * c;
                }
            }
        }
    }
    let mut out = vec![vec![Rational::zero(); d + 1]; d + 1];
    for (m, row) in half.iter().enumerate() {
        for (q, c) in row.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for n in 0..=q {
                out[m][n] += c.clone() * s[q][n].clone();
            }
        }
    }
    Poly2::new(out)
}

/// Weights `W_d[k]` with `∂^d/∂u^d Σ_k F_k b_{k,n}(u) = Σ_k W_d[k] F_k`,
/// kept on the index window outside of which they are negligible.
struct Weights {
    lo: usize,
    hi: usize,
    w: [Vec<f64>; 3],
}

impl Weights {
    fn new(table: &BasisTable, n: usize, u: f64) -> Self {
        let b0 = table.values(n, u);
        let top = b0.iter().cloned().fold(0.0, f64::max);
        let cut = top * 1e-20;
        let lo = b0.iter().position(|&w| w > cut).unwrap_or(0).saturating_sub(2);
        let hi = (b0.iter().rposition(|&w| w > cut).unwrap_or(n) + 2).min(n);
        let b1 = if n >= 1 { table.values(n - 1, u) } else { Vec::new() };
        let b2 = if n >= 2 { table.values(n - 2, u) } else { Vec::new() };
        let at = |v: &[f64], k: isize| if k < 0 { 0.0 } else { v.get(k as usize).copied().unwrap_or(0.0) };
        let nf = n as f64;
        let mut w = [vec![0.0; n + 1], vec![0.0; n + 1], vec![0.0; n + 1]];
        for k in lo..=hi {
            let ki = k as isize;
            w[0][k] = b0[k];
            w[1][k] = nf * (at(&b1, ki - 1) - at(&b1, ki));
            w[2][k] = nf * (nf - 1.0) * (at(&b2, ki - 2) - 2.0 * at(&b2, ki - 1) + at(&b2, ki));
        }
        Weights { lo, hi, w }
    }
}

fn finish_jet(r: &[Vec<f64>; 3], wv: &Weights, a: f64) -> Jet2 {
    let dot = |row: &[f64], d: usize| -> f64 {
        (wv.lo..=wv.hi).map(|l| row[l] * wv.w[d][l]).sum()
    };
    Jet2 {
        value: dot(&r[0], 0),
        dx: a * dot(&r[1], 0),
        dy: a * dot(&r[0], 1),
        dxx: a * a * dot(&r[2], 0),
        dxy: a * a * dot(&r[1], 1),
        dyy: a * a * dot(&r[0], 2),
    }
}

fn zero_eps_net(ev: &JEvaluator<f64>, nodes: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = nodes.len() - 1;
    let inner = &nodes[1..n];
    let mut net = vec![vec![0.0; n + 1]; n + 1];
    for (i, &x) in nodes.iter().enumerate() {
        net[n][i] = x;
        net[i][n] = x;
    }
    if !inner.is_empty() {
        let rows = inner
            .par_iter()
            .map(|&x| ev.tabulate(&[x], inner).map(|mut r| r.remove(0)))
            .collect::<Result<Vec<_>>>()?;
        for (i, row) in rows.into_iter().enumerate() {
            net[i + 1][1..n].copy_from_slice(&row);
        }
    }
    Ok(net)
}

fn check_params(rho: f64, eps: f64) -> Result<()> {
    if !(rho.abs() < 1.0) {
        return domain(format!("rho must lie in (−1,1), got {rho}"));
    }
    if !(0.0..0.5).contains(&eps) {
        return domain(format!("eps must lie in [0,1/2), got {eps}"));
    }
    Ok(())
}

/// Validation grid side length.
pub const VALIDATION_GRID: usize = 101;

/// Closed-form jets of `J_ρ` on the validation grid.
fn reference_jets(rho: f64, eps: f64) -> Result<(Vec<f64>, Vec<Jet2>)> {
    let ev = JEvaluator::new(rho)?;
    let lo = if eps == 0.0 { 1e-3 } else { eps };
    let g: Vec<f64> = (0..VALIDATION_GRID)
        .map(|i| lo + (1.0 - 2.0 * lo) * i as f64 / (VALIDATION_GRID - 1) as f64)
        .collect();
    let values = ev.tabulate(&g, &g)?;
    let mut pts = Vec::with_capacity(g.len() * g.len());
    for &x in &g {
        for &y in &g {
            pts.push((x, y));
        }
    }
    let jets = pts
        .par_iter()
        .enumerate()
        .map(|(idx, &(x, y))| {
            let (dx, dy) = ev.grad(x, y)?;
            let h = ev.hessian(x, y)?;
            Ok(Jet2 {
                value: values[idx / g.len()][idx % g.len()],
                dx,
                dy,
                dxx: h.a,
                dxy: h.b,
                dyy: h.d,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((g, jets))
}

fn rung_error(jt: &JTilde, grid: &[f64], reference: &[Jet2]) -> RungError {
    let approx = jt.jets_grid(grid, grid);
    let mut e = [0.0f64; 6];
    for (a, r) in approx.iter().zip(reference) {
        for (slot, d) in e.iter_mut().zip(a.max_abs_diff(r)) {
            *slot = slot.max(d);
        }
    }
    RungError {
        degree: jt.n,
        value: e[0],
        dx: e[1],
        dy: e[2],
        dxx: e[3],
        dxy: e[4],
        dyy: e[5],
        max: e.iter().cloned().fold(0.0, f64::max),
    }
}

/// Starting degree of the doubling ladder.
pub const LADDER_START: usize = 8;

/// Doubles the per-variable degree from [`LADDER_START`] until the sup
/// error of the value and all partials up to order two on the validation
/// grid is at most `delta`.
pub fn approximate_j(rho: f64, eps: f64, delta: f64) -> Result<JTilde> {
    approximate_j_capped(rho, eps, delta, DEFAULT_DEGREE_CAP)
}

pub fn approximate_j_capped(rho: f64, eps: f64, delta: f64, cap: usize) -> Result<JTilde> {
    check_params(rho, eps)?;
    if !(delta > 0.0) {
        return domain("delta must be positive");
    }
    let (grid, reference) = reference_jets(rho, eps)?;
    let mut ladder = Vec::new();
    let mut n = LADDER_START;
    while n <= cap {
        let mut jt = JTilde::at_degree(rho, eps, n)?;
        let err = rung_error(&jt, &grid, &reference);
        let done = err.max <= delta;
        ladder.push(err);
        if done {
            jt.delta = delta;
            jt.ladder = ladder;
            return Ok(jt);
        }
        n *= 2;
    }
    let best = ladder.last().map_or(f64::NAN, |r| r.max);
    Err(Error::NoConvergence(format!(
        "Bernstein degree cap {cap} reached with C2 error {best:.3e} > {delta}"
    )))
}

/// Serialized form of `J̃`.
#[derive(Debug, Clone, Serialize)]
pub struct JTildeFile {
    #[serde(rename = "K")]
    pub k: usize,
    pub degree_per_variable: usize,
    pub rho: f64,
    pub eps: f64,
    pub delta: f64,
    pub max_abs_coeff: Option<f64>,
    pub log2_max_abs_coeff: f64,
    pub log2_c_gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<(usize, usize, String)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub net: Option<Vec<Vec<f64>>>,
    pub ladder: Vec<RungError>,
}

/// `err(last) / err(third from last)`, i.e. `error(4n)/error(n)`.
pub fn ladder_ratio(ladder: &[RungError]) -> Option<f64> {
    let k = ladder.len();
    (k >= 3).then(|| ladder[k - 1].max / ladder[k - 3].max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> Rational {
        Rational::from_ratio(a, b)
    }

    #[test]
    fn one_dimensional_examples() {
        let p = bernstein_1d(|x| x.clone(), 5).unwrap();
        assert_eq!(p.coeffs, vec![q(0, 1), q(1, 1)]);
        let one = bernstein_1d(|_| q(1, 1), 7).unwrap();
        assert_eq!(one.coeffs, vec![q(1, 1)]);
        let sq = bernstein_1d(|x| x * x, 2).unwrap();
        assert_eq!(sq.coeffs, vec![q(0, 1), q(1, 2), q(1, 2)]);
        assert!(bernstein_1d(|x| x.clone(), 0).is_err());
    }

    #[test]
    fn two_dimensional_examples() {
        let p = bernstein_2d(|x, y| x * y, 4).unwrap();
        assert_eq!(p.degrees(), (1, 1));
        assert_eq!(p.coeff(1, 1), q(1, 1));
        let p = bernstein_2d(|x, y| x * x * y, 2).unwrap();
        assert_eq!(p.coeff(1, 1), q(1, 2));
        assert_eq!(p.coeff(2, 1), q(1, 2));
        assert_eq!(p.coeff(2, 0), q(0, 1));
    }

    #[test]
    fn shift_examples() {
        let p = Poly2::from_terms(&[(2, 0, q(1, 1))]);
        let nu = shifted_expansion(&p, &q(1, 1), &q(0, 1));
        assert_eq!(nu.coeff(0, 0), q(1, 1));
        assert_eq!(nu.coeff(1, 0), q(2, 1));
        assert_eq!(nu.coeff(2, 0), q(1, 1));
        let xy = Poly2::from_terms(&[(1, 1, q(1, 1))]);
        assert_eq!(shifted_expansion(&xy, &q(0, 1), &q(0, 1)), xy);
    }

    #[test]
    fn partials_of_monomials() {
        let p = Poly2::from_terms(&[(3, 2, q(2, 1)), (0, 1, q(5, 1))]);
        let d = p.partial(2, 1);
        assert_eq!(d.coeff(1, 1), q(24, 1));
        assert_eq!(d.degrees(), (1, 1));
    }

    #[test]
    fn net_matches_exact_expansion() {
        let jt = JTilde::at_degree(0.5, 0.1, 6).unwrap();
        let exact = jt.monomial_exact().unwrap();
        for &(x, y) in &[(0.2, 0.3), (0.5, 0.5), (0.85, 0.15)] {
            let jet = jt.jet(x, y);
            let e = exact.eval(&Rational::from_double(x), &Rational::from_double(y));
            assert!((jet.value - e.to_double()).abs() < 1e-12);
            let exx = exact.partial(2, 0).eval(&Rational::from_double(x), &Rational::from_double(y));
            assert!((jet.dxx - exx.to_double()).abs() < 1e-9);
            let exy = exact.partial(1, 1).eval(&Rational::from_double(x), &Rational::from_double(y));
            assert!((jet.dxy - exy.to_double()).abs() < 1e-9);
        }
        let bound = jt.log2_max_abs_coeff_bound();
        assert!(exact.max_abs_coeff().to_double().log2() <= bound);
    }

    #[test]
    fn rho_zero_is_xy() {
        let jt = approximate_j(0.0, 0.1, 1e-6).unwrap();
        assert_eq!(jt.n, LADDER_START);
        let exact = jt.monomial_exact().unwrap();
        assert!((exact.coeff(1, 1).to_double() - 1.0).abs() < 1e-9);
    }
}
