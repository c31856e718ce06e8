//! Empirical checkers for the base-case and tensorized quadrant
//! inequalities, Majority is Stablest, the Gaussian block-sum construction,
//! and Rényi correlation.

use crate::cube::BooleanFunction;
use crate::delta::delta_recursive;
use crate::error::{domain, precondition, Error, Result};
use crate::gaussian::JEvaluator;
use crate::linalg::{jacobi_eigen, Mat};
use crate::scalar::{ratio_to_f64, Rational, Scalar};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

/// Safety factor applied to grid sups.
pub const GRID_SAFETY: f64 = 1.01;
/// Side of the grid used by [`base_case_constant`].
pub const BASE_CASE_GRID: usize = 200;
/// Factor turning `sup|∂³J|` into the Taylor-remainder constant:
/// `(1/6)(|x|+|y|)³ ≤ (4/6)(|x|³+|y|³)`, doubled for slack.
pub const TAYLOR_FACTOR: f64 = 8.0 / 6.0;
/// Numerical slack for float comparisons in reports.
pub const REPORT_TOLERANCE: f64 = 1e-12;

/// Outcome of one inequality check; `ok ⇔ lhs ≤ rhs_main + error_term + tol`.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs_main: f64,
    pub error_term: f64,
    pub constant_used: f64,
    pub constant_exponent: f64,
    pub tolerance: f64,
    pub ok: bool,
    /// `rhs_main + error_term − lhs`.
    pub margin: f64,
    pub witness: Value,
}

impl InequalityReport {
    pub fn new(lhs: f64, rhs_main: f64, error_term: f64, constant: f64, tolerance: f64) -> Self {
        let margin = rhs_main + error_term - lhs;
        InequalityReport {
            lhs,
            rhs_main,
            error_term,
            constant_used: constant,
            constant_exponent: 0.0,
            tolerance,
            ok: margin >= -tolerance,
            margin,
            witness: Value::Null,
        }
    }

    pub fn with_witness(mut self, w: Value) -> Self {
        self.witness = w;
        self
    }
}

/// Joint law on a finite product alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatedMeasure {
    p: Vec<Vec<Rational>>,
}

impl CorrelatedMeasure {
    pub fn new(p: Vec<Vec<Rational>>) -> Result<Self> {
        let cols = p.first().map_or(0, |r| r.len());
        if p.is_empty() || cols == 0 {
            return domain("empty joint table");
        }
        if p.iter().any(|r| r.len() != cols) {
            return domain("ragged joint table");
        }
        if p.iter().flatten().any(|v| v.is_negative()) {
            return domain("negative probability");
        }
        let total: Rational = p.iter().flatten().cloned().sum();
        if !total.is_one() {
            return domain(format!("total mass {total} is not 1"));
        }
        Ok(CorrelatedMeasure { p })
    }

    /// `x, y ∈ {±1}` uniform with `E xy = ρ`.
    pub fn binary(rho: &Rational) -> Result<Self> {
        let q = Rational::new(1.into(), 4.into());
        let hi = (Rational::one() + rho.clone()) * q.clone();
        let lo = (Rational::one() - rho.clone()) * q;
        Self::new(vec![vec![hi.clone(), lo.clone()], vec![lo, hi]])
    }

    /// Uniform `x` on `k` symbols; `y = x` with probability `ρ`, otherwise
    /// an independent uniform draw.
    pub fn resample(k: usize, rho: &Rational) -> Result<Self> {
        if k == 0 {
            return domain("alphabet must be nonempty");
        }
        let kk = Rational::from_int(k as i64);
        let base = (Rational::one() - rho.clone()) / (kk.clone() * kk.clone());
        let diag = rho.clone() / kk + base.clone();
        Self::new(
            (0..k)
                .map(|a| (0..k).map(|b| if a == b { diag.clone() } else { base.clone() }).collect())
                .collect(),
        )
    }

    pub fn product(left: &[Rational], right: &[Rational]) -> Result<Self> {
        Self::new(
            left.iter()
                .map(|a| right.iter().map(|b| a.clone() * b.clone()).collect())
                .collect(),
        )
    }

    pub fn table(&self) -> &[Vec<Rational>] {
        &self.p
    }

    pub fn marginals(&self) -> (Vec<Rational>, Vec<Rational>) {
        let rows = self.p.iter().map(|r| r.iter().cloned().sum()).collect();
        let cols = (0..self.p[0].len())
            .map(|j| self.p.iter().map(|r| r[j].clone()).sum())
            .collect();
        (rows, cols)
    }
}

/// Maximal correlation: the second singular value of
/// `B'[a][b] = μ(a,b)/√(μ₁(a)μ₂(b))`, from the eigenvalues of `B'ᵀB'`.
pub fn renyi_correlation(mu: &CorrelatedMeasure) -> Result<f64> {
    let (r, c) = mu.marginals();
    if r.iter().chain(&c).any(|m| m.is_zero()) {
        return precondition("zero-mass marginal symbol");
    }
    let rows: Vec<Vec<f64>> = mu
        .table()
        .iter()
        .zip(&r)
        .map(|(row, ra)| {
            row.iter()
                .zip(&c)
                .map(|(v, cb)| ratio_to_f64(v) / (ratio_to_f64(ra) * ratio_to_f64(cb)).sqrt())
                .collect()
        })
        .collect();
    let b = Mat::from_rows(&rows);
    let (vals, _) = jacobi_eigen(&b.transpose().matmul(&b));
    // largest eigenvalue is 1 (constant functions)
    Ok(if vals.len() < 2 {
        0.0
    } else {
        vals[vals.len() - 2].max(0.0).sqrt()
    })
}

fn check_rho_open(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho < 1.0) {
        return domain(format!("rho must lie in (0,1), got {rho}"));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 0.5) {
        return domain(format!("eps must lie in (0,1/2), got {eps}"));
    }
    Ok(())
}

/// `1.01 · max` of the four third partials of `J_ρ` over a 200×200 grid on
/// `[ε, 1−ε]²`.
pub fn base_case_constant(rho: f64, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    if rho == 0.0 {
        return Ok(0.0);
    }
    let ev = JEvaluator::new(rho)?;
    let m = BASE_CASE_GRID;
    let g: Vec<f64> = (0..m).map(|i| eps + (1.0 - 2.0 * eps) * i as f64 / (m - 1) as f64).collect();
    let sup = g
        .iter()
        .map(|&x| {
            g.iter().try_fold(0.0f64, |best, &y| Ok(best.max(ev.third(x, y)?.max_abs())))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(GRID_SAFETY * sup)
}

/// Finite joint law of a pair `(X, Y)`: atoms `(x, y, weight)`.
#[derive(Debug, Clone, Serialize)]
pub struct PairDistribution {
    pub atoms: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, Copy)]
struct PairMoments {
    mx: f64,
    my: f64,
    corr: f64,
    abs3x: f64,
    abs3y: f64,
}

impl PairDistribution {
    fn moments(&self) -> PairMoments {
        let e = |f: &dyn Fn(f64, f64) -> f64| self.atoms.iter().map(|&(x, y, w)| w * f(x, y)).sum::<f64>();
        let mx = e(&|x, _| x);
        let my = e(&|_, y| y);
        let vx = e(&|x, _| (x - mx) * (x - mx));
        let vy = e(&|_, y| (y - my) * (y - my));
        let cov = e(&|x, y| (x - mx) * (y - my));
        let denom = (vx * vy).sqrt();
        PairMoments {
            mx,
            my,
            corr: if denom > 1e-300 { cov / denom } else { 0.0 },
            abs3x: e(&|x, _| (x - mx).abs().powi(3)),
            abs3y: e(&|_, y| (y - my).abs().powi(3)),
        }
    }

    pub fn correlation(&self) -> f64 {
        self.moments().corr
    }

    /// Four atoms uniform in `[ε,1−ε]²` with uniform-simplex weights,
    /// redrawn until the correlation lies in `[0, ρ]`.
    pub fn random_admissible(rng: &mut impl Rng, rho: f64, eps: f64) -> Self {
        loop {
            let raw: Vec<f64> = (0..4).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
            let total: f64 = raw.iter().sum();
            let atoms = raw
                .iter()
                .map(|w| {
                    let x = eps + (1.0 - 2.0 * eps) * rng.gen::<f64>();
                    let y = eps + (1.0 - 2.0 * eps) * rng.gen::<f64>();
                    (x, y, w / total)
                })
                .collect();
            let d = PairDistribution { atoms };
            let c = d.correlation();
            if (0.0..=rho).contains(&c) {
                return d;
            }
        }
    }
}

/// `E J_ρ(X,Y) ≤ J_ρ(EX,EY) + C(E|X−EX|³ + E|Y−EY|³)` with
/// `C = constant · 8/6`.
pub fn check_base_case(
    dist: &PairDistribution,
    rho: f64,
    eps: f64,
    constant: f64,
) -> Result<InequalityReport> {
    check_rho_open(rho)?;
    let lo = eps - 1e-15;
    let hi = 1.0 - eps + 1e-15;
    if dist.atoms.iter().any(|&(x, y, w)| !(lo..=hi).contains(&x) || !(lo..=hi).contains(&y) || w < 0.0) {
        return domain("atoms must lie in [ε,1−ε]² with nonnegative weights");
    }
    let total: f64 = dist.atoms.iter().map(|a| a.2).sum();
    if (total - 1.0).abs() > 1e-12 {
        return domain(format!("weights sum to {total}, not 1"));
    }
    let m = dist.moments();
    if m.corr < -1e-12 || m.corr > rho + 1e-12 {
        return domain(format!("correlation {} outside [0, {rho}]", m.corr));
    }
    let ev = JEvaluator::new(rho)?;
    let mut lhs = 0.0;
    for &(x, y, w) in &dist.atoms {
        lhs += w * ev.value(x, y)?;
    }
    let c = constant * TAYLOR_FACTOR;
    let report = InequalityReport::new(
        lhs,
        ev.value(m.mx, m.my)?,
        c * (m.abs3x + m.abs3y),
        c,
        REPORT_TOLERANCE,
    );
    let witness = json!({"atoms": dist.atoms, "correlation": m.corr});
    Ok(report.with_witness(witness))
}

/// Summary of a randomized base-case sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub trials: usize,
    pub passed: usize,
    pub constant: f64,
    pub worst: InequalityReport,
}

/// `trials` admissible 4-atom distributions, seeded; keeps the smallest
/// margin as witness.
pub fn base_case_sweep(rho: f64, eps: f64, trials: usize, seed: u64) -> Result<SweepSummary> {
    let constant = base_case_constant(rho, eps)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dists: Vec<PairDistribution> = (0..trials)
        .map(|_| PairDistribution::random_admissible(&mut rng, rho, eps))
        .collect();
    let reports = dists
        .par_iter()
        .map(|d| check_base_case(d, rho, eps, constant))
        .collect::<Result<Vec<_>>>()?;
    let passed = reports.iter().filter(|r| r.ok).count();
    let worst = reports
        .into_iter()
        .min_by(|a, b| a.margin.total_cmp(&b.margin))
        .ok_or_else(|| Error::Precondition("no trials".into()))?;
    Ok(SweepSummary {
        trials,
        passed,
        constant,
        worst,
    })
}

/// The tensorized error constant split as `C_coeff · ε^{−C_exp}`.
///
/// The base-case constant already depends on `ε`, so the exponent is 0.
pub fn tensorization_constant(rho: f64, eps: f64) -> Result<(f64, f64)> {
    Ok((base_case_constant(rho, eps)? * TAYLOR_FACTOR, 0.0))
}

/// Cap on the dimension for the exhaustive correlated expectation.
pub const TENSOR_CAP: usize = 8;

/// `E J_ρ(f(X), g(Y)) ≤ J_ρ(Ef, Eg) + C_coeff ε^{−C_exp} (Δ_n(f) + Δ_n(g))`
/// for `Y ∼_ρ X`, with the expectation summed over all `4^n` pairs.
pub fn check_tensorization<T: Scalar>(
    f: &BooleanFunction<T>,
    g: &BooleanFunction<T>,
    rho: f64,
    eps: f64,
) -> Result<InequalityReport> {
    let constants = tensorization_constant(rho, eps)?;
    check_tensorization_with(f, g, rho, eps, constants)
}

pub fn check_tensorization_with<T: Scalar>(
    f: &BooleanFunction<T>,
    g: &BooleanFunction<T>,
    rho: f64,
    eps: f64,
    (c_coeff, c_exp): (f64, f64),
) -> Result<InequalityReport> {
    check_rho_open(rho)?;
    check_eps(eps)?;
    let n = f.n();
    if g.n() != n {
        return Err(Error::DimensionMismatch { left: n, right: g.n() });
    }
    if n > TENSOR_CAP {
        return Err(Error::Resource {
            what: "exhaustive tensorization dimension",
            size: n,
            cap: TENSOR_CAP,
        });
    }
    let slack = if T::is_exact() { T::zero() } else { T::from_double(1e-12) };
    let lo = T::from_double(eps) - slack.clone();
    let hi = T::one() - T::from_double(eps) + slack;
    for h in [f, g] {
        if h.values().iter().any(|v| *v < lo || *v > hi) {
            return precondition("function values must lie in [ε, 1−ε]");
        }
    }
    let fv: Vec<f64> = f.values().iter().map(|v| v.to_double()).collect();
    let gv: Vec<f64> = g.values().iter().map(|v| v.to_double()).collect();
    let ev = JEvaluator::new(rho)?;
    let agree = (1.0 + rho) / 4.0;
    let disagree = (1.0 - rho) / 4.0;
    let weights: Vec<f64> = (0..=n)
        .map(|d| agree.powi((n - d) as i32) * disagree.powi(d as i32))
        .collect();
    let rows = fv
        .par_iter()
        .enumerate()
        .map(|(x, &a)| {
            gv.iter().enumerate().try_fold(0.0, |acc, (y, &b)| {
                Ok(acc + weights[(x ^ y).count_ones() as usize] * ev.value(a, b)?)
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let lhs: f64 = rows.iter().sum();
    let ef = f.mean().to_double();
    let eg = g.mean().to_double();
    let delta = delta_recursive(f).to_double() + delta_recursive(g).to_double();
    let scale = c_coeff * eps.powf(-c_exp);
    let mut report = InequalityReport::new(
        lhs,
        ev.value(ef, eg)?,
        scale * delta,
        c_coeff,
        1e-10,
    );
    report.constant_exponent = c_exp;
    Ok(report.with_witness(json!({
        "n": n,
        "mean_f": ef,
        "mean_g": eg,
        "delta_sum": delta,
        "f": fv,
        "g": gv,
    })))
}

/// Regression constant for the Majority-is-Stablest error term at the
/// default `ρ`: 1.5 times the largest ratio
/// `(S_ρ − J_ρ(Ef,Ef)) / (log log(1/τ)/log(1/τ))` over `Maj_n`,
/// `n = 5, 7, …, 15`, at `ρ = 1/2`. Not a certified constant.
pub const MIST_FITTED_CONSTANT: f64 = 0.044;

/// Majority-is-Stablest report; `constant_used` is the `C(ρ)` applied.
#[derive(Debug, Clone, Serialize)]
pub struct MistReport {
    pub stability: f64,
    pub j_value: f64,
    pub gap: f64,
    pub max_influence: f64,
    pub rate: Option<f64>,
    pub certified: bool,
    pub report: InequalityReport,
}

/// `log log(1/τ) / log(1/τ)`, clamped at 0 where `log(1/τ) ≤ 1`.
pub fn mist_rate(tau: f64) -> Option<f64> {
    if !(tau > 0.0) {
        return None;
    }
    let l = (1.0 / tau).ln();
    Some(if l <= 1.0 { 0.0 } else { l.ln() / l })
}

/// `S_ρ(f) ≤ J_ρ(Ef, Ef) + C(ρ) · log log(1/τ)/log(1/τ)`.
pub fn check_mist<T: Scalar>(
    f: &BooleanFunction<T>,
    rho: f64,
    constant: Option<f64>,
) -> Result<MistReport> {
    check_rho_open(rho)?;
    if f.values().iter().any(|v| *v < T::zero() || *v > T::one()) {
        return precondition("f must take values in [0,1]");
    }
    let fe = f.fourier()?;
    let rho_t = T::from_double(rho);
    let stability = fe.stability_bilinear(fe, &rho_t)?.to_double();
    let mean = f.mean().to_double();
    let ev = JEvaluator::new(rho)?;
    let j = if mean <= 0.0 || mean >= 1.0 {
        // J(0,0) = 0 and J(1,1) = 1
        mean
    } else {
        ev.value(mean, mean)?
    };
    let tau = fe.max_influence().to_double();
    let rate = mist_rate(tau);
    let c = constant.unwrap_or(MIST_FITTED_CONSTANT);
    let error = rate.map_or(0.0, |r| c * r);
    let report = InequalityReport::new(stability, j, error, c, 1e-12).with_witness(json!({
        "n": f.n(),
        "mean": mean,
        "tau": tau,
    }));
    Ok(MistReport {
        stability,
        j_value: j,
        gap: stability - j,
        max_influence: tau,
        rate,
        certified: constant.is_some(),
        report,
    })
}

/// Borell block-sum Monte Carlo result.
#[derive(Debug, Clone, Serialize)]
pub struct BorellReport {
    pub trials: usize,
    pub stderr: f64,
    pub cube_lhs: f64,
    pub cube_stderr: f64,
    pub block_size: usize,
    pub report: InequalityReport,
}

/// `E J(f₁(G₁), f₂(G₂)) ≤ J(E f₁(G₁), E f₂(G₂))` for `ρ`-correlated standard
/// Gaussian vectors in `ℝ^d`, by Monte Carlo. The cube approximation with
/// `G = m^{−1/2}(Σ_{i≤m} X_i)` per coordinate is estimated alongside.
#[allow(clippy::too_many_arguments)]
pub fn borell_block_check(
    f1: &(dyn Fn(&[f64]) -> f64 + Sync),
    f2: &(dyn Fn(&[f64]) -> f64 + Sync),
    d: usize,
    rho: f64,
    eps: f64,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<BorellReport> {
    if d == 0 || d > 3 {
        return domain(format!("dimension must be 1..=3, got {d}"));
    }
    if !(0.0..1.0).contains(&rho) {
        return domain(format!("rho must lie in [0,1), got {rho}"));
    }
    if trials < 2 || m == 0 {
        return domain("need at least two trials and a positive block size");
    }
    let ev = JEvaluator::new(rho)?;
    let r = (1.0 - rho * rho).sqrt();
    let clamp = |v: f64| -> Result<f64> {
        if v < eps - 1e-15 || v > 1.0 - eps + 1e-15 {
            return precondition(format!("function value {v} outside [ε, 1−ε]"));
        }
        Ok(v)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g1 = vec![0.0; d];
    let mut g2 = vec![0.0; d];
    let mut samples = Vec::with_capacity(trials);
    for _ in 0..trials {
        for k in 0..d {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            g1[k] = a;
            g2[k] = rho * a + r * b;
        }
        samples.push((clamp(f1(&g1))?, clamp(f2(&g2))?));
    }
    let agree = Binomial::new(m as u64, (1.0 + rho) / 2.0)
        .map_err(|e| Error::Domain(e.to_string()))?;
    let scale = 1.0 / (m as f64).sqrt();
    let mut cube = Vec::with_capacity(trials);
    for _ in 0..trials {
        for k in 0..d {
            let a = agree.sample(&mut rng);
            let plus_a = Binomial::new(a, 0.5).map_err(|e| Error::Domain(e.to_string()))?.sample(&mut rng);
            let plus_d = Binomial::new(m as u64 - a, 0.5)
                .map_err(|e| Error::Domain(e.to_string()))?
                .sample(&mut rng);
            let s_agree = 2.0 * plus_a as f64 - a as f64;
            let s_dis = 2.0 * plus_d as f64 - (m as u64 - a) as f64;
            g1[k] = (s_agree + s_dis) * scale;
            g2[k] = (s_agree - s_dis) * scale;
        }
        cube.push((clamp(f1(&g1))?, clamp(f2(&g2))?));
    }
    let stats = |pairs: &[(f64, f64)]| -> Result<(f64, f64, f64, f64)> {
        let vals = pairs
            .par_iter()
            .map(|&(a, b)| ev.value(a, b))
            .collect::<Result<Vec<f64>>>()?;
        let nf = pairs.len() as f64;
        let mean = vals.iter().sum::<f64>() / nf;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
        let e1 = pairs.iter().map(|p| p.0).sum::<f64>() / nf;
        let e2 = pairs.iter().map(|p| p.1).sum::<f64>() / nf;
        Ok((mean, (var / nf).sqrt(), e1, e2))
    };
    let (lhs, se, e1, e2) = stats(&samples)?;
    let (cube_lhs, cube_se, _, _) = stats(&cube)?;
    let rhs = ev.value(e1, e2)?;
    let report = InequalityReport::new(lhs, rhs, 3.0 * se, 3.0, 0.0).with_witness(json!({
        "mean_f1": e1,
        "mean_f2": e2,
        "dimension": d,
    }));
    Ok(BorellReport {
        trials,
        stderr: se,
        cube_lhs,
        cube_stderr: cube_se,
        block_size: m,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{constant, dictator, majority};

    fn q(a: i64, b: i64) -> Rational {
        Rational::from_ratio(a, b)
    }

    #[test]
    fn renyi_examples() {
        let prod = CorrelatedMeasure::product(&[q(1, 3), q(2, 3)], &[q(1, 2), q(1, 4), q(1, 4)]).unwrap();
        assert!(renyi_correlation(&prod).unwrap() < 1e-7);
        let bin = CorrelatedMeasure::binary(&q(-2, 5)).unwrap();
        assert!((renyi_correlation(&bin).unwrap() - 0.4).abs() < 1e-12);
        let res = CorrelatedMeasure::resample(3, &q(3, 10)).unwrap();
        assert!((renyi_correlation(&res).unwrap() - 0.3).abs() < 1e-12);
        assert!(CorrelatedMeasure::new(vec![vec![q(1, 2)], vec![q(1, 4)]]).is_err());
        let dead = CorrelatedMeasure::new(vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(0, 1)]]).unwrap();
        assert!(renyi_correlation(&dead).is_err());
    }

    #[test]
    fn base_case_basics() {
        let c = base_case_constant(0.5, 0.1).unwrap();
        assert!(c > 0.0 && c.is_finite());
        assert!(base_case_constant(0.5, 0.2).unwrap() <= c);
        assert_eq!(base_case_constant(0.0, 0.1).unwrap(), 0.0);
        let degenerate = PairDistribution {
            atoms: vec![(0.3, 0.6, 1.0)],
        };
        let r = check_base_case(&degenerate, 0.5, 0.1, c).unwrap();
        assert!(r.ok && r.error_term == 0.0 && r.margin.abs() < 1e-15);
        let anti = PairDistribution {
            atoms: vec![(0.2, 0.8, 0.5), (0.8, 0.2, 0.5)],
        };
        assert!(check_base_case(&anti, 0.5, 0.1, c).is_err());
    }

    #[test]
    fn mist_controls() {
        let d = dictator::<f64>(3, 1).unwrap();
        let r = check_mist(&d, 0.5, None).unwrap();
        assert!((r.stability - 0.375).abs() < 1e-15);
        assert!((r.j_value - 1.0 / 3.0).abs() < 1e-9);
        assert!(!r.report.ok);
        let c = constant(3, 0.5f64).unwrap();
        let r = check_mist(&c, 0.5, None).unwrap();
        assert!(r.report.ok && r.rate.is_none());
        let m = majority::<f64>(5).unwrap();
        assert!(check_mist(&m, 0.5, None).unwrap().report.ok);
    }

    #[test]
    fn tensorization_constant_pair_is_tight() {
        let c = constant(3, 0.4f64).unwrap();
        let r = check_tensorization(&c, &c, 0.4, 0.1).unwrap();
        assert!(r.ok && r.error_term == 0.0 && r.margin.abs() < 1e-9);
    }

    #[test]
    fn borell_constant_functions() {
        let f = |_: &[f64]| 0.3;
        let r = borell_block_check(&f, &f, 2, 0.5, 0.1, 20, 50, 1).unwrap();
        assert!(r.report.ok && r.stderr < 1e-12);
    }
}
