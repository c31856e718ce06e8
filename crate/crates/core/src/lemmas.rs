//! Numeric instantiations of the two-point Taylor bound and of the
//! high/low Fourier split used to control the quartic error terms.

use crate::bernstein::{shifted_expansion, JTilde, Poly2};
use crate::cube::{BooleanFunction, FourierExpansion, RangeTag};
use crate::delta::restricted_level_one;
use crate::error::{domain, Result};
use crate::scalar::{Rational, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const SAMPLE_TOLERANCE: f64 = 1e-12;

/// Two-point values `(h(0), h(1))` and their coefficients
/// `ĥ(j) = (h(0) + (−1)^j h(1))/2`.
fn hat<T: Scalar>(h: &[T; 2]) -> (T, T) {
    let half = T::half();
    (
        (h[0].clone() + h[1].clone()) * half.clone(),
        (h[0].clone() - h[1].clone()) * half,
    )
}

/// `E_{x, y ∼_ρ' x} p(h₀(x), h₁(y))` over one correlated bit pair.
pub fn two_point_expectation<T: Scalar>(p: impl Fn(&T, &T) -> T, rho: &T, h0: &[T; 2], h1: &[T; 2]) -> T {
    let quarter = T::from_ratio(1, 4);
    let same = (T::one() + rho.clone()) * quarter.clone();
    let diff = (T::one() - rho.clone()) * quarter;
    let mut acc = T::zero();
    for a in 0..2 {
        for b in 0..2 {
            let w = if a == b { same.clone() } else { diff.clone() };
            acc = acc + w * p(&h0[a], &h1[b]);
        }
    }
    acc
}

/// The double sum `Σ_{m+n even} ν_{m,n} ĥ₀(1)^m ĥ₁(1)^n c_m` with
/// `c_m = 1` for even `m` and `ρ'` for odd `m`.
pub fn nu_expansion<T: Scalar>(p: &Poly2<T>, rho: &T, h0: &[T; 2], h1: &[T; 2]) -> T {
    let (a0, a1) = hat(h0);
    let (b0, b1) = hat(h1);
    let nu = shifted_expansion(p, &a0, &b0);
    let (dm, dn) = nu.degrees();
    let mut acc = T::zero();
    for m in 0..=dm {
        for n in 0..=dn {
            if (m + n) % 2 == 1 {
                continue;
            }
            let c = nu.coeff(m, n);
            if c.is_zero() {
                continue;
            }
            let factor = if m % 2 == 0 { T::one() } else { rho.clone() };
            acc = acc + c * a1.pow_u(m as u32) * b1.pow_u(n as u32) * factor;
        }
    }
    acc
}

#[derive(Debug, Clone, Serialize)]
pub struct TaylorReport {
    pub rho_prime: f64,
    pub eps: f64,
    pub samples: usize,
    pub degree: usize,
    pub log2_c_gamma: f64,
    pub passed: usize,
    pub all_pass: bool,
    /// Largest `(main − ε·quad − lhs)/quart` over samples: the constant the
    /// quartic term actually needs.
    pub empirical_constant: f64,
    /// `min (Λ + ε(ĥ₀(1)² + ĥ₁(1)²))` over samples.
    pub lambda_margin: f64,
    pub lambda_ok: bool,
    /// `|lhs − J̃(c, c)|` for constant `h₀ = h₁ = c`.
    pub constant_case_error: f64,
}

/// Samples `h₀, h₁` with values in `[ε, 1−ε]` and checks
/// `E J̃(h₀(x), h₁(y)) ≥ J̃(ĥ₀(0), ĥ₁(0)) − ε(ĥ₀(1)² + ĥ₁(1)²) − c_γ(ĥ₀(1)⁴ + ĥ₁(1)⁴)`
/// with `c_γ = 2cK⁴2^{2K}` taken from `jt`.
pub fn taylor_lemma_numeric(jt: &JTilde, eps: f64, rho_prime: f64, samples: usize, seed: u64) -> Result<TaylorReport> {
    if !(rho_prime > -1.0 && rho_prime < 0.0) {
        return domain(format!("rho' = {rho_prime} outside (-1, 0)"));
    }
    if !(eps >= jt.eps && eps < 0.5) {
        return domain(format!("eps = {eps} outside [{}, 1/2)", jt.eps));
    }
    let log2_c = jt.log2_c_gamma();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut v = [0.0; 4];
        v.iter_mut().for_each(|x| *x = rng.gen_range(eps..=1.0 - eps));
        draws.push(([v[0], v[1]], [v[2], v[3]]));
    }
    // batched: four corner values and the centre jet per sample
    let mut corners = Vec::with_capacity(4 * samples);
    let mut centres = Vec::with_capacity(samples);
    for (h0, h1) in &draws {
        for a in h0 {
            for b in h1 {
                corners.push((*a, *b));
            }
        }
        centres.push((hat(h0).0, hat(h1).0));
    }
    let values = jt.values(&corners);
    let jets = jt.jets(&centres);
    let mut passed = 0;
    let mut empirical = 0.0f64;
    let mut lambda_margin = f64::INFINITY;
    for (s, (h0, h1)) in draws.iter().enumerate() {
        let corner = &values[4 * s..4 * s + 4];
        let lhs = 0.25 * ((1.0 + rho_prime) * (corner[0] + corner[3]) + (1.0 - rho_prime) * (corner[1] + corner[2]));
        let (_, a1) = hat(h0);
        let (_, b1) = hat(h1);
        let jet = &jets[s];
        let quad = a1 * a1 + b1 * b1;
        let quart = a1.powi(4) + b1.powi(4);
        let main = jet.value;
        let c_term = if quart > 0.0 { (log2_c + quart.log2()).exp2() } else { 0.0 };
        if lhs - main + eps * quad + c_term >= -SAMPLE_TOLERANCE {
            passed += 1;
        }
        if quart > 0.0 {
            empirical = empirical.max((main - eps * quad - lhs) / quart);
        }
        let lambda = 0.5 * (jet.dxx * a1 * a1 + jet.dyy * b1 * b1 + 2.0 * rho_prime * jet.dxy * a1 * b1);
        lambda_margin = lambda_margin.min(lambda + eps * quad);
    }
    let c = 0.5;
    let constant_case_error = (two_point_expectation(|x, y| jt.value(*x, *y), &rho_prime, &[c, c], &[c, c]) - jt.value(c, c)).abs();
    Ok(TaylorReport {
        rho_prime,
        eps,
        samples,
        degree: jt.total_degree(),
        log2_c_gamma: log2_c,
        passed,
        all_pass: passed == samples,
        empirical_constant: empirical,
        lambda_margin,
        lambda_ok: lambda_margin >= -SAMPLE_TOLERANCE,
        constant_case_error,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NuReport {
    pub samples: usize,
    pub mismatches: usize,
}

/// Exact comparison of the two-point expectation of `p` with its shifted
/// double sum on dyadic samples in `[ε, 1−ε]`.
pub fn nu_expansion_check(p: &Poly2<Rational>, rho_prime: &Rational, eps: f64, samples: usize, seed: u64) -> NuReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = (eps * 64.0).ceil() as i64;
    let hi = ((1.0 - eps) * 64.0).floor() as i64;
    let mut draw = || Rational::from_ratio(rng.gen_range(lo..=hi), 64);
    let mut mismatches = 0;
    for _ in 0..samples {
        let h0 = [draw(), draw()];
        let h1 = [draw(), draw()];
        let direct = two_point_expectation(|x, y| p.eval(x, y), rho_prime, &h0, &h1);
        if direct != nu_expansion(p, rho_prime, &h0, &h1) {
            mismatches += 1;
        }
    }
    NuReport { samples, mismatches }
}

/// `⌈(1/η) ln(1/η)⌉`.
pub fn d_eta(eta: f64) -> Result<usize> {
    if !(eta > 0.0 && eta < 1.0) {
        return domain(format!("eta = {eta} outside (0, 1)"));
    }
    Ok(((1.0 / eta) * (1.0 / eta).ln()).ceil().max(0.0) as usize)
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitReport {
    pub n: usize,
    pub eta: f64,
    pub d_eta: usize,
    /// `Σ_i E ĝ_X(i)⁴` equals the sum of the three split terms.
    pub decomposition_holds: bool,
    /// `Σ_i (Inf_i^{≤d}(f))²` of the function before the noise step.
    pub influence_square_sum: f64,
    pub checks: Vec<SplitCheck>,
    pub all_ok: bool,
}

/// `Σ_i E_X a_X(i) b_X(i) …` over the restricted level-one tables.
fn chain<T: Scalar>(tables: &[&[Vec<T>]], powers: &[u32]) -> T {
    let n = tables[0].len();
    let mut acc = T::zero();
    for i in 0..n {
        let len = tables[0][i].len();
        let mut s = T::zero();
        for x in 0..len {
            let mut term = T::one();
            for (t, &p) in tables.iter().zip(powers) {
                term = term * t[i][x].pow_u(p);
            }
            s = s + term;
        }
        acc = acc + s / T::from_int(len as i64);
    }
    acc
}

/// `E[ℓ⁴]` and `9^d (E[ℓ²])²` for a function given by its coefficients.
pub fn hypercontractive_sides<T: Scalar>(l: &FourierExpansion<T>, d: u32) -> (T, T) {
    let vals = l.inverse();
    let len = T::from_int(vals.len() as i64);
    let e2 = vals.iter().fold(T::zero(), |a, v| a + v.pow_u(2)) / len.clone();
    let e4 = vals.iter().fold(T::zero(), |a, v| a + v.pow_u(4)) / len;
    (e4, T::from_int(9).pow_u(d) * e2.clone() * e2)
}

/// Random coefficients `k/16` with `|k| ≤ 16` on sets of size at most `d`.
pub fn random_low_degree<T: Scalar>(n: usize, d: usize, seed: u64) -> Result<FourierExpansion<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = (0..1usize << n)
        .map(|s| {
            if s.count_ones() as usize <= d {
                T::from_ratio(rng.gen_range(-16..=16), 16)
            } else {
                T::zero()
            }
        })
        .collect();
    FourierExpansion::from_coeffs(n, coeffs)
}

/// Splits `g = smooth(f, ε, η)` at degree `d_η` into `h` (above) and `ℓ`
/// (at or below) and evaluates each quantity of the quartic error bound.
pub fn high_low_split_checks<T: Scalar>(f: &BooleanFunction<T>, eps: &T, eta: &T, seed: u64) -> Result<SplitReport> {
    let n = f.n();
    let eta_f = eta.to_double();
    let d = d_eta(eta_f)?;
    let g = f.smooth(eps, eta)?;
    let ge = g.fourier()?;
    let split = |high: bool| {
        let c = ge
            .coeffs()
            .iter()
            .enumerate()
            .map(|(s, c)| if (s.count_ones() as usize > d) == high { c.clone() } else { T::zero() })
            .collect();
        FourierExpansion::from_coeffs(n, c)
    };
    let (he, le) = (split(true)?, split(false)?);
    let gt = restricted_level_one(ge);
    let ht = restricted_level_one(&he);
    let lt = restricted_level_one(&le);
    let (gt, ht, lt) = (&gt[..], &ht[..], &lt[..]);

    let fourth = chain(&[gt], &[4]);
    let cubic_high = chain(&[gt, ht], &[3, 1]);
    let quad_low = chain(&[gt, lt], &[2, 2]);
    let mixed = chain(&[gt, ht, lt], &[2, 1, 1]);
    let total = cubic_high.clone() + quad_low.clone() + mixed.clone();
    let decomposition_holds = if T::is_exact() {
        fourth == total
    } else {
        (fourth.clone() - total).abs().to_double() <= SAMPLE_TOLERANCE
    };
    let high_energy = chain(&[ht], &[2]).to_double();
    let low_fourth = chain(&[lt], &[4]).to_double();

    // the function before the noise step
    let scale = T::one() - eps.clone();
    let pre = BooleanFunction::new(
        n,
        f.values().iter().map(|v| scale.clone() * v.clone() + eps.clone() * T::half()).collect(),
        RangeTag::UnitInterval,
    )?;
    let pe = pre.fourier()?;
    let dl = d.min(n);
    let mut infl = 0.0;
    for i in 1..=n {
        infl += pe.low_degree_influence(i, dl)?.to_double().powi(2);
    }
    let tail: f64 = pe
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(s, _)| s.count_ones() as usize > d)
        .map(|(_, c)| c.to_double().powi(2))
        .sum();
    let root = eta_f.sqrt();
    let nine = 9f64.powi(d as i32);
    let mut checks = vec![
        ("high_energy", high_energy, eta_f),
        ("high_energy_tail", high_energy, eta_f * tail),
        ("cubic_high", cubic_high.to_double(), root),
        ("quadratic_low", quad_low.to_double(), root + nine / root * infl),
        ("mixed", mixed.to_double(), 2.0 * root + nine / root * infl),
        ("low_fourth", low_fourth, nine * infl),
    ];
    for deg in 1..=3u32 {
        let l = random_low_degree::<T>(n, deg as usize, seed.wrapping_add(deg as u64))?;
        let (lhs, rhs) = hypercontractive_sides(&l, deg);
        let name = ["hypercontractive_d1", "hypercontractive_d2", "hypercontractive_d3"][deg as usize - 1];
        checks.push((name, lhs.to_double(), rhs.to_double()));
    }
    let checks: Vec<SplitCheck> = checks
        .into_iter()
        .map(|(name, lhs, rhs)| SplitCheck {
            name,
            lhs,
            rhs,
            ok: lhs <= rhs * (1.0 + SAMPLE_TOLERANCE) + SAMPLE_TOLERANCE,
        })
        .collect();
    let all_ok = decomposition_holds && checks.iter().all(|c| c.ok);
    Ok(SplitReport {
        n,
        eta: eta_f,
        d_eta: d,
        decomposition_holds,
        influence_square_sum: infl,
        checks,
        all_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{constant, majority, random_dyadic};

    #[test]
    fn nu_identity_on_small_net() {
        let jt = JTilde::at_degree(-0.5, 0.1, 4).unwrap();
        let p = jt.monomial_exact().unwrap();
        let r = nu_expansion_check(&p, &Rational::from_ratio(-1, 2), 0.1, 20, 3);
        assert_eq!(r.mismatches, 0);
    }

    #[test]
    fn d_eta_values() {
        assert_eq!(d_eta(0.25).unwrap(), 6);
        assert_eq!(d_eta(0.2).unwrap(), 9);
        assert!(d_eta(0.0).is_err());
    }

    #[test]
    fn constant_function_has_empty_split() {
        let f = constant::<Rational>(4, Rational::from_ratio(1, 2)).unwrap();
        let r = high_low_split_checks(&f, &Rational::from_ratio(1, 10), &Rational::from_ratio(1, 4), 1).unwrap();
        assert!(r.all_ok);
        assert!(r.checks.iter().take(6).all(|c| c.lhs == 0.0));
    }

    #[test]
    fn majority_split_is_trivial() {
        let f = majority::<Rational>(5).unwrap();
        let r = high_low_split_checks(&f, &Rational::from_ratio(1, 10), &Rational::from_ratio(1, 4), 2).unwrap();
        assert_eq!(r.d_eta, 6);
        assert!(r.all_ok, "{r:?}");
        assert_eq!(r.checks[0].lhs, 0.0);
    }

    #[test]
    fn random_dyadic_split() {
        let f = random_dyadic::<Rational>(6, 4, 9).unwrap();
        let r = high_low_split_checks(&f, &Rational::from_ratio(1, 10), &Rational::from_ratio(3, 10), 4).unwrap();
        assert!(r.decomposition_holds);
        assert!(r.all_ok, "{r:?}");
    }
}
