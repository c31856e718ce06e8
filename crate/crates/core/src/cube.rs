//! Functions on the discrete cube {−1,1}^n and their Fourier expansions.
//!
//! Index convention: bit `j` of a table index is coordinate `x_{j+1}`, with
//! bit value 0 meaning `+1` and bit value 1 meaning `−1`. Subsets of
//! coordinates use the same bit layout, so `χ_S(x) = (−1)^{popcount(S & i)}`.

use crate::error::{domain, precondition, Error, Result};
use crate::scalar::{Rational, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Largest dimension accepted by [`fourier_transform`].
pub const DEFAULT_TRANSFORM_CAP: usize = 22;
/// Largest dimension for checks that enumerate all pairs `(x, y)`.
pub const DEFAULT_PAIRWISE_CAP: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeTag {
    UnitInterval,
    SignedUnit,
    Unrestricted,
}

impl RangeTag {
    fn admits<T: Scalar>(self, v: &T) -> bool {
        match self {
            RangeTag::UnitInterval => *v >= T::zero() && *v <= T::one(),
            RangeTag::SignedUnit => *v >= -T::one() && *v <= T::one(),
            RangeTag::Unrestricted => true,
        }
    }
}

/// Value table of a function `{−1,1}^n → T`.
#[derive(Debug, Clone)]
pub struct BooleanFunction<T: Scalar> {
    n: usize,
    values: Vec<T>,
    range: RangeTag,
    fourier: OnceLock<FourierExpansion<T>>,
}

/// Fourier coefficients `f̂(S)` indexed by subset bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierExpansion<T: Scalar> {
    n: usize,
    coeffs: Vec<T>,
    range: RangeTag,
}

/// `(−1)^{bit}` as a sign for coordinate `j` (0-based) of table index `i`.
#[inline]
pub fn coord(i: usize, j: usize) -> i8 {
    if (i >> j) & 1 == 0 {
        1
    } else {
        -1
    }
}

/// The point of `{−1,1}^n` encoded by table index `i`.
pub fn point(n: usize, i: usize) -> Vec<i8> {
    (0..n).map(|j| coord(i, j)).collect()
}

/// Table index of a point.
pub fn index_of(x: &[i8]) -> usize {
    x.iter()
        .enumerate()
        .fold(0, |acc, (j, &v)| if v < 0 { acc | (1 << j) } else { acc })
}

/// `χ_S(x)` for subset mask `s` and point index `i`.
#[inline]
pub fn character(s: usize, i: usize) -> i8 {
    if (s & i).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// In-place unnormalised Walsh–Hadamard butterfly.
pub fn walsh_hadamard<T: Scalar>(v: &mut [T]) {
    let len = v.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(2 * h) {
            for j in block..block + h {
                let a = v[j].clone();
                let b = v[j + h].clone();
                v[j] = a.clone() + b.clone();
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

fn check_coord(i: usize, n: usize) -> Result<()> {
    if i == 0 || i > n {
        return Err(Error::CoordinateOutOfRange { coord: i, n });
    }
    Ok(())
}

fn pow2_inv<T: Scalar>(n: usize) -> T {
    T::one() / T::from_int(1i64 << n)
}

impl<T: Scalar> BooleanFunction<T> {
    pub fn new(n: usize, values: Vec<T>, range: RangeTag) -> Result<Self> {
        if n == 0 || n >= usize::BITS as usize - 1 {
            return domain(format!("dimension {n} must be at least 1"));
        }
        if values.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                left: values.len(),
                right: 1 << n,
            });
        }
        if let Some(pos) = values.iter().position(|v| !range.admits(v)) {
            return domain(format!(
                "value {:?} at index {pos} outside declared range {range:?}",
                values[pos]
            ));
        }
        Ok(BooleanFunction {
            n,
            values,
            range,
            fourier: OnceLock::new(),
        })
    }

    /// Tabulate `f` pointwise.
    pub fn from_fn(n: usize, range: RangeTag, f: impl Fn(&[i8]) -> T) -> Result<Self> {
        let values = (0..1usize << n).map(|i| f(&point(n, i))).collect();
        Self::new(n, values, range)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn range(&self) -> RangeTag {
        self.range
    }

    pub fn value_at(&self, x: &[i8]) -> &T {
        &self.values[index_of(x)]
    }

    pub fn mean(&self) -> T {
        let s = self.values.iter().cloned().fold(T::zero(), |a, b| a + b);
        s * pow2_inv::<T>(self.n)
    }

    pub fn second_moment(&self) -> T {
        let s = self
            .values
            .iter()
            .fold(T::zero(), |a, b| a + b.clone() * b.clone());
        s * pow2_inv::<T>(self.n)
    }

    pub fn variance(&self) -> T {
        let m = self.mean();
        self.second_moment() - m.clone() * m
    }

    /// `1 − f`, keeping the unit-interval tag.
    pub fn complement(&self) -> Result<Self> {
        let values = self.values.iter().map(|v| T::one() - v.clone()).collect();
        Self::new(self.n, values, self.range)
    }

    /// Same table with a new range tag (validated).
    pub fn retag(&self, range: RangeTag) -> Result<Self> {
        Self::new(self.n, self.values.clone(), range)
    }

    /// Cached Fourier expansion (default transform cap).
    pub fn fourier(&self) -> Result<&FourierExpansion<T>> {
        if let Some(fe) = self.fourier.get() {
            return Ok(fe);
        }
        let fe = fourier_transform(self)?;
        Ok(self.fourier.get_or_init(|| fe))
    }

    /// Convert the table to another scalar type through `f64` or exactly.
    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(&T) -> U) -> BooleanFunction<U> {
        BooleanFunction {
            n: self.n,
            values: self.values.iter().map(f).collect(),
            range: self.range,
            fourier: OnceLock::new(),
        }
    }

    /// `P[f(x) ≠ f(x with coordinate i flipped)]` generalised to
    /// `E[(f(x) − f(x^{⊕i}))²]`. For {0,1}-valued `f` this is the flip
    /// probability and equals four times the Fourier-weight influence.
    pub fn flip_influence(&self, i: usize) -> Result<T> {
        check_coord(i, self.n)?;
        let bit = 1 << (i - 1);
        let s = self.values.iter().enumerate().fold(T::zero(), |acc, (x, v)| {
            let d = v.clone() - self.values[x ^ bit].clone();
            acc + d.clone() * d
        });
        Ok(s * pow2_inv::<T>(self.n))
    }

    /// Fix the coordinates in `coords` (1-based) to the signs in `assignment`.
    /// The remaining coordinates keep ascending order.
    pub fn restrict(&self, coords: &[usize], assignment: &[i8]) -> Result<Self> {
        if coords.len() != assignment.len() {
            return Err(Error::DimensionMismatch {
                left: coords.len(),
                right: assignment.len(),
            });
        }
        let mut fixed_mask = 0usize;
        let mut fixed_bits = 0usize;
        for (&c, &a) in coords.iter().zip(assignment) {
            check_coord(c, self.n)?;
            let bit = 1 << (c - 1);
            if fixed_mask & bit != 0 {
                return domain(format!("coordinate {c} restricted twice"));
            }
            if a != 1 && a != -1 {
                return domain(format!("assignment value {a} is not ±1"));
            }
            fixed_mask |= bit;
            if a < 0 {
                fixed_bits |= bit;
            }
        }
        let free: Vec<usize> = (0..self.n).filter(|j| fixed_mask & (1 << j) == 0).collect();
        if free.is_empty() {
            return domain("restriction fixes every coordinate");
        }
        let values = (0..1usize << free.len())
            .map(|k| {
                let mut idx = fixed_bits;
                for (pos, &j) in free.iter().enumerate() {
                    if (k >> pos) & 1 == 1 {
                        idx |= 1 << j;
                    }
                }
                self.values[idx].clone()
            })
            .collect();
        Self::new(free.len(), values, self.range)
    }

    /// `g = T_{1−η}((1−ε)f + ε/2)`.
    ///
    /// The affine step lands in `[ε/2, 1−ε/2]` and the noise step keeps that
    /// bracket; both are asserted.
    pub fn smooth(&self, eps: &T, eta: &T) -> Result<Self> {
        if *eps < T::zero() || *eps >= T::one() {
            return domain(format!("eps {eps:?} outside [0,1)"));
        }
        if *eta < T::zero() || *eta >= T::one() {
            return domain(format!("eta {eta:?} outside [0,1)"));
        }
        if self.range != RangeTag::UnitInterval {
            return precondition("smooth requires a unit_interval function");
        }
        let lo = eps.clone() * T::half();
        let hi = T::one() - lo.clone();
        let scale = T::one() - eps.clone();
        let f2: Vec<T> = self
            .values
            .iter()
            .map(|v| scale.clone() * v.clone() + lo.clone())
            .collect();
        let slack = if T::is_exact() { T::zero() } else { T::from_double(1e-12) };
        let in_bracket = |v: &T| *v >= lo.clone() - slack.clone() && *v <= hi.clone() + slack.clone();
        if !f2.iter().all(in_bracket) {
            return Err(Error::Structural("affine smoothing left [ε/2, 1−ε/2]".into()));
        }
        let f2 = Self::new(self.n, f2, RangeTag::UnitInterval)?;
        let g = f2.fourier()?.noise(&(T::one() - eta.clone()))?;
        let values = g.inverse();
        if !values.iter().all(in_bracket) {
            return Err(Error::Structural("noise step left [ε/2, 1−ε/2]".into()));
        }
        Self::new(self.n, values, RangeTag::UnitInterval)
    }
}

/// `f̂(S) = 2^{−n} Σ_x f(x) χ_S(x)` with the default cap.
pub fn fourier_transform<T: Scalar>(f: &BooleanFunction<T>) -> Result<FourierExpansion<T>> {
    fourier_transform_capped(f, DEFAULT_TRANSFORM_CAP)
}

pub fn fourier_transform_capped<T: Scalar>(
    f: &BooleanFunction<T>,
    cap: usize,
) -> Result<FourierExpansion<T>> {
    if f.n > cap {
        return Err(Error::Resource {
            what: "fourier transform dimension",
            size: f.n,
            cap,
        });
    }
    let mut v = f.values.clone();
    walsh_hadamard(&mut v);
    let scale = pow2_inv::<T>(f.n);
    for c in v.iter_mut() {
        *c = c.clone() * scale.clone();
    }
    Ok(FourierExpansion {
        n: f.n,
        coeffs: v,
        range: f.range,
    })
}

fn check_rho<T: Scalar>(rho: &T) -> Result<()> {
    if rho.abs() > T::one() {
        return domain(format!("correlation {rho:?} outside [−1,1]"));
    }
    Ok(())
}

impl<T: Scalar> FourierExpansion<T> {
    /// Build from raw coefficients (range tag unrestricted).
    pub fn from_coeffs(n: usize, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                left: coeffs.len(),
                right: 1 << n,
            });
        }
        Ok(FourierExpansion {
            n,
            coeffs,
            range: RangeTag::Unrestricted,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, s: usize) -> &T {
        &self.coeffs[s]
    }

    pub fn range(&self) -> RangeTag {
        self.range
    }

    /// Value table reconstructed from the coefficients.
    pub fn inverse(&self) -> Vec<T> {
        let mut v = self.coeffs.clone();
        walsh_hadamard(&mut v);
        v
    }

    /// Back to a function; the range tag is revalidated.
    pub fn to_function(&self) -> Result<BooleanFunction<T>> {
        BooleanFunction::new(self.n, self.inverse(), self.range)
    }

    /// `Σ_S f̂(S)²`.
    pub fn parseval_sum(&self) -> T {
        self.coeffs
            .iter()
            .fold(T::zero(), |a, c| a + c.clone() * c.clone())
    }

    /// `Σ_{S ∋ i} f̂(S)²`.
    pub fn influence(&self, i: usize) -> Result<T> {
        self.low_degree_influence(i, self.n)
    }

    /// `Σ_{S ∋ i, |S| ≤ d} f̂(S)²`.
    pub fn low_degree_influence(&self, i: usize, d: usize) -> Result<T> {
        check_coord(i, self.n)?;
        if d > self.n {
            return domain(format!("degree {d} exceeds dimension {}", self.n));
        }
        let bit = 1 << (i - 1);
        Ok(self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(s, _)| s & bit != 0 && s.count_ones() as usize <= d)
            .fold(T::zero(), |a, (_, c)| a + c.clone() * c.clone()))
    }

    /// `max_i Inf_i(f)`.
    pub fn max_influence(&self) -> T {
        (1..=self.n)
            .map(|i| self.influence(i).expect("coordinate in range"))
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    /// `T_σ`: scale `f̂(S)` by `σ^{|S|}`. The range tag survives when
    /// `|σ| ≤ 1` since `T_σ` averages over correlated resamples.
    pub fn noise(&self, sigma: &T) -> Result<Self> {
        check_rho(sigma)?;
        let powers: Vec<T> = (0..=self.n as u32).map(|k| sigma.pow_u(k)).collect();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(s, c)| c.clone() * powers[s.count_ones() as usize].clone())
            .collect();
        Ok(FourierExpansion {
            n: self.n,
            coeffs,
            range: self.range,
        })
    }

    /// `Σ_S ρ^{|S|} f̂(S) ĝ(S) = E f(x) g(y)` for `y ∼_ρ x`.
    pub fn stability_bilinear(&self, other: &Self, rho: &T) -> Result<T> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        check_rho(rho)?;
        let powers: Vec<T> = (0..=self.n as u32).map(|k| rho.pow_u(k)).collect();
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .enumerate()
            .fold(T::zero(), |acc, (s, (a, b))| {
                acc + powers[s.count_ones() as usize].clone() * a.clone() * b.clone()
            }))
    }

    /// `E[f f + (1−f)(1−f)] = 1 − 2E f + 2 S_ρ(f)`.
    pub fn stab_two_sided(&self, rho: &T) -> Result<T> {
        if self.range != RangeTag::UnitInterval {
            return precondition("two-sided stability requires a unit_interval function");
        }
        let s = self.stability_bilinear(self, rho)?;
        let two = T::from_int(2);
        Ok(T::one() - two.clone() * self.coeffs[0].clone() + two * s)
    }
}

/// Exhaustive `Σ_{x,y} f(x) g(y) Π_i w(x_i, y_i)` with `w(a,b) = (1 + ρab)/4`.
pub fn stability_exhaustive<T: Scalar>(
    f: &BooleanFunction<T>,
    g: &BooleanFunction<T>,
    rho: &T,
) -> Result<T> {
    if f.n != g.n {
        return Err(Error::DimensionMismatch {
            left: f.n,
            right: g.n,
        });
    }
    let n = f.n;
    let quarter = T::from_ratio(1, 4);
    let agree = (T::one() + rho.clone()) * quarter.clone();
    let disagree = (T::one() - rho.clone()) * quarter;
    let agree_pow: Vec<T> = (0..=n as u32).map(|k| agree.pow_u(k)).collect();
    let disagree_pow: Vec<T> = (0..=n as u32).map(|k| disagree.pow_u(k)).collect();
    let mut total = T::zero();
    for (x, fx) in f.values.iter().enumerate() {
        for (y, gy) in g.values.iter().enumerate() {
            let d = (x ^ y).count_ones() as usize;
            total = total
                + fx.clone() * gy.clone() * agree_pow[n - d].clone() * disagree_pow[d].clone();
        }
    }
    Ok(total)
}

/// `Maj_n` as a {0,1}-valued function: `(1 + sign Σx)/2`.
pub fn majority<T: Scalar>(n: usize) -> Result<BooleanFunction<T>> {
    if n.is_multiple_of(2) {
        return domain(format!("majority needs odd n, got {n}"));
    }
    BooleanFunction::from_fn(n, RangeTag::UnitInterval, |x| {
        let s: i64 = x.iter().map(|&v| v as i64).sum();
        if s > 0 {
            T::one()
        } else {
            T::zero()
        }
    })
}

/// `(1 + x_i)/2`.
pub fn dictator<T: Scalar>(n: usize, i: usize) -> Result<BooleanFunction<T>> {
    check_coord(i, n)?;
    BooleanFunction::from_fn(n, RangeTag::UnitInterval, |x| {
        if x[i - 1] > 0 {
            T::one()
        } else {
            T::zero()
        }
    })
}

/// `χ_S` for a set of 1-based coordinates.
pub fn parity<T: Scalar>(n: usize, set: &[usize]) -> Result<BooleanFunction<T>> {
    let mut mask = 0usize;
    for &c in set {
        check_coord(c, n)?;
        mask |= 1 << (c - 1);
    }
    let values = (0..1usize << n)
        .map(|i| T::from_int(character(mask, i) as i64))
        .collect();
    BooleanFunction::new(n, values, RangeTag::SignedUnit)
}

/// Constant function; tagged unit-interval when `c ∈ [0,1]`.
pub fn constant<T: Scalar>(n: usize, c: T) -> Result<BooleanFunction<T>> {
    let range = if RangeTag::UnitInterval.admits(&c) {
        RangeTag::UnitInterval
    } else if RangeTag::SignedUnit.admits(&c) {
        RangeTag::SignedUnit
    } else {
        RangeTag::Unrestricted
    };
    BooleanFunction::new(n, vec![c; 1 << n], range)
}

fn dyadic_table<T: Scalar>(n: usize, bits: u32, seed: u64, signed: bool) -> Result<Vec<T>> {
    if bits > 60 {
        return domain(format!("denominator bits {bits} exceed 60"));
    }
    if n == 0 || n > DEFAULT_TRANSFORM_CAP {
        return Err(Error::Resource {
            what: "random table dimension",
            size: n,
            cap: DEFAULT_TRANSFORM_CAP,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let den = 1i64 << bits;
    Ok((0..1usize << n)
        .map(|_| {
            let k = if signed {
                rng.gen_range(-den..=den)
            } else {
                rng.gen_range(0..=den)
            };
            T::from_ratio(k, den)
        })
        .collect())
}

/// Values `k / 2^bits` with `k` uniform in `0..=2^bits`.
pub fn random_dyadic<T: Scalar>(n: usize, bits: u32, seed: u64) -> Result<BooleanFunction<T>> {
    BooleanFunction::new(n, dyadic_table(n, bits, seed, false)?, RangeTag::UnitInterval)
}

/// Values `k / 2^bits` with `k` uniform in `−2^bits..=2^bits`.
pub fn random_dyadic_signed<T: Scalar>(
    n: usize,
    bits: u32,
    seed: u64,
) -> Result<BooleanFunction<T>> {
    BooleanFunction::new(n, dyadic_table(n, bits, seed, true)?, RangeTag::SignedUnit)
}

/// Two-sided `Stab_ρ(Maj_n)` in `O(n²)` without touching the cube.
///
/// Split the coordinates into the `m` where `x_i = y_i` and the `n − m`
/// where they differ; `m ∼ Bin(n, (1+ρ)/2)`. With `S` the sum of the
/// agreeing bits and `D` the sum of the differing ones, `Σx = S + D` and
/// `Σy = S − D`, so the two majorities agree iff `|S| > |D|`.
pub fn majority_stability_dp(n: usize, rho: f64) -> Result<f64> {
    if n.is_multiple_of(2) {
        return domain(format!("majority stability needs odd n, got {n}"));
    }
    if n > 10_000 {
        return Err(Error::Resource {
            what: "majority dimension",
            size: n,
            cap: 10_000,
        });
    }
    if !(rho.abs() < 1.0) {
        return domain(format!("rho {rho} must satisfy |rho| < 1"));
    }
    let mut ln_fact = vec![0.0f64; n + 1];
    for i in 1..=n {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let ln_choose = |a: usize, b: usize| ln_fact[a] - ln_fact[b] - ln_fact[a - b];
    let ln2 = std::f64::consts::LN_2;
    // P(|sum of k uniform ±1| = s) indexed by s, as a dense vector of length k+1.
    let abs_sum_pmf = |k: usize| -> Vec<f64> {
        let mut p = vec![0.0; k + 1];
        for j in 0..=k {
            let s = (2 * j as i64 - k as i64).unsigned_abs() as usize;
            p[s] += (ln_choose(k, j) - k as f64 * ln2).exp();
        }
        p
    };
    let p_agree = (1.0 + rho) / 2.0;
    let (lp, lq) = (p_agree.ln(), (1.0 - p_agree).ln());
    let mut total = 0.0;
    for m in 0..=n {
        let w = (ln_choose(n, m) + m as f64 * lp + (n - m) as f64 * lq).exp();
        if w == 0.0 {
            continue;
        }
        let ps = abs_sum_pmf(m);
        let pd = abs_sum_pmf(n - m);
        // cdf_d[s] = P(|D| < s)
        let mut cdf_d = vec![0.0; m + 2];
        let mut acc = 0.0;
        for s in 0..cdf_d.len() {
            cdf_d[s] = acc;
            if s < pd.len() {
                acc += pd[s];
            }
        }
        let agree: f64 = ps.iter().enumerate().map(|(s, p)| p * cdf_d[s]).sum();
        total += w * agree;
    }
    Ok(total)
}

/// JSON form `{"n", "range", "values": ["p/q", ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionFile {
    pub n: usize,
    pub range: RangeTag,
    pub values: Vec<String>,
}

impl FunctionFile {
    pub fn from_function(f: &BooleanFunction<Rational>) -> Self {
        FunctionFile {
            n: f.n,
            range: f.range,
            values: f.values.iter().map(crate::scalar::format_rational).collect(),
        }
    }

    pub fn to_function(&self) -> Result<BooleanFunction<Rational>> {
        let values = self
            .values
            .iter()
            .map(|s| crate::scalar::parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        BooleanFunction::new(self.n, values, self.range)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational as Q;

    fn q(a: i64, b: i64) -> Q {
        Q::from_ratio(a, b)
    }

    #[test]
    fn dictator_coefficients() {
        let f = dictator::<Q>(1, 1).unwrap();
        let fe = f.fourier().unwrap();
        assert_eq!(fe.coeffs(), &[q(1, 2), q(1, 2)]);
        assert_eq!(fe.influence(1).unwrap(), q(1, 4));
    }

    #[test]
    fn parity_table_and_coefficient() {
        let p = parity::<Q>(2, &[1, 2]).unwrap();
        let expect: Vec<Q> = [1, -1, -1, 1].iter().map(|&v| q(v, 1)).collect();
        assert_eq!(p.values(), expect.as_slice());
        let fe = p.fourier().unwrap();
        assert_eq!(fe.coeff(0b11), &q(1, 1));
        assert_eq!(fe.parseval_sum(), q(1, 1));
    }

    #[test]
    fn majority3_by_brute_force() {
        let f = majority::<Q>(3).unwrap();
        let fe = f.fourier().unwrap();
        for s in 0..8usize {
            let direct = (0..8usize).fold(Q::from_int(0), |a, i| {
                a + f.values()[i].clone() * Q::from_int(character(s, i) as i64)
            }) / Q::from_int(8);
            assert_eq!(&direct, fe.coeff(s));
        }
        assert_eq!(fe.coeff(0), &q(1, 2));
        assert_eq!(fe.coeff(1), &q(1, 4));
        assert_eq!(fe.coeff(7), &q(-1, 4));
        assert_eq!(fe.low_degree_influence(1, 1).unwrap(), q(1, 16));
    }

    #[test]
    fn majority_one_is_dictator() {
        assert_eq!(
            majority::<Q>(1).unwrap().values(),
            dictator::<Q>(1, 1).unwrap().values()
        );
        assert!(majority::<Q>(4).is_err());
    }

    #[test]
    fn stability_examples() {
        let rho = q(1, 2);
        let maj = majority::<Q>(3).unwrap();
        let fe = maj.fourier().unwrap();
        assert_eq!(fe.stability_bilinear(fe, &rho).unwrap(), q(45, 128));
        assert_eq!(
            stability_exhaustive(&maj, &maj, &rho).unwrap(),
            q(45, 128)
        );
        assert_eq!(fe.stab_two_sided(&rho).unwrap(), q(90, 128));
        let d = dictator::<Q>(1, 1).unwrap();
        let de = d.fourier().unwrap();
        assert_eq!(de.stab_two_sided(&rho).unwrap(), q(3, 4));
        assert_eq!(de.noise(&rho).unwrap().coeff(1), &q(1, 4));
        let c = constant(3, q(1, 2)).unwrap();
        assert_eq!(c.fourier().unwrap().stab_two_sided(&q(3, 10)).unwrap(), q(1, 2));
    }

    #[test]
    fn flip_influence_is_four_times_fourier_influence() {
        let f = majority::<Q>(5).unwrap();
        for i in 1..=5 {
            assert_eq!(
                f.flip_influence(i).unwrap(),
                f.fourier().unwrap().influence(i).unwrap() * Q::from_int(4)
            );
        }
    }

    #[test]
    fn restrict_examples() {
        let d = dictator::<Q>(1, 1).unwrap();
        assert!(d.restrict(&[1], &[1]).is_err());
        let d2 = dictator::<Q>(2, 1).unwrap();
        assert_eq!(d2.restrict(&[1], &[1]).unwrap().values(), &[q(1, 1), q(1, 1)]);
        let p = parity::<Q>(2, &[1, 2]).unwrap();
        let r = p.restrict(&[2], &[-1]).unwrap();
        assert_eq!(r.values(), &[q(-1, 1), q(1, 1)]);
        let m = majority::<Q>(3).unwrap();
        let r = m.restrict(&[3], &[1]).unwrap();
        let expect: Vec<Q> = [1, 1, 1, 0].iter().map(|&v| q(v, 1)).collect();
        assert_eq!(r.values(), expect.as_slice());
        assert!(m.restrict(&[2, 2], &[1, 1]).is_err());
        assert!(m.restrict(&[4], &[1]).is_err());
    }

    #[test]
    fn smooth_examples() {
        let d = dictator::<Q>(1, 1).unwrap();
        let same = d.smooth(&q(0, 1), &q(0, 1)).unwrap();
        assert_eq!(same.values(), d.values());
        let z = constant(2, q(0, 1)).unwrap();
        let g = z.smooth(&q(1, 5), &q(1, 3)).unwrap();
        assert!(g.values().iter().all(|v| *v == q(1, 10)));
        let g = d.smooth(&q(1, 5), &q(1, 2)).unwrap();
        assert_eq!(g.fourier().unwrap().coeff(1), &q(1, 5));
    }

    #[test]
    fn majority_dp_small_cases() {
        assert!((majority_stability_dp(1, 0.3).unwrap() - 0.65).abs() < 1e-15);
        assert!((majority_stability_dp(3, 0.5).unwrap() - 0.703125).abs() < 1e-14);
        let v = majority_stability_dp(101, 0.5).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 0.02);
        assert!(majority_stability_dp(4, 0.5).is_err());
    }

    #[test]
    fn random_dyadic_is_seeded() {
        let a = random_dyadic::<Q>(4, 8, 7).unwrap();
        let b = random_dyadic::<Q>(4, 8, 7).unwrap();
        let c = random_dyadic::<Q>(4, 8, 8).unwrap();
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn function_file_round_trip() {
        let f = random_dyadic::<Q>(3, 5, 1).unwrap();
        let file = FunctionFile::from_function(&f);
        let text = serde_json::to_string(&file).unwrap();
        let back: FunctionFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_function().unwrap().values(), f.values());
    }
}
