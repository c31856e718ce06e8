//! The cubic-deviation functional `Δ_n` and identities for Fourier
//! coefficients of restrictions.

use crate::cube::{walsh_hadamard, BooleanFunction, FourierExpansion, RangeTag};
use crate::error::{domain, precondition, Error, Result};
use crate::scalar::Scalar;
use serde::Serialize;

/// `Δ_n(f)` by the recursion on the last coordinate:
/// `Δ_n(f) = E_{x_n}[Δ_{n−1}(f_{x_n})] + Δ_1(E[f | x_n])`.
///
/// Restricting `x_n` selects the lower (`x_n = +1`) or upper half of the
/// table, so the recursion runs bottom-up over adjacent blocks.
pub fn delta_recursive<T: Scalar>(f: &BooleanFunction<T>) -> T {
    let half = T::half();
    // (mean, Δ) for every block of the current size
    let mut level: Vec<(T, T)> = f.values().iter().map(|v| (v.clone(), T::zero())).collect();
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|pair| {
                let (m0, d0) = &pair[0];
                let (m1, d1) = &pair[1];
                let mean = (m0.clone() + m1.clone()) * half.clone();
                let jump = ((m0.clone() - m1.clone()) * half.clone()).cube_abs();
                let delta = (d0.clone() + d1.clone()) * half.clone() + jump;
                (mean, delta)
            })
            .collect();
    }
    level.pop().expect("nonempty table").1
}

/// For each `i = 1..=n`, the values `f̂_X({i})` over all assignments `X` of
/// the coordinates `S_i = {i+1, …, n}`, computed from `f̂` alone: the
/// coefficient vector `T ↦ f̂({i} ∪ T)` is inverse-transformed over `S_i`.
pub fn restricted_level_one<T: Scalar>(fe: &FourierExpansion<T>) -> Vec<Vec<T>> {
    let n = fe.n();
    (1..=n)
        .map(|i| {
            let m = n - i;
            let bit = 1usize << (i - 1);
            let mut v: Vec<T> = (0..1usize << m)
                .map(|t| fe.coeff(bit | (t << i)).clone())
                .collect();
            walsh_hadamard(&mut v);
            v
        })
        .collect()
}

fn average<T: Scalar>(v: impl Iterator<Item = T>, len: usize) -> T {
    v.fold(T::zero(), |a, b| a + b) / T::from_int(len as i64)
}

/// `Σ_i E_{X ∈ {−1,1}^{S_i}} |f̂_X(i)|³`.
pub fn delta_fourier<T: Scalar>(f: &BooleanFunction<T>) -> Result<T> {
    Ok(delta_from_expansion(f.fourier()?))
}

pub fn delta_from_expansion<T: Scalar>(fe: &FourierExpansion<T>) -> T {
    restricted_level_one(fe)
        .into_iter()
        .map(|g| {
            let len = g.len();
            average(g.iter().map(|v| v.cube_abs()), len)
        })
        .fold(T::zero(), |a, b| a + b)
}

/// `Σ_i E|f(X) − f(X^{−i})|³` where `X^{−i}` negates coordinate `i`.
pub fn flip_bound<T: Scalar>(f: &BooleanFunction<T>) -> T {
    let vals = f.values();
    let len = vals.len();
    (0..f.n())
        .map(|j| {
            let bit = 1 << j;
            average(
                (0..len).map(|x| (vals[x].clone() - vals[x ^ bit].clone()).cube_abs()),
                len,
            )
        })
        .fold(T::zero(), |a, b| a + b)
}

fn mask_of(coords: &[usize], n: usize) -> Result<usize> {
    let mut m = 0usize;
    for &c in coords {
        if c == 0 || c > n {
            return Err(Error::CoordinateOutOfRange { coord: c, n });
        }
        if m & (1 << (c - 1)) != 0 {
            return domain(format!("coordinate {c} repeated"));
        }
        m |= 1 << (c - 1);
    }
    Ok(m)
}

/// Position of each set bit of `mask`, ascending.
fn bits(mask: usize) -> Vec<usize> {
    (0..usize::BITS as usize).filter(|j| mask & (1 << j) != 0).collect()
}

/// Spread the low bits of `k` onto the positions listed in `positions`.
fn spread(k: usize, positions: &[usize]) -> usize {
    positions
        .iter()
        .enumerate()
        .fold(0, |acc, (b, &p)| if (k >> b) & 1 == 1 { acc | (1 << p) } else { acc })
}

/// Both routes to `f̂_x(U)`: transform of the restriction, and
/// `Σ_{T ⊆ S} χ_T(x) f̂(T ∪ U)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictionCoefficient<T> {
    pub direct: T,
    pub expansion: T,
}

impl<T: PartialEq> RestrictionCoefficient<T> {
    pub fn agree(&self) -> bool {
        self.direct == self.expansion
    }
}

/// `f̂_x(U)` for `x` an assignment to the coordinates `s` (1-based, any order).
pub fn restriction_coefficient<T: Scalar>(
    f: &BooleanFunction<T>,
    s: &[usize],
    x: &[i8],
    u: &[usize],
) -> Result<RestrictionCoefficient<T>> {
    let n = f.n();
    let s_mask = mask_of(s, n)?;
    let u_mask = mask_of(u, n)?;
    if s_mask & u_mask != 0 {
        return domain("S and U must be disjoint");
    }
    if x.len() != s.len() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: s.len(),
        });
    }
    // expansion route
    let fe = f.fourier()?;
    let x_bits = s
        .iter()
        .zip(x)
        .fold(0usize, |acc, (&c, &v)| if v < 0 { acc | (1 << (c - 1)) } else { acc });
    let s_pos = bits(s_mask);
    let mut expansion = T::zero();
    for k in 0..1usize << s_pos.len() {
        let t = spread(k, &s_pos);
        let sign = crate::cube::character(t, x_bits);
        let term = fe.coeff(t | u_mask).clone();
        expansion = if sign > 0 { expansion + term } else { expansion - term };
    }
    // direct route
    let direct = if s.len() == n {
        if u_mask == 0 {
            f.values()[x_bits].clone()
        } else {
            T::zero()
        }
    } else {
        let r = f.restrict(s, x)?;
        let free: Vec<usize> = (0..n).filter(|j| s_mask & (1 << j) == 0).collect();
        let u_local = free
            .iter()
            .enumerate()
            .fold(0usize, |acc, (pos, &j)| if u_mask & (1 << j) != 0 { acc | (1 << pos) } else { acc });
        r.fourier()?.coeff(u_local).clone()
    };
    Ok(RestrictionCoefficient { direct, expansion })
}

/// Values of `x ↦ f̂_x(U)` over all `x ∈ {−1,1}^S`, indexed by the bits of
/// `S` in ascending coordinate order, computed by restricting the table.
fn restricted_coefficient_table<T: Scalar>(
    f: &BooleanFunction<T>,
    s_mask: usize,
    u_mask: usize,
) -> Result<Vec<T>> {
    let n = f.n();
    let s_pos = bits(s_mask);
    let coords: Vec<usize> = s_pos.iter().map(|p| p + 1).collect();
    let u: Vec<usize> = bits(u_mask).iter().map(|p| p + 1).collect();
    (0..1usize << s_pos.len())
        .map(|k| {
            let x: Vec<i8> = (0..s_pos.len()).map(|b| crate::cube::coord(k, b)).collect();
            if coords.len() == n {
                return Ok(if u.is_empty() {
                    f.values()[spread(k, &s_pos)].clone()
                } else {
                    T::zero()
                });
            }
            Ok(restriction_coefficient(f, &coords, &x, &u)?.direct)
        })
        .collect()
}

/// Second moment of restricted coefficients and the influence bound.
#[derive(Debug, Clone, PartialEq)]
pub struct SquaredRestrictionStats<T> {
    /// `E_X |f̂_X(U)|²` from the restricted tables.
    pub second_moment: T,
    /// `Σ_{T ⊆ S} f̂(T ∪ U)²`.
    pub coefficient_sum: T,
    /// `second_moment ≤ Inf_i(f)` for the requested `i ∈ U`.
    pub influence_bound_ok: Option<bool>,
}

pub fn squared_restriction_stats<T: Scalar>(
    f: &BooleanFunction<T>,
    u: &[usize],
    s: &[usize],
    influence_coord: Option<usize>,
) -> Result<SquaredRestrictionStats<T>> {
    let n = f.n();
    let s_mask = mask_of(s, n)?;
    let u_mask = mask_of(u, n)?;
    if s_mask & u_mask != 0 {
        return domain("S and U must be disjoint");
    }
    let table = restricted_coefficient_table(f, s_mask, u_mask)?;
    let len = table.len();
    let second_moment = average(table.iter().map(|v| v.clone() * v.clone()), len);
    let fe = f.fourier()?;
    let s_pos = bits(s_mask);
    let coefficient_sum = (0..1usize << s_pos.len())
        .map(|k| {
            let c = fe.coeff(spread(k, &s_pos) | u_mask);
            c.clone() * c.clone()
        })
        .fold(T::zero(), |a, b| a + b);
    let influence_bound_ok = match influence_coord {
        None => None,
        Some(i) => {
            if !u.contains(&i) {
                return precondition(format!("coordinate {i} is not in U"));
            }
            Some(second_moment <= fe.influence(i)?)
        }
    };
    Ok(SquaredRestrictionStats {
        second_moment,
        coefficient_sum,
        influence_bound_ok,
    })
}

/// `Σ_i E_{X ∈ {−1,1}^{S_i}} |f̂_X(i)|² = Var(f)`, with the left side built
/// from restricted tables.
pub fn variance_identity<T: Scalar>(f: &BooleanFunction<T>) -> Result<bool> {
    let n = f.n();
    let mut chain = T::zero();
    for i in 1..=n {
        let s: Vec<usize> = (i + 1..=n).collect();
        chain = chain + squared_restriction_stats(f, &[i], &s, Some(i))?.second_moment;
    }
    Ok(chain == f.variance())
}

/// `(T_σ f)_x^(U) = σ^{|U|} T_σ(f̂_x(U))` as polynomials in `x ∈ {−1,1}^S`.
///
/// The left side restricts the table of `T_σ f`; the right side restricts
/// `f`, expands `x ↦ f̂_x(U)` in characters of `S` and scales the degree-`|T|`
/// part by `σ^{|T|}`. Coefficients are compared exactly.
pub fn noise_restriction_commute<T: Scalar>(
    f: &BooleanFunction<T>,
    sigma: &T,
    s: &[usize],
    u: &[usize],
) -> Result<bool> {
    let n = f.n();
    let s_mask = mask_of(s, n)?;
    let u_mask = mask_of(u, n)?;
    if s_mask & u_mask != 0 {
        return domain("S and U must be disjoint");
    }
    let noisy = f.fourier()?.noise(sigma)?;
    let noisy_f = BooleanFunction::new(n, noisy.inverse(), RangeTag::Unrestricted)?;
    let to_coeffs = |mut table: Vec<T>| {
        walsh_hadamard(&mut table);
        let scale = T::one() / T::from_int(table.len() as i64);
        table.into_iter().map(|v| v * scale.clone()).collect::<Vec<T>>()
    };
    let lhs = to_coeffs(restricted_coefficient_table(&noisy_f, s_mask, u_mask)?);
    let rhs = to_coeffs(restricted_coefficient_table(f, s_mask, u_mask)?);
    let su = sigma.pow_u(u.len() as u32);
    Ok(lhs.iter().zip(&rhs).enumerate().all(|(t, (l, r))| {
        *l == su.clone() * sigma.pow_u(t.count_ones()) * r.clone()
    }))
}

/// Both sides of `Δ_n(T_σ f) ≤ (max_i Inf_i f)^{(1−σ²)/(2σ²)}`.
#[derive(Debug, Clone, Serialize)]
pub struct HyperBound {
    pub lhs: f64,
    pub rhs: f64,
    pub exponent: f64,
    pub max_influence: f64,
    pub ok: bool,
}

pub fn delta_hyper_bound<T: Scalar>(f: &BooleanFunction<T>, sigma: &T) -> Result<(T, HyperBound)> {
    let s2 = sigma.clone() * sigma.clone();
    if s2 < T::half() || s2 > T::one() {
        return precondition(format!("need 1/2 ≤ σ² ≤ 1, got σ = {sigma:?}"));
    }
    if !f.values().iter().all(|v| v.abs() <= T::one()) {
        return precondition("f must take values in [−1,1]");
    }
    let fe = f.fourier()?;
    let lhs = delta_from_expansion(&fe.noise(sigma)?);
    let tau = fe.max_influence().to_double();
    let s2f = s2.to_double();
    let exponent = (1.0 - s2f) / (2.0 * s2f);
    let rhs = tau.powf(exponent);
    let lhs_f = lhs.to_double();
    let ok = lhs_f <= rhs + 1e-12;
    Ok((
        lhs,
        HyperBound {
            lhs: lhs_f,
            rhs,
            exponent,
            max_influence: tau,
            ok,
        },
    ))
}

/// Summary of the three `Δ` computations.
#[derive(Debug, Clone, Serialize)]
pub struct DeltaReport {
    pub delta_recursive: String,
    pub delta_fourier: String,
    pub flip_bound: String,
    pub max_influence: String,
    pub recursive_equals_fourier: bool,
    pub flip_bound_holds: bool,
    pub hyper_bound: Option<HyperBound>,
}

/// Runs every route; values are rendered with `render`.
pub fn delta_report<T: Scalar>(
    f: &BooleanFunction<T>,
    sigma: Option<&T>,
    render: impl Fn(&T) -> String,
) -> Result<DeltaReport> {
    let rec = delta_recursive(f);
    let four = delta_fourier(f)?;
    let flip = flip_bound(f);
    let hyper = match sigma {
        Some(s) => Some(delta_hyper_bound(f, s)?.1),
        None => None,
    };
    Ok(DeltaReport {
        delta_recursive: render(&rec),
        delta_fourier: render(&four),
        flip_bound: render(&flip),
        max_influence: render(&f.fourier()?.max_influence()),
        recursive_equals_fourier: rec == four,
        flip_bound_holds: rec <= flip,
        hyper_bound: hyper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{constant, dictator, parity, random_dyadic};
    use crate::scalar::Rational as Q;

    fn q(a: i64, b: i64) -> Q {
        Q::from_ratio(a, b)
    }

    #[test]
    fn small_examples() {
        let d = dictator::<Q>(1, 1).unwrap();
        assert_eq!(delta_recursive(&d), q(1, 8));
        assert_eq!(delta_fourier(&d).unwrap(), q(1, 8));
        assert_eq!(flip_bound(&d), q(1, 1));
        let c = constant(3, q(2, 7)).unwrap();
        assert_eq!(delta_recursive(&c), q(0, 1));
        assert_eq!(flip_bound(&c), q(0, 1));
        let p = parity::<Q>(2, &[1, 2]).unwrap();
        assert_eq!(delta_recursive(&p), q(1, 1));
        assert_eq!(delta_fourier(&p).unwrap(), q(1, 1));
    }

    #[test]
    fn restriction_examples() {
        let p = parity::<Q>(2, &[1, 2]).unwrap();
        let rc = restriction_coefficient(&p, &[2], &[-1], &[1]).unwrap();
        assert!(rc.agree());
        assert_eq!(rc.direct, q(-1, 1));
        let f = random_dyadic::<Q>(3, 6, 11).unwrap();
        let rc = restriction_coefficient(&f, &[], &[], &[1, 3]).unwrap();
        assert_eq!(rc.direct, f.fourier().unwrap().coeff(0b101).clone());
        assert!(rc.agree());
        assert!(restriction_coefficient(&f, &[1], &[1], &[1]).is_err());
    }

    #[test]
    fn variance_chain_dictator() {
        let d = dictator::<Q>(3, 2).unwrap();
        assert!(variance_identity(&d).unwrap());
        assert_eq!(d.variance(), q(1, 4));
        assert!(squared_restriction_stats(&d, &[1], &[2], Some(3)).is_err());
    }

    #[test]
    fn commute_trivial_sigmas() {
        let f = random_dyadic::<Q>(4, 5, 2).unwrap();
        assert!(noise_restriction_commute(&f, &q(1, 1), &[2, 4], &[1]).unwrap());
        assert!(noise_restriction_commute(&f, &q(0, 1), &[2, 4], &[1]).unwrap());
        assert!(noise_restriction_commute(&f, &q(1, 2), &[3], &[1, 2]).unwrap());
    }

    #[test]
    fn hyper_bound_dictator() {
        let d = dictator::<Q>(3, 1).unwrap();
        let (lhs, hb) = delta_hyper_bound(&d, &q(9, 10)).unwrap();
        assert_eq!(lhs, q(729, 8000));
        assert!(hb.ok);
        assert!(delta_hyper_bound(&d, &q(1, 2)).is_err());
    }
}
