//! Scalar abstraction shared by the exact and floating-point code paths.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use std::fmt::Debug;

/// Arbitrary-precision rational.
pub type Rational = BigRational;

/// Field element used by the cube, delta, Bernstein and SoS code.
///
/// Implemented for `f32`, `f64` and [`Rational`]. Only the rational
/// instance gives exact identities; the float instances are mirrors.
pub trait Scalar: Num + Signed + Clone + Debug + PartialOrd + Send + Sync + 'static {
    fn from_int(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Exact for rationals (every finite double is a dyadic rational).
    fn from_double(v: f64) -> Self;
    fn to_double(&self) -> f64;
    /// Exact for rationals, nearest value otherwise.
    fn from_rational(r: &Rational) -> Self;
    fn is_exact() -> bool;

    /// Short human-readable form (`p/q` for rationals).
    fn render(&self) -> String {
        format!("{}", self.to_double())
    }

    fn half() -> Self {
        Self::from_ratio(1, 2)
    }

    fn pow_u(&self, k: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    fn cube_abs(&self) -> Self {
        let a = self.abs();
        a.clone() * a.clone() * a
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_int(v: i64) -> Self {
                v as $t
            }
            fn from_ratio(num: i64, den: i64) -> Self {
                (num as f64 / den as f64) as $t
            }
            fn from_double(v: f64) -> Self {
                v as $t
            }
            fn to_double(&self) -> f64 {
                *self as f64
            }
            fn from_rational(r: &Rational) -> Self {
                ratio_to_f64(r) as $t
            }
            fn is_exact() -> bool {
                false
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

impl Scalar for Rational {
    fn from_int(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_double(v: f64) -> Self {
        Rational::from_float(v).unwrap_or_else(Rational::zero)
    }
    fn to_double(&self) -> f64 {
        ratio_to_f64(self)
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn is_exact() -> bool {
        true
    }
    fn render(&self) -> String {
        format_rational(self)
    }
}

/// Rational to nearest double, robust to huge numerators and denominators.
pub fn ratio_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift = nb - db - 60;
    let scaled = if shift >= 0 {
        r.numer() / (r.denom() << shift as usize)
    } else {
        (r.numer() << (-shift) as usize) / r.denom()
    };
    scaled.to_f64().unwrap_or(0.0) * 2f64.powi(shift as i32)
}

/// Parse `"p/q"`, `"p"` or a decimal literal into an exact rational.
pub fn parse_rational(s: &str) -> crate::Result<Rational> {
    let s = s.trim();
    let bad = || crate::Error::Parse(format!("not a rational: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Ok(p) = s.parse::<BigInt>() {
        return Ok(Rational::from_integer(p));
    }
    // decimal such as -0.125 or 1e-3
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let num: BigInt = all.parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        Rational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

/// Format as `"p/q"` (or `"p"` for integers).
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Convert an `f64` parameter to a rational when it is a short decimal,
/// falling back to the exact binary value.
pub fn rational_from_decimal(v: f64) -> Rational {
    let s = format!("{v}");
    parse_rational(&s).unwrap_or_else(|_| Rational::from_double(v))
}

/// Serializes a rational as its `p/q` string.
pub fn serialize_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}
#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/6").unwrap(), Rational::from_ratio(1, 2));
        assert_eq!(parse_rational("-0.125").unwrap(), Rational::from_ratio(-1, 8));
        assert_eq!(parse_rational("7").unwrap(), Rational::from_int(7));
        assert_eq!(parse_rational("1e-2").unwrap(), Rational::from_ratio(1, 100));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn huge_ratio_to_f64() {
        let big = num_traits::pow(BigInt::from(10), 400);
        let r = Rational::new(big.clone() * 3, big);
        assert!((r.to_double() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn powi_matches_repeated_product() {
        let x = Rational::from_ratio(-2, 3);
        assert_eq!(x.pow_u(3), Rational::from_ratio(-8, 27));
        assert_eq!(x.pow_u(0), Rational::one());
        assert_eq!(x.cube_abs(), Rational::from_ratio(8, 27));
    }
}
