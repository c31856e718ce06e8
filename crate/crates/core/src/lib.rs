//! Boolean-cube Fourier analysis, Gaussian noise stability, a cubic
//! deviation functional, Bernstein approximation of the bivariate Gaussian
//! stability function, exact sum-of-squares certificates and the Unique
//! Games to Max-Cut reduction.
//!
//! Numerical code is generic over [`Scalar`]; the aliases below fix the
//! two instances used in practice.

pub mod battery;
pub mod bernstein;
pub mod cube;
pub mod delta;
pub mod error;
pub mod gaussian;
pub mod lemmas;
pub mod linalg;
pub mod scalar;
pub mod sos;
pub mod tensorization;
pub mod ug;

pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};

/// Exact truth tables.
pub type ExactFunction = cube::BooleanFunction<Rational>;
/// Floating-point truth tables.
pub type FloatFunction = cube::BooleanFunction<f64>;
pub type ExactExpansion = cube::FourierExpansion<Rational>;
pub type FloatExpansion = cube::FourierExpansion<f64>;
pub type ExactPoly2 = bernstein::Poly2<Rational>;
pub type FloatPoly2 = bernstein::Poly2<f64>;
pub type ExactPolynomial = sos::Polynomial<Rational>;
pub type FloatPseudoExpectation = sos::PseudoExpectation<f64>;
pub type ExactPseudoExpectation = sos::PseudoExpectation<Rational>;
pub type JEvaluatorF64 = gaussian::JEvaluator<f64>;
