//! Known values and independent re-derivations checked against the library.

use std::f64::consts::PI;

use stabkit::bernstein::bernstein_1d;
use stabkit::cube::{majority, majority_stability_dp, random_dyadic, BooleanFunction};
use stabkit::delta::delta_recursive;
use stabkit::gaussian::{std_normal_cdf, std_normal_inv_cdf, std_normal_pdf, JEvaluator};
use stabkit::ug::bounds_report;
use num_traits::Signed;
use stabkit::{Rational, Scalar};

fn q(a: i64, b: i64) -> Rational {
    Rational::from_ratio(a, b)
}

#[test]
fn normal_cdf_reference_values() {
    // Φ(1), Φ(−2), Φ(3) to full double precision.
    assert!((std_normal_cdf(1.0f64) - 0.841_344_746_068_542_9).abs() < 1e-15);
    assert!((std_normal_cdf(-2.0f64) - 0.022_750_131_948_179_21).abs() < 1e-16);
    assert!((std_normal_cdf(3.0f64) - 0.998_650_101_968_369_9).abs() < 1e-15);
}

#[test]
fn j_at_the_centre_is_the_arcsine_law() {
    for rho in [-0.9f64, -0.5, -0.1, 0.2, 0.6, 0.95] {
        let j = JEvaluator::new(rho).unwrap().value(0.5, 0.5).unwrap();
        let want = 0.25 + rho.asin() / (2.0 * PI);
        assert!((j - want).abs() < 1e-12, "rho = {rho}: {j} vs {want}");
    }
}

/// `J_ρ(x, y) = xy + ∫_0^ρ φ₂(a, b; r) dr`, with `a = Φ⁻¹(x)`, `b = Φ⁻¹(y)`
/// and `φ₂` the bivariate normal density, by composite Simpson in `r`.
fn j_by_density_integral(rho: f64, x: f64, y: f64) -> f64 {
    let a = std_normal_inv_cdf(x).unwrap();
    let b = std_normal_inv_cdf(y).unwrap();
    let density = |r: f64| {
        let s = 1.0 - r * r;
        (-(a * a - 2.0 * r * a * b + b * b) / (2.0 * s)).exp() / (2.0 * PI * s.sqrt())
    };
    let m = 2000;
    let h = rho / m as f64;
    let mut acc = density(0.0) + density(rho);
    for i in 1..m {
        acc += density(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    x * y + acc * h / 3.0
}

#[test]
fn j_matches_the_density_integral() {
    for rho in [-0.7f64, -0.3, 0.3, 0.7] {
        let j = JEvaluator::new(rho).unwrap();
        for (x, y) in [(0.1, 0.9), (0.25, 0.4), (0.5, 0.8), (0.85, 0.85), (0.3, 0.05)] {
            let got = j.value(x, y).unwrap();
            let want = j_by_density_integral(rho, x, y);
            assert!((got - want).abs() < 1e-10, "rho {rho} at ({x}, {y}): {got} vs {want}");
        }
    }
}

#[test]
fn j_reflection_identity() {
    // P(X ≤ a, Y ≤ b) + P(X ≤ a, −Y ≤ −b) = P(X ≤ a).
    for rho in [-0.6f64, 0.4] {
        let (j, jm) = (JEvaluator::new(rho).unwrap(), JEvaluator::new(-rho).unwrap());
        for (x, y) in [(0.2, 0.3), (0.7, 0.6), (0.5, 0.1)] {
            let s = j.value(x, y).unwrap() + jm.value(x, 1.0 - y).unwrap();
            assert!((s - x).abs() < 1e-12);
        }
    }
}

#[test]
fn j_gradient_is_a_conditional_probability() {
    // ∂J/∂x = Φ((b − ρa)/√(1−ρ²)).
    let rho: f64 = 0.45;
    let j = JEvaluator::new(rho).unwrap();
    let (x, y) = (0.3, 0.65);
    let (a, b) = (std_normal_inv_cdf(x).unwrap(), std_normal_inv_cdf(y).unwrap());
    let want = std_normal_cdf((b - rho * a) / (1.0 - rho * rho).sqrt());
    assert!((j.grad(x, y).unwrap().0 - want).abs() < 1e-12);
    assert!(std_normal_pdf(0.0f64) > 0.398 && std_normal_pdf(0.0f64) < 0.399);
}

#[test]
fn majority_three_closed_form() {
    // (1/2)(1 + (3ρ + ρ³)/4) for the {0,1}-valued majority on 3 bits.
    let f = majority::<Rational>(3).unwrap();
    for r in [q(1, 2), q(-1, 3), q(2, 5)] {
        let want = q(1, 2) + (q(3, 8) * &r) + q(1, 8) * r.pow_u(3);
        assert_eq!(f.fourier().unwrap().stab_two_sided(&r).unwrap(), want);
    }
}

#[test]
fn majority_approaches_the_arccos_limit() {
    for rho in [-0.5f64, 0.3, 0.5, 0.8] {
        let limit = 1.0 - rho.acos() / PI;
        let v = majority_stability_dp(2001, rho).unwrap();
        assert!((v - limit).abs() < 2e-3, "rho = {rho}: {v} vs {limit}");
    }
}

/// `Δ` straight from its definition, by restricting the last coordinate
/// through the cube API.
fn delta_by_definition(f: &BooleanFunction<Rational>) -> Rational {
    let n = f.n();
    if n == 1 {
        // Index 0 is the point x = +1.
        let v = f.values();
        return ((&v[0] - &v[1]) / Rational::from_int(2)).abs().pow_u(3);
    }
    let plus = f.restrict(&[n], &[1]).unwrap();
    let minus = f.restrict(&[n], &[-1]).unwrap();
    let jump = (plus.mean() - minus.mean()) / Rational::from_int(2);
    let jump3 = jump.abs().pow_u(3);
    (delta_by_definition(&plus) + delta_by_definition(&minus)) / Rational::from_int(2) + jump3
}

#[test]
fn delta_matches_its_definition() {
    for n in 1..=6 {
        for seed in 0..5 {
            let f = random_dyadic::<Rational>(n, 5, seed).unwrap();
            assert_eq!(delta_recursive(&f), delta_by_definition(&f), "n = {n}, seed = {seed}");
        }
    }
}

#[test]
fn bernstein_of_a_square() {
    // B_n(x²) = x² + x(1 − x)/n.
    for n in [1usize, 2, 5, 9] {
        let p = bernstein_1d(|x| x * x, n).unwrap();
        for x in [q(0, 1), q(1, 3), q(3, 4), q(1, 1)] {
            let want = &x * &x + &x * (Rational::from_int(1) - &x) / Rational::from_int(n as i64);
            assert_eq!(p.eval(&x), want);
        }
    }
}

#[test]
fn bounds_coincide_at_minus_one() {
    let b = bounds_report(-1.0).unwrap();
    assert!((b.sdp_like - 1.0).abs() < 1e-15);
    assert!((b.oz_bound - 1.0).abs() < 1e-15);
    assert!((b.target - 1.0).abs() < 1e-15);
}
