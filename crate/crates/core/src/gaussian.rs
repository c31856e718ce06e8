//! Standard normal functions and the quadrant probability `J_ρ(x, y)`.
//!
//! All formulas are written in CDF coordinates `s = Φ⁻¹(x)`, `t = Φ⁻¹(y)`
//! with `r = √(1 − ρ²)` and the bivariate density
//! `ψ(s,t) = exp(−(s² − 2ρst + t²) / (2r²)) / (2πr)`.

use crate::error::{domain, Result};
use num_traits::{Float, FromPrimitive};
use std::fmt::Debug;
use std::sync::Arc;

/// Floating type usable by the Gaussian code.
pub trait Real: Float + FromPrimitive + Debug + Send + Sync + 'static {}
impl<T: Float + FromPrimitive + Debug + Send + Sync + 'static> Real for T {}

#[inline]
fn c<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("constant representable")
}

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Complementary error function (evaluated in `f64`).
pub fn erfc<T: Real>(x: T) -> T {
    c(libm::erfc(x.to_f64().expect("finite float")))
}

/// `Φ(z)`.
pub fn std_normal_cdf<T: Real>(z: T) -> T {
    c::<T>(0.5) * erfc(-z / c(std::f64::consts::SQRT_2))
}

/// `φ(z)`.
pub fn std_normal_pdf<T: Real>(z: T) -> T {
    (-z * z * c(0.5)).exp() / c(SQRT_2PI)
}

/// `Φ⁻¹(p)`: rational initial guess refined by two Newton steps.
pub fn std_normal_inv_cdf<T: Real>(p: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return domain(format!("inverse normal cdf needs p in (0,1), got {p:?}"));
    }
    let pf = p.to_f64().expect("finite");
    let mut x = c::<T>(initial_inv_cdf(pf));
    for _ in 0..2 {
        let dens = std_normal_pdf(x);
        if dens <= T::zero() {
            break;
        }
        x = x - (std_normal_cdf(x) - p) / dens;
    }
    Ok(x)
}

fn initial_inv_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383_577_518_672_69e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    let p_low = 0.02425;
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < p_low {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    }
}

/// `1 − arccos(ρ)/π`, the probability that two ρ-correlated Gaussians share a sign.
pub fn sheppard_two_sided(rho: f64) -> Result<f64> {
    if !(rho.abs() <= 1.0) {
        return domain(format!("rho {rho} outside [−1,1]"));
    }
    Ok(1.0 - rho.acos() / std::f64::consts::PI)
}

/// Gauss–Legendre rule on `[−1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Nodes by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0f64; n];
        let mut weights = vec![0.0f64; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0f64, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { z } else { p1 };
                let pm = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
                let dz = pn / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre {
            nodes: nodes.into_iter().map(c).collect(),
            weights: weights.into_iter().map(c).collect(),
        }
    }

    pub fn integrate(&self, f: &impl Fn(T) -> T, a: T, b: T) -> T {
        let half = (b - a) * c(0.5);
        let mid = (a + b) * c(0.5);
        let mut s = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s = s + *w * f(mid + half * *x);
        }
        s * half
    }
}

/// Evaluator for `J_ρ` and its closed-form derivatives.
#[derive(Debug, Clone)]
pub struct JEvaluator<T: Real> {
    rho: T,
    r: T,
    quad_tolerance: T,
    tail_cutoff: T,
    rule: Arc<GaussLegendre<T>>,
}

/// Third partials in the order `(3,0), (2,1), (1,2), (0,3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThirdPartials<T> {
    pub xxx: T,
    pub xxy: T,
    pub xyy: T,
    pub yyy: T,
}

impl<T: Real> ThirdPartials<T> {
    pub fn max_abs(&self) -> T {
        self.xxx
            .abs()
            .max(self.xxy.abs())
            .max(self.xyy.abs())
            .max(self.yyy.abs())
    }
}

/// Symmetric 2×2 matrix `[[a, b], [b, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sym2<T> {
    pub a: T,
    pub b: T,
    pub d: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Definiteness {
    /// Numerically zero: both PSD and NSD.
    Zero,
    Psd,
    Nsd,
    Indefinite,
}

impl<T: Real> Sym2<T> {
    pub fn eigenvalues(&self) -> (T, T) {
        let half = c::<T>(0.5);
        let mean = (self.a + self.d) * half;
        let diff = (self.a - self.d) * half;
        let rad = (diff * diff + self.b * self.b).sqrt();
        (mean - rad, mean + rad)
    }

    pub fn frobenius(&self) -> T {
        (self.a * self.a + c::<T>(2.0) * self.b * self.b + self.d * self.d).sqrt()
    }

    pub fn definiteness(&self) -> Definiteness {
        m_definiteness(self)
    }
}

/// Eigenvalue signs with tolerance `1e−9·‖M‖_F`.
pub fn m_definiteness<T: Real>(m: &Sym2<T>) -> Definiteness {
    let tol = c::<T>(1e-9) * m.frobenius();
    let (lo, hi) = m.eigenvalues();
    match (lo >= -tol, hi <= tol) {
        (true, true) => Definiteness::Zero,
        (true, false) => Definiteness::Psd,
        (false, true) => Definiteness::Nsd,
        (false, false) => Definiteness::Indefinite,
    }
}

impl<T: Real> JEvaluator<T> {
    /// Defaults: tolerance `1e−12`, tail cutoff `8.5`.
    pub fn new(rho: T) -> Result<Self> {
        if !(rho.abs() < T::one() - c(1e-9)) {
            return domain(format!("|rho| must be below 1 − 1e−9, got {rho:?}"));
        }
        Ok(JEvaluator {
            rho,
            r: (T::one() - rho * rho).sqrt(),
            quad_tolerance: c(1e-12),
            tail_cutoff: c(8.5),
            rule: Arc::new(GaussLegendre::new(16)),
        })
    }

    pub fn with_tolerance(mut self, tol: T) -> Result<Self> {
        if !(tol > T::zero()) {
            return domain("quadrature tolerance must be positive");
        }
        self.quad_tolerance = tol;
        Ok(self)
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    fn coords(&self, x: T, y: T) -> Result<(T, T)> {
        let inside = |v: T| v > T::zero() && v < T::one();
        if !inside(x) || !inside(y) {
            return domain(format!("J needs x, y in (0,1), got ({x:?}, {y:?})"));
        }
        Ok((std_normal_inv_cdf(x)?, std_normal_inv_cdf(y)?))
    }

    /// Bivariate normal density at `(s, t)`.
    pub fn psi(&self, s: T, t: T) -> T {
        let r2 = self.r * self.r;
        let q = (s * s - c::<T>(2.0) * self.rho * s * t + t * t) / (c::<T>(2.0) * r2);
        (-q).exp() / (c::<T>(2.0 * std::f64::consts::PI) * self.r)
    }

    /// `∫_{−cutoff}^{s} φ(u) Φ((t − ρu)/r) du`.
    pub fn k_value(&self, s: T, t: T) -> T {
        let lo = -self.tail_cutoff;
        if s <= lo {
            return T::zero();
        }
        let (rho, r, cut) = (self.rho, self.r, self.tail_cutoff);
        // Split [lo, s] where the inner argument leaves [−cut, cut]: there
        // Φ(arg) is 1 or 0 to within 1e−17 and the integral is closed-form.
        let (mut one_lo, mut one_hi) = (lo, lo);
        let (mut mid_lo, mut mid_hi) = (lo, s);
        if rho != T::zero() {
            let u_plus = (t - cut * r) / rho; // arg = +cut
            let u_minus = (t + cut * r) / rho; // arg = −cut
            if rho > T::zero() {
                // arg decreasing in u: one-region below u_plus, zero-region above u_minus
                one_hi = u_plus.min(s).max(lo);
                mid_lo = one_hi;
                mid_hi = u_minus.min(s).max(mid_lo);
            } else {
                // arg increasing: zero-region below u_minus, one-region above u_plus
                mid_lo = u_minus.max(lo).min(s);
                mid_hi = u_plus.max(mid_lo).min(s);
                one_lo = mid_hi;
                one_hi = s;
            }
        } else if t >= cut {
            one_hi = s;
            mid_lo = s;
        } else if t <= -cut {
            mid_lo = s;
        }
        let mut total = T::zero();
        if one_hi > one_lo {
            total = total + std_normal_cdf(one_hi) - std_normal_cdf(one_lo);
        }
        if mid_hi > mid_lo {
            let f = |u: T| std_normal_pdf(u) * std_normal_cdf((t - rho * u) / r);
            total = total + self.adaptive(&f, mid_lo, mid_hi);
        }
        total
    }

    fn adaptive(&self, f: &impl Fn(T) -> T, a: T, b: T) -> T {
        let width = b - a;
        let panels = (width / c(5.0)).ceil().to_usize().unwrap_or(1).max(1);
        let h = width / c(panels as f64);
        let tol = self.quad_tolerance / c(panels as f64);
        let mut sum = T::zero();
        for k in 0..panels {
            let pa = a + h * c(k as f64);
            let pb = if k + 1 == panels { b } else { pa + h };
            let whole = self.rule.integrate(f, pa, pb);
            sum = sum + self.refine(f, pa, pb, whole, tol, 0);
        }
        sum
    }

    fn refine(&self, f: &impl Fn(T) -> T, a: T, b: T, whole: T, tol: T, depth: u32) -> T {
        let m = (a + b) * c(0.5);
        let left = self.rule.integrate(f, a, m);
        let right = self.rule.integrate(f, m, b);
        let split = left + right;
        let noise = c::<T>(16.0) * T::epsilon() * split.abs().max(T::min_positive_value());
        if (split - whole).abs() <= tol.max(noise) || depth >= 16 {
            return split;
        }
        let half_tol = tol * c(0.5);
        self.refine(f, a, m, left, half_tol, depth + 1)
            + self.refine(f, m, b, right, half_tol, depth + 1)
    }

    /// `J_ρ(x, y)`.
    pub fn value(&self, x: T, y: T) -> Result<T> {
        let (s, t) = self.coords(x, y)?;
        Ok(self.k_value(s, t))
    }

    /// `(∂J/∂x, ∂J/∂y)`.
    pub fn grad(&self, x: T, y: T) -> Result<(T, T)> {
        let (s, t) = self.coords(x, y)?;
        Ok((
            std_normal_cdf((t - self.rho * s) / self.r),
            std_normal_cdf((s - self.rho * t) / self.r),
        ))
    }

    /// Hessian `[[Jxx, Jxy], [Jxy, Jyy]]`.
    pub fn hessian(&self, x: T, y: T) -> Result<Sym2<T>> {
        let (s, t) = self.coords(x, y)?;
        let psi = self.psi(s, t);
        let (ps, pt) = (std_normal_pdf(s), std_normal_pdf(t));
        Ok(Sym2 {
            a: -self.rho * psi / (ps * ps),
            b: psi / (ps * pt),
            d: -self.rho * psi / (pt * pt),
        })
    }

    /// The four third partials.
    pub fn third(&self, x: T, y: T) -> Result<ThirdPartials<T>> {
        let (s, t) = self.coords(x, y)?;
        let rho = self.rho;
        let r2 = self.r * self.r;
        let psi = self.psi(s, t);
        let (ps, pt) = (std_normal_pdf(s), std_normal_pdf(t));
        let lead = T::one() - c::<T>(2.0) * rho * rho;
        Ok(ThirdPartials {
            xxx: -rho * psi * (rho * t + lead * s) / (r2 * ps * ps * ps),
            xxy: rho * psi * (t - rho * s) / (r2 * ps * ps * pt),
            xyy: rho * psi * (s - rho * t) / (r2 * pt * pt * ps),
            yyy: -rho * psi * (rho * s + lead * t) / (r2 * pt * pt * pt),
        })
    }

    /// `∂J/∂ρ = ψ(s, t)`; the bound `|∂J/∂ρ| ≤ (1 − ρ²)^{−3/2}` is checked.
    pub fn drho(&self, x: T, y: T) -> Result<T> {
        let (s, t) = self.coords(x, y)?;
        let v = self.psi(s, t);
        let bound = (T::one() - self.rho * self.rho).powf(c(-1.5));
        if v.abs() > bound {
            return Err(crate::Error::Structural(format!(
                "|dJ/drho| = {v:?} exceeds (1−ρ²)^(−3/2) = {bound:?}"
            )));
        }
        Ok(v)
    }

    /// `M_{ρσ}(x,y) = [[Jxx, σJxy], [σJxy, Jyy]]` with `J = J_ρ`.
    pub fn m_matrix(&self, sigma: T, x: T, y: T) -> Result<Sym2<T>> {
        let h = self.hessian(x, y)?;
        Ok(Sym2 {
            a: h.a,
            b: sigma * h.b,
            d: h.d,
        })
    }

    /// `J` on the tensor grid `xs × ys` (both ascending, inside (0,1)).
    ///
    /// Each row starts from one quadrature value and is continued along `t`
    /// by integrating `∂K/∂t = φ(t) Φ((s − ρt)/r)` over consecutive cells
    /// with a fixed 8-point rule. Far cheaper than pointwise evaluation.
    pub fn tabulate(&self, xs: &[T], ys: &[T]) -> Result<Vec<Vec<T>>> {
        if ys.windows(2).any(|w| w[1] <= w[0]) {
            return domain("tabulate needs strictly ascending y nodes");
        }
        let ts = ys
            .iter()
            .map(|&y| self.coords(c(0.5), y).map(|p| p.1))
            .collect::<Result<Vec<T>>>()?;
        let short = GaussLegendre::<T>::new(8);
        let rows: Vec<Result<Vec<T>>> = xs
            .iter()
            .map(|&x| {
                let (s, _) = self.coords(x, c(0.5))?;
                let g = |u: T| std_normal_pdf(u) * std_normal_cdf((s - self.rho * u) / self.r);
                let mut row = Vec::with_capacity(ts.len());
                let mut acc = self.k_value(s, ts[0]);
                row.push(acc);
                for w in ts.windows(2) {
                    acc = acc + short.integrate(&g, w[0], w[1]);
                    row.push(acc);
                }
                Ok(row)
            })
            .collect();
        rows.into_iter().collect()
    }
}

/// Convenience: `J_ρ(x, y)` with default settings.
pub fn j_value(rho: f64, x: f64, y: f64) -> Result<f64> {
    JEvaluator::new(rho)?.value(x, y)
}

/// `sup_{grid} max|∂³J|·(xy(1−x)(1−y))^cexp` on an `m × m` interior grid.
pub fn weighted_third_sup(rho: f64, cexp: f64, m: usize) -> Result<f64> {
    let ev = JEvaluator::new(rho)?;
    let mut best = 0.0f64;
    for i in 1..m {
        for j in 1..m {
            let x = i as f64 / m as f64;
            let y = j as f64 / m as f64;
            let w = (x * y * (1.0 - x) * (1.0 - y)).powf(cexp);
            best = best.max(ev.third(x, y)?.max_abs() * w);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_basics() {
        assert_eq!(std_normal_cdf(0.0f64), 0.5);
        for z in [0.5, 1.0, 2.0, 3.5, 6.0] {
            assert!((std_normal_cdf(z) + std_normal_cdf(-z) - 1.0f64).abs() < 1e-15);
        }
        // reference values
        assert!((std_normal_cdf(1.0f64) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((std_normal_cdf(-3.0f64) / 1.349_898_031_630_094_6e-3 - 1.0).abs() < 1e-14);
        assert!((std_normal_cdf(-5.0f64) / 2.866_515_718_791_939e-7 - 1.0).abs() < 1e-13);
        assert!((erfc(3.0f64) / 2.209_049_699_858_544e-5 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_cdf_round_trip() {
        assert_eq!(std_normal_inv_cdf(0.5f64).unwrap(), 0.0);
        for &p in &[1e-10, 1e-4, 0.02, 0.1, 0.3, 0.5, 0.77, 0.975, 0.9999, 1.0 - 1e-9] {
            let z = std_normal_inv_cdf(p).unwrap();
            assert!((std_normal_cdf(z) - p).abs() <= 1e-14, "p={p}");
        }
        assert!(std_normal_inv_cdf(0.0f64).is_err());
        assert!(std_normal_inv_cdf(1.0f64).is_err());
    }

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        let g = GaussLegendre::<f64>::new(16);
        let v = g.integrate(&|x: f64| x.powi(30) + 3.0 * x.powi(7), -1.0, 1.0);
        assert!((v - 2.0 / 31.0).abs() < 1e-15);
    }

    #[test]
    fn j_independent_and_sheppard() {
        let ev = JEvaluator::new(0.0).unwrap();
        for &(x, y) in &[(0.1, 0.2), (0.5, 0.5), (0.93, 0.41)] {
            assert!((ev.value(x, y).unwrap() - x * y).abs() < 1e-12);
        }
        for &rho in &[-0.9, -0.5, 0.3, 0.7, 0.99] {
            let v = j_value(rho, 0.5, 0.5).unwrap();
            let want = 0.5 * sheppard_two_sided(rho).unwrap();
            assert!((v - want).abs() < 1e-10, "rho={rho}");
        }
        let x = 0.37;
        let v = j_value(0.99, x, x).unwrap();
        assert!(v >= x * x && v <= x);
    }

    #[test]
    fn boundary_and_rho_rejected() {
        let ev = JEvaluator::new(0.5).unwrap();
        assert!(ev.value(0.0, 0.5).is_err());
        assert!(ev.grad(0.5, 1.0).is_err());
        assert!(JEvaluator::new(1.0f64).is_err());
        assert!(JEvaluator::new(-1.0 + 1e-12).is_err());
    }

    #[test]
    fn derivative_shapes_at_zero_rho() {
        let ev = JEvaluator::new(0.0).unwrap();
        let (gx, gy) = ev.grad(0.3, 0.8).unwrap();
        assert!((gx - 0.8).abs() < 1e-14 && (gy - 0.3).abs() < 1e-14);
        let h = ev.hessian(0.3, 0.8).unwrap();
        assert_eq!(h.a, 0.0);
        assert!((h.b - 1.0).abs() < 1e-14);
        assert_eq!(ev.third(0.3, 0.8).unwrap().max_abs(), 0.0);
        let ev = JEvaluator::new(0.6).unwrap();
        let (gx, gy) = ev.grad(0.5, 0.5).unwrap();
        assert_eq!(gx, gy);
    }

    #[test]
    fn finite_difference_gradient_point() {
        let ev = JEvaluator::new(0.5).unwrap();
        let (x, y, h) = (0.3, 0.7, 1e-5);
        let fd = (ev.value(x + h, y).unwrap() - ev.value(x - h, y).unwrap()) / (2.0 * h);
        assert!((fd - ev.grad(x, y).unwrap().0).abs() < 1e-7);
    }

    #[test]
    fn drho_matches_difference_in_rho() {
        let h = 1e-5;
        let up = j_value(0.3 + h, 0.5, 0.5).unwrap();
        let dn = j_value(0.3 - h, 0.5, 0.5).unwrap();
        let d = JEvaluator::new(0.3).unwrap().drho(0.5, 0.5).unwrap();
        assert!(((up - dn) / (2.0 * h) - d).abs() <= 1e-6 * d.abs());
    }

    #[test]
    fn m_matrix_examples() {
        let z = JEvaluator::new(0.0).unwrap().m_matrix(0.0, 0.4, 0.4).unwrap();
        assert_eq!(z.definiteness(), Definiteness::Zero);
        let m = JEvaluator::new(0.6).unwrap().m_matrix(0.3, 0.4, 0.4).unwrap();
        assert_eq!(m.definiteness(), Definiteness::Nsd);
        let m = JEvaluator::new(-0.6).unwrap().m_matrix(-0.3, 0.4, 0.4).unwrap();
        assert_eq!(m.definiteness(), Definiteness::Psd);
    }

    #[test]
    fn tabulate_matches_pointwise() {
        let ev = JEvaluator::new(0.5).unwrap();
        let xs: Vec<f64> = (0..5).map(|i| 0.1 + 0.2 * i as f64).collect();
        let ys: Vec<f64> = (0..200).map(|i| 0.1 + 0.8 * i as f64 / 199.0).collect();
        let tab = ev.tabulate(&xs, &ys).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            for j in (0..ys.len()).step_by(37) {
                let v = ev.value(x, ys[j]).unwrap();
                assert!((tab[i][j] - v).abs() < 1e-12, "{x} {}", ys[j]);
            }
        }
    }

    #[test]
    fn generic_over_f32() {
        let v = JEvaluator::<f32>::new(0.0).unwrap().value(0.25, 0.5).unwrap();
        assert!((v - 0.125).abs() < 1e-5);
    }

    #[test]
    fn sheppard_values() {
        assert_eq!(sheppard_two_sided(0.0).unwrap(), 0.5);
        assert!((sheppard_two_sided(0.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(sheppard_two_sided(-1.0).unwrap().abs() < 1e-15);
    }
}
