//! Dense block-diagonal semidefinite programs with free variables.
//!
//! Primal `min ⟨C, X⟩ + cᵀw  s.t. ⟨A_i, X⟩ + (Fw)_i = b_i,  X ⪰ 0`;
//! dual `max bᵀy  s.t. Σ y_i A_i + Z = C,  Fᵀy = c,  Z ⪰ 0`.
//! Infeasible-start path following with the HKM direction and a Mehrotra
//! predictor-corrector step.

use crate::linalg::{cholesky, jacobi_eigen, lu_solve, spd_inverse, Mat};
use serde::Serialize;

pub const MAX_ITERATIONS: usize = 500;
pub const GAP_TARGET: f64 = 1e-9;
pub const LOOSE_TARGET: f64 = 1e-6;
const STEP_FRACTION: f64 = 0.95;
const DIVERGENCE: f64 = 1e10;

/// Symmetric constraint matrix stored as `(block, row, col, value)` with
/// `row ≤ col`; an off-diagonal entry stands for both positions.
#[derive(Debug, Clone, Default)]
pub struct SparseSym {
    pub entries: Vec<(usize, usize, usize, f64)>,
}

impl SparseSym {
    pub fn push(&mut self, block: usize, r: usize, c: usize, v: f64) {
        let (r, c) = if r <= c { (r, c) } else { (c, r) };
        self.entries.push((block, r, c, v));
    }

    fn inner(&self, x: &[Mat]) -> f64 {
        self.entries
            .iter()
            .map(|&(b, r, c, v)| if r == c { v * x[b][(r, c)] } else { 2.0 * v * x[b][(r, c)] })
            .sum()
    }

    /// Adds `s · A` to the block matrices.
    fn add_to(&self, s: f64, out: &mut [Mat]) {
        for &(b, r, c, v) in &self.entries {
            out[b][(r, c)] += s * v;
            if r != c {
                out[b][(c, r)] += s * v;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub blocks: Vec<usize>,
    pub constraints: Vec<SparseSym>,
    pub b: Vec<f64>,
    pub cost: Vec<Mat>,
    /// `free[j][i]`: coefficient of free variable `j` in constraint `i`.
    pub free: Vec<Vec<f64>>,
    pub free_cost: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    /// Stopped early with residuals and gap below `LOOSE_TARGET`.
    Inaccurate,
    /// The dual objective grew without bound: no primal solution.
    PrimalInfeasible,
    IterationLimit,
    /// The Newton system became singular or steps collapsed.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub x: Vec<Mat>,
    pub z: Vec<Mat>,
    pub y: Vec<f64>,
    pub w: Vec<f64>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
}

impl SdpStatus {
    pub fn converged(self) -> bool {
        matches!(self, SdpStatus::Optimal | SdpStatus::Inaccurate)
    }
}

impl SdpProblem {
    pub fn zero_cost(blocks: Vec<usize>) -> Vec<Mat> {
        blocks.iter().map(|&n| Mat::zeros(n, n)).collect()
    }

    fn apply(&self, x: &[Mat]) -> Vec<f64> {
        self.constraints.iter().map(|a| a.inner(x)).collect()
    }

    fn adjoint(&self, y: &[f64]) -> Vec<Mat> {
        let mut out = Self::zero_cost(self.blocks.clone());
        for (a, &yi) in self.constraints.iter().zip(y) {
            if yi != 0.0 {
                a.add_to(yi, &mut out);
            }
        }
        out
    }

    fn free_apply(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.b.len()];
        for (col, &wj) in self.free.iter().zip(w) {
            for (o, c) in out.iter_mut().zip(col) {
                *o += c * wj;
            }
        }
        out
    }

    fn free_adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.free.iter().map(|col| dot(col, y)).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn blocks_dot(a: &[Mat], b: &[Mat]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn blocks_norm(a: &[Mat]) -> f64 {
    blocks_dot(a, a).sqrt()
}

fn blocks_axpy(a: &[Mat], s: f64, b: &[Mat]) -> Vec<Mat> {
    a.iter().zip(b).map(|(x, y)| x.add_scaled(y, s)).collect()
}

/// Largest `α` with `X + αD ⪰ 0` (infinite when `D ⪰ 0`).
fn max_step(x: &[Mat], d: &[Mat]) -> f64 {
    let mut best = f64::INFINITY;
    for (xb, db) in x.iter().zip(d) {
        if xb.rows() == 0 {
            continue;
        }
        let Some(l) = cholesky(xb) else {
            return 0.0;
        };
        let s = congruence_inverse(&l, db);
        let lam = jacobi_eigen(&s).0[0];
        if lam < 0.0 {
            best = best.min(-1.0 / lam);
        }
    }
    best
}

/// `L⁻¹ D L⁻ᵀ` for lower-triangular `L`.
fn congruence_inverse(l: &Mat, d: &Mat) -> Mat {
    let n = l.rows();
    let solve_cols = |m: &Mat| {
        let mut out = Mat::zeros(n, n);
        for c in 0..n {
            for i in 0..n {
                let mut s = m[(i, c)];
                for k in 0..i {
                    s -= l[(i, k)] * out[(k, c)];
                }
                out[(i, c)] = s / l[(i, i)];
            }
        }
        out
    };
    let half = solve_cols(d);
    solve_cols(&half.transpose()).symmetrize()
}

/// Solves the problem from the scaled identity.
pub fn solve(p: &SdpProblem) -> SdpSolution {
    let m = p.b.len();
    let nf = p.free.len();
    let nb: usize = p.blocks.iter().sum::<usize>().max(1);
    let scale = 10.0
        * (1.0f64)
            .max(p.b.iter().fold(0.0, |a: f64, v| a.max(v.abs())))
            .max(p.cost.iter().fold(0.0, |a, c| a.max(c.max_abs())));
    let mut x: Vec<Mat> = p.blocks.iter().map(|&n| Mat::identity(n).scale(scale)).collect();
    let mut z = x.clone();
    let mut y = vec![0.0; m];
    let mut w = vec![0.0; nf];
    let b_norm = 1.0 + norm(&p.b);
    let c_norm = 1.0 + blocks_norm(&p.cost) + norm(&p.free_cost);

    let mut status = SdpStatus::IterationLimit;
    let mut iterations = 0;
    let (mut pres, mut dres, mut gap) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for it in 0..MAX_ITERATIONS {
        iterations = it;
        let ax = p.apply(&x);
        let fw = p.free_apply(&w);
        let rp: Vec<f64> = (0..m).map(|i| p.b[i] - ax[i] - fw[i]).collect();
        let aty = p.adjoint(&y);
        let rd: Vec<Mat> = (0..p.blocks.len())
            .map(|k| p.cost[k].add_scaled(&aty[k], -1.0).add_scaled(&z[k], -1.0))
            .collect();
        let fty = p.free_adjoint(&y);
        let rf: Vec<f64> = (0..nf).map(|j| p.free_cost[j] - fty[j]).collect();
        let xz = blocks_dot(&x, &z);
        let mu = xz / nb as f64;
        let pobj = blocks_dot(&p.cost, &x) + dot(&p.free_cost, &w);
        let dobj = dot(&p.b, &y);
        pres = norm(&rp) / b_norm;
        dres = (blocks_norm(&rd) + norm(&rf)) / c_norm;
        gap = xz.abs() / (1.0 + pobj.abs() + dobj.abs());
        if pres < GAP_TARGET && dres < GAP_TARGET && gap < GAP_TARGET {
            status = SdpStatus::Optimal;
            break;
        }
        if dobj > DIVERGENCE * b_norm && dres < 1e-6 {
            status = SdpStatus::PrimalInfeasible;
            break;
        }
        if norm(&y) > DIVERGENCE * 1e3 || blocks_norm(&x) > DIVERGENCE * 1e3 {
            status = if dobj > 0.0 { SdpStatus::PrimalInfeasible } else { SdpStatus::Stalled };
            break;
        }

        let Some(zinv) = z.iter().map(|zb| if zb.rows() == 0 { Some(zb.clone()) } else { spd_inverse(zb) }).collect::<Option<Vec<Mat>>>() else {
            status = SdpStatus::Stalled;
            break;
        };
        // Schur complement M_ij = tr(A_i X A_j Z⁻¹)
        let g: Vec<Vec<Mat>> = p
            .constraints
            .iter()
            .map(|a| {
                let mut dense = SdpProblem::zero_cost(p.blocks.clone());
                a.add_to(1.0, &mut dense);
                dense
                    .iter()
                    .enumerate()
                    .map(|(k, ab)| {
                        if a.entries.iter().any(|e| e.0 == k) {
                            x[k].matmul(ab).matmul(&zinv[k])
                        } else {
                            Mat::zeros(0, 0)
                        }
                    })
                    .collect()
            })
            .collect();
        let dim = m + nf;
        let mut kkt = Mat::zeros(dim, dim);
        for i in 0..m {
            for j in i..m {
                let mut s = 0.0;
                for &(bk, r, c, v) in &p.constraints[j].entries {
                    let gi = &g[i][bk];
                    if gi.rows() == 0 {
                        continue;
                    }
                    // G_i = X A_i Z⁻¹; tr(A_j G_i) over the symmetric entries
                    s += if r == c { v * gi[(r, r)] } else { v * (gi[(r, c)] + gi[(c, r)]) };
                }
                kkt[(i, j)] = s;
                kkt[(j, i)] = s;
            }
        }
        for (jf, col) in p.free.iter().enumerate() {
            for i in 0..m {
                kkt[(i, m + jf)] = col[i];
                kkt[(m + jf, i)] = col[i];
            }
        }
        let reg = 1e-14 * (1.0 + kkt.max_abs());
        for i in 0..m {
            kkt[(i, i)] += reg;
        }

        let direction = |sigma_mu: f64, corr: Option<&Vec<Mat>>| -> Option<(Vec<Mat>, Vec<Mat>, Vec<f64>, Vec<f64>)> {
            // K = σμ Z⁻¹ − X − corr − X R_d Z⁻¹
            let kmat: Vec<Mat> = (0..p.blocks.len())
                .map(|k| {
                    let mut t = zinv[k].scale(sigma_mu).add_scaled(&x[k], -1.0);
                    if let Some(c) = corr {
                        t = t.add_scaled(&c[k], -1.0);
                    }
                    t.add_scaled(&x[k].matmul(&rd[k]).matmul(&zinv[k]), -1.0)
                })
                .collect();
            let ak = p.apply(&kmat);
            let mut rhs: Vec<f64> = (0..m).map(|i| rp[i] - ak[i]).collect();
            rhs.extend(rf.iter().copied());
            let sol = lu_solve(&kkt, &rhs)?;
            let dy = sol[..m].to_vec();
            let dw = sol[m..].to_vec();
            let atdy = p.adjoint(&dy);
            let dz: Vec<Mat> = (0..p.blocks.len()).map(|k| rd[k].add_scaled(&atdy[k], -1.0)).collect();
            let dx: Vec<Mat> = (0..p.blocks.len())
                .map(|k| kmat[k].add_scaled(&x[k].matmul(&atdy[k]).matmul(&zinv[k]), 1.0).symmetrize())
                .collect();
            Some((dx, dz, dy, dw))
        };

        let Some((dxa, dza, _, _)) = direction(0.0, None) else {
            status = SdpStatus::Stalled;
            break;
        };
        let ap = (STEP_FRACTION * max_step(&x, &dxa)).min(1.0);
        let ad = (STEP_FRACTION * max_step(&z, &dza)).min(1.0);
        let mu_aff = blocks_dot(&blocks_axpy(&x, ap, &dxa), &blocks_axpy(&z, ad, &dza)) / nb as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
        let corr: Vec<Mat> = (0..p.blocks.len())
            .map(|k| dxa[k].matmul(&dza[k]).matmul(&zinv[k]))
            .collect();
        let Some((dx, dz, dy, dw)) = direction(sigma * mu, Some(&corr)) else {
            status = SdpStatus::Stalled;
            break;
        };
        let ap = (STEP_FRACTION * max_step(&x, &dx)).min(1.0);
        let ad = (STEP_FRACTION * max_step(&z, &dz)).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            status = SdpStatus::Stalled;
            break;
        }
        x = blocks_axpy(&x, ap, &dx);
        for (wj, d) in w.iter_mut().zip(&dw) {
            *wj += ap * d;
        }
        z = blocks_axpy(&z, ad, &dz);
        for (yi, d) in y.iter_mut().zip(&dy) {
            *yi += ad * d;
        }
    }
    if matches!(status, SdpStatus::Stalled | SdpStatus::IterationLimit)
        && pres < LOOSE_TARGET
        && dres < LOOSE_TARGET
        && gap < LOOSE_TARGET
    {
        status = SdpStatus::Inaccurate;
    }
    let pobj = blocks_dot(&p.cost, &x) + dot(&p.free_cost, &w);
    let dobj = dot(&p.b, &y);
    SdpSolution {
        status,
        x,
        z,
        y,
        w,
        iterations,
        primal_residual: pres,
        dual_residual: dres,
        gap,
        primal_objective: pobj,
        dual_objective: dobj,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp_like_sdp() {
        // min x00 + x11 s.t. x01 = 1 over 2x2 PSD: optimum 2 at [[1,1],[1,1]]
        let mut a = SparseSym::default();
        a.push(0, 0, 1, 0.5);
        let p = SdpProblem {
            blocks: vec![2],
            constraints: vec![a],
            b: vec![1.0],
            cost: vec![Mat::identity(2)],
            free: vec![],
            free_cost: vec![],
        };
        let s = solve(&p);
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.primal_objective - 2.0).abs() < 1e-7, "{}", s.primal_objective);
        assert!((s.dual_objective - 2.0).abs() < 1e-7);
    }

    #[test]
    fn free_variable_objective() {
        // min -t s.t. x + t = 3, x ≥ 0 (1x1 block): t = 3
        let mut a = SparseSym::default();
        a.push(0, 0, 0, 1.0);
        let p = SdpProblem {
            blocks: vec![1],
            constraints: vec![a],
            b: vec![3.0],
            cost: vec![Mat::zeros(1, 1)],
            free: vec![vec![1.0]],
            free_cost: vec![-1.0],
        };
        let s = solve(&p);
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.w[0] - 3.0).abs() < 1e-6, "{:?}", s.w);
    }

    #[test]
    fn detects_infeasible() {
        // x00 = -1 with x ⪰ 0
        let mut a = SparseSym::default();
        a.push(0, 0, 0, 1.0);
        let p = SdpProblem {
            blocks: vec![1],
            constraints: vec![a],
            b: vec![-1.0],
            cost: vec![Mat::zeros(1, 1)],
            free: vec![],
            free_cost: vec![],
        };
        let s = solve(&p);
        assert!(!s.status.converged());
    }
}
