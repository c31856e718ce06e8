//! Small dense linear algebra: a row-major `f64` matrix, cyclic Jacobi,
//! Cholesky, LU solves, and exact rational elimination.

use crate::scalar::Rational;
use num_traits::{One, Signed, Zero};
use std::ops::{Index, IndexMut};

#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        let mut m = Mat::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            m.data[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add_scaled(&self, other: &Mat, s: f64) -> Mat {
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Mat {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|a| *a *= s);
        out
    }

    pub fn symmetrize(&self) -> Mat {
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..i {
                let m = 0.5 * (self[(i, j)] + self[(j, i)]);
                out[(i, j)] = m;
                out[(j, i)] = m;
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `⟨A, B⟩ = tr(AᵀB)`.
    pub fn dot(&self, other: &Mat) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenvalues (ascending) and eigenvectors (as columns) of a symmetric
/// matrix by cyclic Jacobi rotations.
pub fn jacobi_eigen(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.rows();
    assert_eq!(n, a.cols(), "square matrix required");
    let mut m = a.symmetrize();
    let mut v = Mat::identity(n);
    let scale = m.frobenius().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let vals = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vecs = Mat::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vecs[(k, new)] = v[(k, old)];
        }
    }
    (vals, vecs)
}

pub fn min_eigenvalue(a: &Mat) -> f64 {
    if a.rows() == 0 {
        return 0.0;
    }
    jacobi_eigen(a).0[0]
}

/// Lower-triangular `L` with `A = LLᵀ`, or `None` if `A` is not numerically
/// positive definite.
pub fn cholesky(a: &Mat) -> Option<Mat> {
    let n = a.rows();
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Some(l)
}

/// Solves `LLᵀx = b` given the Cholesky factor.
pub fn cholesky_solve(l: &Mat, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[(i, k)] * y[k];
        }
        y[i] /= l[(i, i)];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[(k, i)] * y[k];
        }
        y[i] /= l[(i, i)];
    }
    y
}

/// `A⁻¹` for symmetric positive definite `A`.
pub fn spd_inverse(a: &Mat) -> Option<Mat> {
    let l = cholesky(a)?;
    let n = a.rows();
    let mut inv = Mat::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let col = cholesky_solve(&l, &e);
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    Some(inv.symmetrize())
}

/// Gaussian elimination with partial pivoting; `None` when singular.
pub fn lu_solve(a: &Mat, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows();
    let mut m = a.clone();
    let mut x = b.to_vec();
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[(i, c)].abs().total_cmp(&m[(j, c)].abs()))?;
        if m[(p, c)].abs() <= 1e-14 * scale {
            return None;
        }
        if p != c {
            for k in 0..n {
                let tmp = m[(c, k)];
                m[(c, k)] = m[(p, k)];
                m[(p, k)] = tmp;
            }
            x.swap(c, p);
        }
        for r in c + 1..n {
            let f = m[(r, c)] / m[(c, c)];
            if f == 0.0 {
                continue;
            }
            for k in c..n {
                m[(r, k)] -= f * m[(c, k)];
            }
            x[r] -= f * x[c];
        }
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            x[i] -= m[(i, k)] * x[k];
        }
        x[i] /= m[(i, i)];
    }
    Some(x)
}

pub type QMatrix = Vec<Vec<Rational>>;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rational_rref(m: &mut QMatrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Rational::one() / m[r][c].clone();
        for v in m[r].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in c..cols {
                    let sub = f.clone() * m[r][k].clone();
                    m[i][k] = m[i][k].clone() - sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    pivots
}

/// Basis of `{x : Mx = 0}`.
pub fn rational_null_space(m: &QMatrix, cols: usize) -> Vec<Vec<Rational>> {
    let mut r = m.clone();
    let pivots = rational_rref(&mut r);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (row, &p) in r.iter().zip(&pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// Some solution of `Mx = b` (free variables set to zero), or `None`.
pub fn rational_solve(m: &QMatrix, b: &[Rational]) -> Option<Vec<Rational>> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut aug: QMatrix = m
        .iter()
        .zip(b)
        .map(|(row, v)| {
            let mut r = row.clone();
            r.push(v.clone());
            r
        })
        .collect();
    let pivots = rational_rref(&mut aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (row, &p) in aug.iter().zip(&pivots) {
        x[p] = row[cols].clone();
    }
    Some(x)
}

/// Exact `A = L D Lᵀ` for a symmetric rational matrix, with `L` unit lower
/// triangular. `None` when `A` is not positive semidefinite.
pub fn rational_ldl_psd(a: &QMatrix) -> Option<(QMatrix, Vec<Rational>)> {
    let n = a.len();
    let mut m = a.clone();
    let mut l = vec![vec![Rational::zero(); n]; n];
    let mut d = vec![Rational::zero(); n];
    for j in 0..n {
        l[j][j] = Rational::one();
        let pivot = m[j][j].clone();
        if pivot.is_negative() {
            return None;
        }
        if pivot.is_zero() {
            if (j + 1..n).any(|i| !m[i][j].is_zero()) {
                return None;
            }
            continue;
        }
        d[j] = pivot.clone();
        for i in j + 1..n {
            l[i][j] = m[i][j].clone() / pivot.clone();
        }
        for i in j + 1..n {
            if l[i][j].is_zero() {
                continue;
            }
            for k in j + 1..=i {
                let sub = l[i][j].clone() * m[j][k].clone();
                m[i][k] = m[i][k].clone() - sub;
                if k != i {
                    m[k][i] = m[i][k].clone();
                }
            }
        }
    }
    Some((l, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    #[test]
    fn jacobi_reconstructs() {
        let a = Mat::from_rows(&[
            vec![4.0, 1.0, -2.0],
            vec![1.0, 2.0, 0.5],
            vec![-2.0, 0.5, 3.0],
        ]);
        let (vals, vecs) = jacobi_eigen(&a);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let mut d = Mat::zeros(3, 3);
        for i in 0..3 {
            d[(i, i)] = vals[i];
        }
        let back = vecs.matmul(&d).matmul(&vecs.transpose());
        assert!(back.add_scaled(&a, -1.0).max_abs() < 1e-12);
        assert!((vals.iter().sum::<f64>() - a.trace()).abs() < 1e-12);
    }

    #[test]
    fn cholesky_and_lu_agree() {
        let a = Mat::from_rows(&[vec![4.0, 2.0], vec![2.0, 3.0]]);
        let b = [1.0, 2.0];
        let x1 = cholesky_solve(&cholesky(&a).unwrap(), &b);
        let x2 = lu_solve(&a, &b).unwrap();
        for (u, v) in x1.iter().zip(&x2) {
            assert!((u - v).abs() < 1e-14);
        }
        assert!(cholesky(&Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]])).is_none());
        let inv = spd_inverse(&a).unwrap();
        assert!(inv.matmul(&a).add_scaled(&Mat::identity(2), -1.0).max_abs() < 1e-14);
    }

    fn q(a: i64, b: i64) -> Rational {
        Rational::from_ratio(a, b)
    }

    #[test]
    fn rational_kernel_and_solve() {
        let m = vec![vec![q(1, 1), q(2, 1), q(3, 1)], vec![q(2, 1), q(4, 1), q(6, 1)]];
        let ns = rational_null_space(&m, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            let s: Rational = m[0].iter().zip(v).map(|(a, b)| a * b).sum();
            assert!(s.is_zero());
        }
        let x = rational_solve(&m, &[q(1, 1), q(2, 1)]).unwrap();
        assert_eq!(x[0], q(1, 1));
        assert!(rational_solve(&m, &[q(1, 1), q(3, 1)]).is_none());
    }

    #[test]
    fn ldl_detects_psd() {
        let a = vec![vec![q(1, 1), q(1, 1)], vec![q(1, 1), q(1, 1)]];
        let (l, d) = rational_ldl_psd(&a).unwrap();
        assert_eq!(d, vec![q(1, 1), q(0, 1)]);
        assert_eq!(l[1][0], q(1, 1));
        let b = vec![vec![q(1, 1), q(2, 1)], vec![q(2, 1), q(1, 1)]];
        assert!(rational_ldl_psd(&b).is_none());
        let c = vec![vec![q(0, 1), q(1, 1)], vec![q(1, 1), q(1, 1)]];
        assert!(rational_ldl_psd(&c).is_none());
    }
}
