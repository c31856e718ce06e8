//! Certificate search: Gram-matrix SDP, exact rounding, dual witnesses.

use super::certificate::{verify_certificate, Certificate, EqTerm, IneqTerm};
use super::closure::{closure_e, closure_g, ConstraintSet, EqGenerator, IneqGenerator};
use super::pe::{check_pseudo_expectation, localizing_basis, PeReport, PseudoExpectation};
use super::poly::{monomials_up_to, Monomial, Polynomial};
use super::sdp::{solve, SdpProblem, SdpSolution, SdpStatus, SparseSym};
use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, rational_ldl_psd, rational_null_space, rational_rref, rational_solve, spd_inverse, Mat, QMatrix};
use crate::scalar::{ratio_to_f64, Rational, Scalar};
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::collections::HashMap;

/// Largest total Gram dimension the dense solver accepts.
pub const SDP_DIMENSION_CAP: usize = 300;
/// Squared radius of the ball added when looking for a dual witness.
pub const WITNESS_RADIUS_SQ: i64 = 4;
/// Dyadic precisions tried when rounding, in bits.
pub const ROUNDING_BITS: [u32; 9] = [8, 12, 16, 20, 24, 28, 32, 36, 40];
const KERNEL_TOLERANCE: f64 = 1e-6;
const KERNEL_MAX_DENOMINATOR: i64 = 1000;

#[derive(Debug, Clone, Serialize)]
pub struct SdpSummary {
    pub status: SdpStatus,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
}

impl From<&SdpSolution> for SdpSummary {
    fn from(s: &SdpSolution) -> Self {
        SdpSummary {
            status: s.status,
            iterations: s.iterations,
            primal_residual: s.primal_residual,
            dual_residual: s.dual_residual,
            gap: s.gap,
        }
    }
}

#[derive(Debug, Clone)]
pub enum SearchOutcome {
    /// Exactly verified certificate; `bits` is the rounding precision used.
    Certificate {
        certificate: Certificate,
        bits: u32,
        sdp: SdpSummary,
    },
    /// No certificate exists at this degree: `Ẽ(h) = value < 0`.
    Infeasible {
        pe: PseudoExpectation<f64>,
        value: f64,
        report: PeReport,
        sdp: SdpSummary,
    },
    Indeterminate {
        reason: String,
        sdp: Option<SdpSummary>,
    },
}

/// Gram parametrisation of `h = Σ α e + Σ g · bᵀ Q_g b`.
struct Layout {
    gens: Vec<IneqGenerator>,
    bases: Vec<Vec<Monomial>>,
    eqs: Vec<EqGenerator>,
    rows: Vec<Monomial>,
    /// Per block: `(row, u, v, coefficient)` with `u ≤ v`.
    entries: Vec<Vec<(usize, usize, usize, Rational)>>,
    eq_cols: Vec<Vec<(usize, Rational)>>,
    rhs: Vec<Rational>,
}

impl Layout {
    fn build(h: &Polynomial, a: &ConstraintSet, d: u32) -> Result<Layout> {
        let all_rows = monomials_up_to(a.vars.len(), d.max(h.degree()));
        let index: HashMap<Monomial, usize> = all_rows.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let mut gens = Vec::new();
        let mut bases = Vec::new();
        for g in closure_g(a, d)? {
            let basis = localizing_basis(a.vars.len(), d, g.poly.degree());
            if !basis.is_empty() {
                gens.push(g);
                bases.push(basis);
            }
        }
        let dim: usize = bases.iter().map(Vec::len).sum();
        if dim > SDP_DIMENSION_CAP {
            return Err(Error::Resource {
                what: "SDP block dimension",
                size: dim,
                cap: SDP_DIMENSION_CAP,
            });
        }
        let mut entries = Vec::new();
        for (g, basis) in gens.iter().zip(&bases) {
            let mut e = Vec::new();
            for u in 0..basis.len() {
                for v in u..basis.len() {
                    let prod = g.poly.mul_monomial(&basis[u].mul(&basis[v]));
                    for (m, c) in prod.terms() {
                        e.push((index[m], u, v, c.clone()));
                    }
                }
            }
            entries.push(e);
        }
        // keep a linearly independent subset of the equality closure
        let all_eqs = closure_e(a, d)?;
        let mut eqs = Vec::new();
        if !all_eqs.is_empty() {
            let mut mat: QMatrix = vec![vec![Rational::zero(); all_eqs.len()]; all_rows.len()];
            for (j, g) in all_eqs.iter().enumerate() {
                for (m, c) in g.poly.terms() {
                    mat[index[m]][j] = c.clone();
                }
            }
            for p in rational_rref(&mut mat) {
                eqs.push(all_eqs[p].clone());
            }
        }
        let eq_cols: Vec<Vec<(usize, Rational)>> = eqs
            .iter()
            .map(|g| g.poly.terms().map(|(m, c)| (index[m], c.clone())).collect())
            .collect();
        let rhs: Vec<Rational> = all_rows.iter().map(|m| h.coeff(m)).collect();
        Ok(Layout {
            gens,
            bases,
            eqs,
            rows: all_rows,
            entries,
            eq_cols,
            rhs,
        })
    }

    /// Rows touched by some block or equality column.
    fn touched(&self) -> Vec<bool> {
        let mut t = vec![false; self.rows.len()];
        for e in self.entries.iter().flatten() {
            t[e.0] = true;
        }
        for (r, _) in self.eq_cols.iter().flatten() {
            t[*r] = true;
        }
        t
    }

    /// The SDP over the touched rows, with optional extra free columns.
    fn problem(&self, keep: &[usize], extra_free: &[(Vec<f64>, f64)]) -> SdpProblem {
        let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        let mut constraints = vec![SparseSym::default(); keep.len()];
        for (k, es) in self.entries.iter().enumerate() {
            for (r, u, v, c) in es {
                if let Some(&i) = pos.get(r) {
                    constraints[i].push(k, *u, *v, ratio_to_f64(c));
                }
            }
        }
        let mut free: Vec<Vec<f64>> = self
            .eq_cols
            .iter()
            .map(|col| {
                let mut dense = vec![0.0; keep.len()];
                for (r, c) in col {
                    dense[pos[r]] = ratio_to_f64(c);
                }
                dense
            })
            .collect();
        let mut free_cost = vec![0.0; free.len()];
        for (col, cost) in extra_free {
            free.push(col.clone());
            free_cost.push(*cost);
        }
        let blocks: Vec<usize> = self.bases.iter().map(Vec::len).collect();
        SdpProblem {
            cost: SdpProblem::zero_cost(blocks.clone()),
            blocks,
            constraints,
            b: keep.iter().map(|&r| ratio_to_f64(&self.rhs[r])).collect(),
            free,
            free_cost,
        }
    }
}

/// Searches for a degree-`d` certificate of `h ≥ 0` under `a`.
pub fn search_certificate(h: &Polynomial, a: &ConstraintSet, d: u32) -> Result<SearchOutcome> {
    let h = h.rename(&a.vars)?;
    let layout = Layout::build(&h, a, d)?;
    let touched = layout.touched();
    let unreachable = (0..layout.rows.len()).any(|r| !touched[r] && !layout.rhs[r].is_zero());
    let mut summary = None;
    if !unreachable {
        let keep: Vec<usize> = (0..layout.rows.len()).filter(|&r| touched[r]).collect();
        let sol = solve(&layout.problem(&keep, &[]));
        summary = Some(SdpSummary::from(&sol));
        if sol.status.converged() {
            if let Some((certificate, bits)) = round(&layout, &h, a, &sol)? {
                return Ok(SearchOutcome::Certificate {
                    certificate,
                    bits,
                    sdp: SdpSummary::from(&sol),
                });
            }
            return Ok(SearchOutcome::Indeterminate {
                reason: "numerical solution found but exact rounding failed".into(),
                sdp: summary,
            });
        }
    }
    witness(&h, a, d, summary)
}

/// Minimises `Ẽ(h)` over pseudo-expectations for `a` plus a ball.
fn witness(h: &Polynomial, a: &ConstraintSet, d: u32, prior: Option<SdpSummary>) -> Result<SearchOutcome> {
    // Moments of every monomial of h must exist, so the degree never drops below deg h.
    let d2 = d.max(h.degree()).max(2).div_ceil(2) * 2;
    let mut ball = Polynomial::constant(&a.vars, Rational::from_int(WITNESS_RADIUS_SQ));
    for i in 0..a.vars.len() {
        ball = &ball - &Polynomial::var(&a.vars, i).pow(2);
    }
    let bounded = a.clone().with_inequality(ball);
    let layout = Layout::build(h, &bounded, d2)?;
    let touched = layout.touched();
    let keep: Vec<usize> = (0..layout.rows.len()).filter(|&r| touched[r]).collect();
    let one = Monomial::one(a.vars.len());
    let Some(const_row) = keep.iter().position(|&r| layout.rows[r] == one) else {
        return Ok(SearchOutcome::Indeterminate {
            reason: "no constant row".into(),
            sdp: prior,
        });
    };
    let mut lambda_col = vec![0.0; keep.len()];
    lambda_col[const_row] = 1.0;
    let sol = solve(&layout.problem(&keep, &[(lambda_col, -1.0)]));
    let sdp = SdpSummary::from(&sol);
    if !sol.status.converged() {
        return Ok(SearchOutcome::Indeterminate {
            reason: format!("witness solve ended with {:?}", sol.status),
            sdp: Some(sdp),
        });
    }
    let mut pe = PseudoExpectation::new(&a.vars, d2);
    for (i, &r) in keep.iter().enumerate() {
        pe.set(layout.rows[r].clone(), -sol.y[i]);
    }
    let value = pe.apply(h)?;
    if value >= -1e-6 {
        return Ok(SearchOutcome::Indeterminate {
            reason: format!("no certificate found and no negative witness (min {value:.3e})"),
            sdp: Some(sdp),
        });
    }
    let report = check_pseudo_expectation(&pe, a)?;
    Ok(SearchOutcome::Infeasible { pe, value, report, sdp })
}

/// Best rational approximation with denominator at most `max_den`.
fn rationalize(x: f64, max_den: i64, tol: f64) -> Option<Rational> {
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    for _ in 0..40 {
        let a = r.floor();
        if a.abs() > 1e12 {
            break;
        }
        let a = a as i64;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > max_den {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        if (x - p1 as f64 / q1 as f64).abs() <= tol {
            return Some(Rational::from_ratio(p1, q1));
        }
        let frac = r - a as f64;
        if frac.abs() < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    (q1 > 0 && (x - p1 as f64 / q1 as f64).abs() <= tol).then(|| Rational::from_ratio(p1, q1))
}

/// Rational basis of the numerical kernel of `q`, in reduced echelon form.
fn rational_kernel(q: &Mat, tol: f64) -> Option<QMatrix> {
    let n = q.rows();
    let (vals, vecs) = jacobi_eigen(q);
    let kernel: Vec<Vec<f64>> = (0..n)
        .filter(|&i| vals[i] < tol)
        .map(|i| (0..n).map(|k| vecs[(k, i)]).collect())
        .collect();
    let mut m = kernel;
    let rows = m.len();
    let mut r = 0;
    for c in 0..n {
        if r == rows {
            break;
        }
        let p = (r..rows).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c].abs() < 1e-8 {
            continue;
        }
        m.swap(r, p);
        let piv = m[r][c];
        m[r].iter_mut().for_each(|v| *v /= piv);
        for i in 0..rows {
            if i != r {
                let f = m[i][c];
                for k in 0..n {
                    m[i][k] -= f * m[r][k];
                }
            }
        }
        r += 1;
    }
    m.iter()
        .take(r)
        .map(|row| row.iter().map(|&v| rationalize(v, KERNEL_MAX_DENOMINATOR, 1e-6)).collect())
        .collect()
}

/// Facial reduction, dyadic rounding and exact projection onto the affine
/// constraints; returns the first exactly verified certificate.
fn round(layout: &Layout, h: &Polynomial, a: &ConstraintSet, sol: &SdpSolution) -> Result<Option<(Certificate, u32)>> {
    let lmax = sol
        .x
        .iter()
        .filter(|x| x.rows() > 0)
        .map(|x| jacobi_eigen(x).0.last().copied().unwrap_or(0.0))
        .fold(1.0f64, f64::max);
    // range bases W_k (columns) for each block
    let mut ranges: Vec<QMatrix> = Vec::new();
    let mut numeric_h: Vec<Mat> = Vec::new();
    for x in &sol.x {
        let n = x.rows();
        let Some(kernel) = rational_kernel(x, KERNEL_TOLERANCE * lmax) else {
            return Ok(None);
        };
        let w = if kernel.is_empty() {
            (0..n)
                .map(|i| (0..n).map(|k| if k == i { Rational::one() } else { Rational::zero() }).collect())
                .collect()
        } else {
            rational_null_space(&kernel, n)
        };
        let r = w.len();
        let wf = Mat::from_rows(&(0..n).map(|u| (0..r).map(|i| ratio_to_f64(&w[i][u])).collect()).collect::<Vec<_>>());
        let hk = if r == 0 {
            Mat::zeros(0, 0)
        } else {
            let Some(ginv) = spd_inverse(&wf.transpose().matmul(&wf)) else {
                return Ok(None);
            };
            ginv.matmul(&wf.transpose()).matmul(x).matmul(&wf).matmul(&ginv).symmetrize()
        };
        ranges.push(w);
        numeric_h.push(hk);
    }
    // variable layout: upper triangles of each H_k, then equality weights
    let mut offsets = Vec::new();
    let mut nvar = 0;
    for w in &ranges {
        offsets.push(nvar);
        nvar += w.len() * (w.len() + 1) / 2;
    }
    let eq_offset = nvar;
    nvar += layout.eqs.len();
    let tri = |r: usize, i: usize, j: usize| {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * r - i * (i + 1) / 2 + j
    };
    let nrows = layout.rows.len();
    let mut amap: QMatrix = vec![vec![Rational::zero(); nvar]; nrows];
    for (k, es) in layout.entries.iter().enumerate() {
        let w = &ranges[k];
        let r = w.len();
        for (row, u, v, c) in es {
            for i in 0..r {
                for j in 0..r {
                    let mut t = &w[i][*u] * &w[j][*v];
                    if u != v {
                        t += &w[i][*v] * &w[j][*u];
                    }
                    if t.is_zero() {
                        continue;
                    }
                    let slot = &mut amap[*row][offsets[k] + tri(r, i, j)];
                    *slot += c * t;
                }
            }
        }
    }
    for (j, col) in layout.eq_cols.iter().enumerate() {
        for (row, c) in col {
            amap[*row][eq_offset + j] += c;
        }
    }
    let gram: QMatrix = (0..nrows)
        .map(|i| (0..nrows).map(|j| amap[i].iter().zip(&amap[j]).map(|(x, y)| x * y).sum()).collect())
        .collect();
    let mut z0 = vec![0.0; nvar];
    for (k, hk) in numeric_h.iter().enumerate() {
        let r = hk.rows();
        for i in 0..r {
            for j in i..r {
                z0[offsets[k] + tri(r, i, j)] = hk[(i, j)];
            }
        }
    }
    for j in 0..layout.eqs.len() {
        z0[eq_offset + j] = sol.w[j];
    }
    for &bits in &ROUNDING_BITS {
        let scale = (1u64 << bits) as f64;
        let z: Vec<Rational> = z0
            .iter()
            .map(|&v| Rational::from_ratio((v * scale).round() as i64, 1) / Rational::from_int(1i64 << bits.min(62)))
            .collect();
        let resid: Vec<Rational> = (0..nrows)
            .map(|i| amap[i].iter().zip(&z).map(|(x, y)| x * y).sum::<Rational>() - &layout.rhs[i])
            .collect();
        let Some(u) = rational_solve(&gram, &resid) else {
            return Ok(None);
        };
        let z: Vec<Rational> = (0..nvar)
            .map(|j| &z[j] - (0..nrows).map(|i| &amap[i][j] * &u[i]).sum::<Rational>())
            .collect();
        if let Some(cert) = emit(layout, &ranges, &offsets, eq_offset, &z, &tri)? {
            let v = verify_certificate(h, a, &cert)?;
            if v.valid {
                return Ok(Some((cert, bits)));
            }
        }
    }
    Ok(None)
}

fn emit(
    layout: &Layout,
    ranges: &[QMatrix],
    offsets: &[usize],
    eq_offset: usize,
    z: &[Rational],
    tri: &dyn Fn(usize, usize, usize) -> usize,
) -> Result<Option<Certificate>> {
    let d = layout.rows.last().map_or(0, |m| m.degree());
    let vars = layout.gens.first().map(|g| g.poly.vars().clone());
    let mut cert = Certificate::new(d);
    for (k, w) in ranges.iter().enumerate() {
        let r = w.len();
        if r == 0 {
            continue;
        }
        let hk: QMatrix = (0..r).map(|i| (0..r).map(|j| z[offsets[k] + tri(r, i, j)].clone()).collect()).collect();
        let Some((l, dvec)) = rational_ldl_psd(&hk) else {
            return Ok(None);
        };
        let basis = &layout.bases[k];
        let vars = vars.as_ref().expect("blocks imply variables");
        let mut pairs = Vec::new();
        for c in 0..r {
            if dvec[c].is_zero() {
                continue;
            }
            let mut s = Polynomial::zero(vars);
            for (u, m) in basis.iter().enumerate() {
                let coeff: Rational = (0..r).map(|i| &w[i][u] * &l[i][c]).sum();
                s.add_term(m.clone(), coeff);
            }
            pairs.push((dvec[c].clone(), s));
        }
        if !pairs.is_empty() {
            cert.ineq_terms.push(IneqTerm::weighted(layout.gens[k].exponents.clone(), pairs));
        }
    }
    for (j, g) in layout.eqs.iter().enumerate() {
        let c = &z[eq_offset + j];
        if !c.is_zero() {
            cert.eq_terms.push(EqTerm {
                constraint: g.constraint,
                multiplier: g.multiplier.clone(),
                coeff: c.clone(),
            });
        }
    }
    debug_assert!(cert.ineq_terms.iter().all(|t| t.weights.iter().all(|w| !w.is_negative())));
    Ok(Some(cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sos::poly::vars;

    #[test]
    fn square_is_found() {
        let v = vars(&["y"]);
        let a = ConstraintSet::new(&v);
        let h = Polynomial::parse(&v, "y^2").unwrap();
        match search_certificate(&h, &a, 2).unwrap() {
            SearchOutcome::Certificate { certificate, .. } => {
                assert!(verify_certificate(&h, &a, &certificate).unwrap().valid);
                assert_eq!(certificate.ineq_terms.len(), 1);
                assert_eq!(certificate.ineq_terms[0].squares.len(), 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn quartic_gap_on_interval() {
        let v = vars(&["y"]);
        let a = ConstraintSet::parse(&v, &[], &["1-y", "1+y"]).unwrap();
        let h = Polynomial::parse(&v, "y^2 - y^4").unwrap();
        match search_certificate(&h, &a, 5).unwrap() {
            SearchOutcome::Certificate { certificate, .. } => {
                assert!(verify_certificate(&h, &a, &certificate).unwrap().valid);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn affine_function_has_witness() {
        let v = vars(&["y"]);
        let a = ConstraintSet::new(&v);
        let h = Polynomial::parse(&v, "1 + y").unwrap();
        match search_certificate(&h, &a, 2).unwrap() {
            SearchOutcome::Infeasible { pe, value, .. } => {
                assert!(value < 0.0);
                let ey = pe.moment(&Monomial(vec![1])).unwrap();
                assert!((ey + 2.0).abs() < 1e-3, "E[y] = {ey}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn continued_fractions() {
        assert_eq!(rationalize(0.333333333, 1000, 1e-6), Some(Rational::from_ratio(1, 3)));
        assert_eq!(rationalize(-0.5, 1000, 1e-9), Some(Rational::from_ratio(-1, 2)));
        assert_eq!(rationalize(std::f64::consts::PI, 10, 1e-9), None);
    }
}
