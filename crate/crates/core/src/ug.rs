//! Unique Games instances, the noisy-hypercube reduction to Max-Cut and
//! exact cut values.
//!
//! Labels are `0..k`. A permutation acts on points of `{−1,1}^k` by moving
//! coordinate `j` to position `π(j)`, so `(πx)_{π(j)} = x_j`; with this
//! convention dictator cuts of a satisfying labeling stay dictators.

use crate::cube::{BooleanFunction, RangeTag};
use crate::error::{domain, Error, Result};
use crate::scalar::{format_rational, parse_rational, serialize_rational, Rational, Scalar};
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Exact-mode caps on `|V|` and `k`.
pub const MAX_EXACT_VERTICES: usize = 16;
pub const MAX_EXACT_ALPHABET: usize = 10;
/// Cap on enumerated `(u, v₁, v₂, x, y)` tuples in exact mode.
pub const EDGE_ENUMERATION_CAP: usize = 1 << 24;
/// Cap on `k^|V|` for brute-force optima.
pub const LABELING_CAP: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub u: usize,
    pub v: usize,
    pub pi: Vec<usize>,
    pub weight: Rational,
}

/// Weighted constraint list; the first-vertex marginal is uniform.
#[derive(Debug, Clone, PartialEq)]
pub struct UgInstance {
    vertices: usize,
    k: usize,
    constraints: Vec<Constraint>,
    /// Constraint indices grouped by first vertex.
    by_first: Vec<Vec<usize>>,
}

fn is_permutation(pi: &[usize], k: usize) -> bool {
    let mut seen = vec![false; k];
    pi.len() == k && pi.iter().all(|&p| p < k && !std::mem::replace(&mut seen[p], true))
}

impl UgInstance {
    pub fn new(vertices: usize, k: usize, constraints: Vec<Constraint>) -> Result<Self> {
        if vertices == 0 || k == 0 {
            return domain("instance needs at least one vertex and one label");
        }
        let mut total = Rational::zero();
        let mut by_first = vec![Vec::new(); vertices];
        let mut out_weight = vec![Rational::zero(); vertices];
        for (i, c) in constraints.iter().enumerate() {
            if c.u >= vertices || c.v >= vertices {
                return domain(format!("constraint {i} names a vertex outside 0..{vertices}"));
            }
            if !is_permutation(&c.pi, k) {
                return domain(format!("constraint {i}: {:?} is not a permutation of 0..{k}", c.pi));
            }
            if c.weight <= Rational::zero() {
                return domain(format!("constraint {i} has nonpositive weight"));
            }
            total += &c.weight;
            out_weight[c.u] += &c.weight;
            by_first[c.u].push(i);
        }
        if !total.is_one() {
            return domain(format!("weights sum to {}, not 1", format_rational(&total)));
        }
        let share = Rational::new(1.into(), (vertices as i64).into());
        if let Some(u) = out_weight.iter().position(|w| *w != share) {
            return domain(format!(
                "not regular: vertex {u} carries weight {} instead of {}",
                format_rational(&out_weight[u]),
                format_rational(&share)
            ));
        }
        Ok(UgInstance {
            vertices,
            k,
            constraints,
            by_first,
        })
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// `𝓔_u` as `(v, π, conditional weight)`.
    pub fn marginal(&self, u: usize) -> Vec<(usize, &[usize], Rational)> {
        let scale = Rational::from_int(self.vertices as i64);
        self.by_first[u]
            .iter()
            .map(|&i| {
                let c = &self.constraints[i];
                (c.v, c.pi.as_slice(), &c.weight * &scale)
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let file = UgFile {
            k: self.k,
            vertices: Some(self.vertices),
            constraints: self
                .constraints
                .iter()
                .map(|c| ConstraintFile {
                    u: c.u,
                    v: c.v,
                    pi: c.pi.clone(),
                    w: format_rational(&c.weight),
                })
                .collect(),
        };
        serde_json::to_value(file).expect("plain data serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let file: UgFile = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("UG instance: {e}")))?;
        let constraints = file
            .constraints
            .into_iter()
            .map(|c| {
                Ok(Constraint {
                    u: c.u,
                    v: c.v,
                    pi: c.pi,
                    weight: parse_rational(&c.w)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let inferred = constraints.iter().map(|c| c.u.max(c.v) + 1).max().unwrap_or(0);
        Self::new(file.vertices.unwrap_or(inferred), file.k, constraints)
    }
}

#[derive(Serialize, Deserialize)]
struct ConstraintFile {
    u: usize,
    v: usize,
    pi: Vec<usize>,
    w: String,
}

#[derive(Serialize, Deserialize)]
struct UgFile {
    k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vertices: Option<usize>,
    constraints: Vec<ConstraintFile>,
}

/// `Pr_{(u,v,π)} [L(v) = π(L(u))]`.
pub fn ug_value(inst: &UgInstance, labeling: &[usize]) -> Result<Rational> {
    if labeling.len() != inst.vertices {
        return Err(Error::DimensionMismatch {
            left: labeling.len(),
            right: inst.vertices,
        });
    }
    if let Some(v) = labeling.iter().position(|&l| l >= inst.k) {
        return domain(format!("label {} of vertex {v} outside 0..{}", labeling[v], inst.k));
    }
    Ok(inst
        .constraints
        .iter()
        .filter(|c| labeling[c.v] == c.pi[labeling[c.u]])
        .fold(Rational::zero(), |acc, c| acc + &c.weight))
}

/// Best labeling by enumeration.
pub fn ug_optimum(inst: &UgInstance) -> Result<(Rational, Vec<usize>)> {
    let total = (inst.k as f64).powi(inst.vertices as i32);
    if total > LABELING_CAP as f64 {
        return Err(Error::Resource {
            what: "labelings",
            size: total.min(usize::MAX as f64) as usize,
            cap: LABELING_CAP,
        });
    }
    let mut lab = vec![0; inst.vertices];
    let mut best = (ug_value(inst, &lab)?, lab.clone());
    'outer: loop {
        for slot in lab.iter_mut() {
            *slot += 1;
            if *slot < inst.k {
                let v = ug_value(inst, &lab)?;
                if v > best.0 {
                    best = (v, lab.clone());
                }
                continue 'outer;
            }
            *slot = 0;
        }
        break;
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize)]
pub struct RefutationValue {
    #[serde(serialize_with = "serialize_rational")]
    pub objective: Rational,
    /// Whether `x ≥ 0` and `Σ_i x_{v,i} ≤ 1` hold for every vertex.
    pub feasible: bool,
}

/// `E_u Σ_i (E_{(v,π) ∈ 𝓔_u} x_{v,π(i)})²`.
pub fn refutation_objective(inst: &UgInstance, x: &[Vec<Rational>]) -> Result<RefutationValue> {
    if x.len() != inst.vertices {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: inst.vertices,
        });
    }
    if let Some(row) = x.iter().find(|r| r.len() != inst.k) {
        return Err(Error::DimensionMismatch {
            left: row.len(),
            right: inst.k,
        });
    }
    let feasible = x
        .iter()
        .all(|r| r.iter().all(|v| *v >= Rational::zero()) && r.iter().sum::<Rational>() <= Rational::one());
    let mut total = Rational::zero();
    for u in 0..inst.vertices {
        let marg = inst.marginal(u);
        for i in 0..inst.k {
            let inner: Rational = marg.iter().map(|(v, pi, w)| w * &x[*v][pi[i]]).sum();
            total += &inner * &inner;
        }
    }
    Ok(RefutationValue {
        objective: total / Rational::from_int(inst.vertices as i64),
        feasible,
    })
}

/// Indicator tables `x_{v,i} = [L(v) = i]`.
pub fn integral_tables(inst: &UgInstance, labeling: &[usize]) -> Vec<Vec<Rational>> {
    labeling
        .iter()
        .map(|&l| (0..inst.k).map(|i| if i == l { Rational::one() } else { Rational::zero() }).collect())
        .collect()
}

/// Index of `πx` given the index of `x`.
pub fn permute_index(pi: &[usize], x: usize) -> usize {
    pi.iter()
        .enumerate()
        .fold(0, |acc, (j, &p)| if (x >> j) & 1 == 1 { acc | (1 << p) } else { acc })
}

/// Max-Cut vertex `(v, z)` with `z` a table index of `{−1,1}^k`.
pub type CutVertex = (usize, usize);

#[derive(Debug, Clone)]
pub struct MaxCutInstance {
    pub ug_vertices: usize,
    pub k: usize,
    /// Ordered pairs with their probabilities.
    pub edges: BTreeMap<(CutVertex, CutVertex), Rational>,
}

impl MaxCutInstance {
    pub fn total_weight(&self) -> Rational {
        self.edges.values().sum()
    }

    /// `u_vertex,u_point,v_vertex,v_point,weight` with points as `±` strings.
    pub fn to_csv(&self) -> String {
        let sign = |z: usize| -> String {
            (0..self.k).map(|j| if (z >> j) & 1 == 0 { '+' } else { '-' }).collect()
        };
        let mut out = String::from("u_vertex,u_point,v_vertex,v_point,weight\n");
        for (((a, za), (b, zb)), w) in &self.edges {
            out.push_str(&format!("{a},{},{b},{},{}\n", sign(*za), sign(*zb), format_rational(w)));
        }
        out
    }
}

fn check_rho(rho: &Rational) -> Result<()> {
    if *rho < -Rational::one() || *rho > Rational::one() {
        return domain(format!("rho = {} outside [-1, 1]", format_rational(rho)));
    }
    Ok(())
}

fn check_exact(inst: &UgInstance) -> Result<()> {
    if inst.vertices > MAX_EXACT_VERTICES {
        return Err(Error::Resource {
            what: "UG vertices in exact mode",
            size: inst.vertices,
            cap: MAX_EXACT_VERTICES,
        });
    }
    if inst.k > MAX_EXACT_ALPHABET {
        return Err(Error::Resource {
            what: "alphabet in exact mode",
            size: inst.k,
            cap: MAX_EXACT_ALPHABET,
        });
    }
    Ok(())
}

/// `Pr[y | x]` for `y ∼_ρ x` as a function of the Hamming distance.
fn noise_kernel(k: usize, rho: &Rational) -> Vec<Rational> {
    let half = Rational::from_ratio(1, 2);
    let same = (Rational::one() + rho) * &half;
    let flip = (Rational::one() - rho) * &half;
    (0..=k)
        .map(|d| same.pow_u((k - d) as u32) * flip.pow_u(d as u32))
        .collect()
}

/// The exact edge distribution of the reduction.
pub fn kkmo_reduce(inst: &UgInstance, rho: &Rational) -> Result<MaxCutInstance> {
    check_rho(rho)?;
    check_exact(inst)?;
    let k = inst.k;
    let points = 1usize << k;
    let tuples: usize = (0..inst.vertices).map(|u| inst.by_first[u].len().pow(2)).sum::<usize>() * points * points;
    if tuples > EDGE_ENUMERATION_CAP {
        return Err(Error::Resource {
            what: "reduction tuples",
            size: tuples,
            cap: EDGE_ENUMERATION_CAP,
        });
    }
    let kernel = noise_kernel(k, rho);
    let base = Rational::one() / Rational::from_int((inst.vertices * points) as i64);
    let mut edges = BTreeMap::new();
    for u in 0..inst.vertices {
        let marg = inst.marginal(u);
        for (v1, pi1, w1) in &marg {
            for (v2, pi2, w2) in &marg {
                let w = &base * w1 * w2;
                for x in 0..points {
                    let a = (*v1, permute_index(pi1, x));
                    for y in 0..points {
                        let p = &w * &kernel[(x ^ y).count_ones() as usize];
                        if p.is_zero() {
                            continue;
                        }
                        *edges.entry((a, (*v2, permute_index(pi2, y)))).or_insert_with(Rational::zero) += p;
                    }
                }
            }
        }
    }
    Ok(MaxCutInstance {
        ug_vertices: inst.vertices,
        k,
        edges,
    })
}

/// Seeded sampler for the reduction's edge distribution.
pub struct EdgeSampler<'a> {
    inst: &'a UgInstance,
    rho: f64,
    rng: ChaCha8Rng,
}

impl<'a> EdgeSampler<'a> {
    pub fn new(inst: &'a UgInstance, rho: f64, seed: u64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&rho) {
            return domain(format!("rho = {rho} outside [-1, 1]"));
        }
        Ok(EdgeSampler {
            inst,
            rho,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    fn pick(&mut self, u: usize) -> usize {
        let ids = &self.inst.by_first[u];
        let weights: Vec<f64> = ids.iter().map(|&i| self.inst.constraints[i].weight.to_double()).collect();
        let total: f64 = weights.iter().sum();
        let mut t = self.rng.gen::<f64>() * total;
        for (&i, w) in ids.iter().zip(&weights) {
            if t < *w {
                return i;
            }
            t -= w;
        }
        *ids.last().expect("regular instances have out-edges")
    }
}

impl Iterator for EdgeSampler<'_> {
    type Item = (CutVertex, CutVertex);

    fn next(&mut self) -> Option<Self::Item> {
        let u = self.rng.gen_range(0..self.inst.vertices);
        let c1 = self.pick(u);
        let c2 = self.pick(u);
        let k = self.inst.k;
        let x: usize = self.rng.gen_range(0..1usize << k);
        let flip = (1.0 - self.rho) / 2.0;
        let y = (0..k).fold(x, |acc, j| if self.rng.gen::<f64>() < flip { acc ^ (1 << j) } else { acc });
        let (a, b) = (&self.inst.constraints[c1], &self.inst.constraints[c2]);
        Some(((a.v, permute_index(&a.pi, x)), (b.v, permute_index(&b.pi, y))))
    }
}

/// Per-vertex tables `f_v : {−1,1}^k → [0,1]`.
#[derive(Debug, Clone)]
pub struct CutAssignment {
    pub tables: Vec<Vec<Rational>>,
}

impl CutAssignment {
    pub fn new(k: usize, tables: Vec<Vec<Rational>>) -> Result<Self> {
        for (v, t) in tables.iter().enumerate() {
            if t.len() != 1 << k {
                return Err(Error::DimensionMismatch {
                    left: t.len(),
                    right: 1 << k,
                });
            }
            if t.iter().any(|x| *x < Rational::zero() || *x > Rational::one()) {
                return domain(format!("cut table of vertex {v} leaves [0, 1]"));
            }
        }
        Ok(CutAssignment { tables })
    }

    /// `f_v(z) = (1 + z_{L(v)})/2`.
    pub fn dictators(k: usize, labeling: &[usize]) -> Result<Self> {
        let tables = labeling
            .iter()
            .map(|&l| {
                (0..1usize << k)
                    .map(|z| if (z >> l) & 1 == 0 { Rational::one() } else { Rational::zero() })
                    .collect()
            })
            .collect();
        Self::new(k, tables)
    }

    pub fn constant(k: usize, vertices: usize, c: Rational) -> Result<Self> {
        Self::new(k, vec![vec![c; 1 << k]; vertices])
    }

    pub fn random(k: usize, vertices: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tables = (0..vertices)
            .map(|_| (0..1usize << k).map(|_| Rational::from_ratio(rng.gen_range(0..=8), 8)).collect())
            .collect();
        Self::new(k, tables)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CutValue {
    /// `E[f(e₁)(1 − f(e₂)) + f(e₂)(1 − f(e₁))]` over the edge list.
    #[serde(serialize_with = "serialize_rational")]
    pub direct: Rational,
    /// `1 − E_u Stab_ρ(g_u)`.
    #[serde(serialize_with = "serialize_rational")]
    pub via_stability: Rational,
    pub agree: bool,
}

/// `g_u(x) = E_{(v,π) ∈ 𝓔_u} f_v(πx)`.
pub fn averaged_table(inst: &UgInstance, cut: &CutAssignment, u: usize) -> Vec<Rational> {
    (0..1usize << inst.k)
        .map(|x| {
            inst.marginal(u)
                .iter()
                .map(|(v, pi, w)| w * &cut.tables[*v][permute_index(pi, x)])
                .sum()
        })
        .collect()
}

pub fn cut_value(inst: &UgInstance, rho: &Rational, cut: &CutAssignment) -> Result<CutValue> {
    if cut.tables.len() != inst.vertices {
        return Err(Error::DimensionMismatch {
            left: cut.tables.len(),
            right: inst.vertices,
        });
    }
    let mc = kkmo_reduce(inst, rho)?;
    let f = |(v, z): &CutVertex| &cut.tables[*v][*z];
    let one = Rational::one();
    let direct: Rational = mc
        .edges
        .iter()
        .map(|((a, b), w)| {
            let (fa, fb) = (f(a), f(b));
            w * (fa * (&one - fb) + fb * (&one - fa))
        })
        .sum();
    let mut stab = Rational::zero();
    for u in 0..inst.vertices {
        let g = BooleanFunction::new(inst.k, averaged_table(inst, cut, u), RangeTag::UnitInterval)?;
        stab += g.fourier()?.stab_two_sided(rho)?;
    }
    let via_stability = one - stab / Rational::from_int(inst.vertices as i64);
    Ok(CutValue {
        agree: direct == via_stability,
        direct,
        via_stability,
    })
}

/// `K(ρ) = 1/2 + ρ/π + (1/2 − 1/π)ρ³`.
pub fn k_rho(rho: f64) -> f64 {
    0.5 + rho / PI + (0.5 - 1.0 / PI) * rho.powi(3)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub rho: f64,
    /// `(1 − ρ)/2`.
    pub sdp_like: f64,
    /// `1 − K(ρ)`.
    pub oz_bound: f64,
    /// `arccos(ρ)/π`.
    pub target: f64,
    /// `target ≤ oz_bound ≤ sdp_like`.
    pub ordered: bool,
}

pub fn bounds_report(rho: f64) -> Result<BoundsReport> {
    if !(-1.0..=1.0).contains(&rho) {
        return domain(format!("rho = {rho} outside [-1, 1]"));
    }
    let sdp_like = (1.0 - rho) / 2.0;
    let oz_bound = 1.0 - k_rho(rho);
    let target = rho.acos() / PI;
    let slack = 1e-15;
    Ok(BoundsReport {
        rho,
        sdp_like,
        oz_bound,
        target,
        ordered: target <= oz_bound + slack && oz_bound <= sdp_like + slack,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    /// Satisfiable by a hidden labeling.
    Perfect,
    /// Cycle `i → i+1` with label shift by one.
    CycleShift,
    Random,
}

impl std::str::FromStr for GeneratorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perfect" => Ok(GeneratorKind::Perfect),
            "cycle-shift" | "cycle_shift" => Ok(GeneratorKind::CycleShift),
            "random" => Ok(GeneratorKind::Random),
            other => Err(Error::Parse(format!("unknown generator kind {other:?}"))),
        }
    }
}

/// A generated instance with the labeling it was built from, if any.
#[derive(Debug, Clone)]
pub struct Generated {
    pub instance: UgInstance,
    pub hidden_labeling: Option<Vec<usize>>,
}

/// Toy instances with `degree` out-constraints per vertex (ignored for the
/// cycle), equal weights and seed-stable randomness.
pub fn toy_instance(kind: GeneratorKind, vertices: usize, k: usize, degree: usize, seed: u64) -> Result<Generated> {
    if vertices == 0 || k == 0 || degree == 0 {
        return domain("vertices, k and degree must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut constraints = Vec::new();
    let mut hidden = None;
    match kind {
        GeneratorKind::CycleShift => {
            let w = Rational::from_ratio(1, vertices as i64);
            for u in 0..vertices {
                constraints.push(Constraint {
                    u,
                    v: (u + 1) % vertices,
                    pi: (0..k).map(|i| (i + 1) % k).collect(),
                    weight: w.clone(),
                });
            }
        }
        GeneratorKind::Perfect | GeneratorKind::Random => {
            let labels: Vec<usize> = (0..vertices).map(|_| rng.gen_range(0..k)).collect();
            let w = Rational::from_ratio(1, (vertices * degree) as i64);
            for u in 0..vertices {
                for _ in 0..degree {
                    let v = rng.gen_range(0..vertices);
                    let mut pi: Vec<usize> = (0..k).collect();
                    pi.shuffle(&mut rng);
                    if kind == GeneratorKind::Perfect {
                        let at = pi.iter().position(|&p| p == labels[v]).expect("permutation");
                        pi.swap(at, labels[u]);
                    }
                    constraints.push(Constraint {
                        u,
                        v,
                        pi,
                        weight: w.clone(),
                    });
                }
            }
            if kind == GeneratorKind::Perfect {
                hidden = Some(labels);
            }
        }
    }
    Ok(Generated {
        instance: UgInstance::new(vertices, k, constraints)?,
        hidden_labeling: hidden,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rational {
        Rational::from_ratio(p, q)
    }

    #[test]
    fn single_vertex_reduction() {
        let inst = UgInstance::new(
            1,
            1,
            vec![Constraint {
                u: 0,
                v: 0,
                pi: vec![0],
                weight: r(1, 1),
            }],
        )
        .unwrap();
        let rho = r(-1, 3);
        let mc = kkmo_reduce(&inst, &rho).unwrap();
        assert_eq!(mc.total_weight(), r(1, 1));
        let cross = &mc.edges[&((0, 0), (0, 1))] + &mc.edges[&((0, 1), (0, 0))];
        assert_eq!(cross, (Rational::one() - &rho) / Rational::from_int(2));
        let loops = &mc.edges[&((0, 0), (0, 0))] + &mc.edges[&((0, 1), (0, 1))];
        assert_eq!(loops, (Rational::one() + &rho) / Rational::from_int(2));
    }

    #[test]
    fn transposition_constraint() {
        let inst = UgInstance::new(
            2,
            2,
            vec![
                Constraint { u: 0, v: 1, pi: vec![1, 0], weight: r(1, 2) },
                Constraint { u: 1, v: 0, pi: vec![1, 0], weight: r(1, 2) },
            ],
        )
        .unwrap();
        assert_eq!(ug_value(&inst, &[0, 1]).unwrap(), r(1, 1));
        assert_eq!(ug_value(&inst, &[0, 0]).unwrap(), r(0, 1));
        assert!(ug_value(&inst, &[0, 2]).is_err());
    }

    #[test]
    fn irregular_is_rejected() {
        let c = |u, v, w| Constraint { u, v, pi: vec![0, 1], weight: w };
        let e = UgInstance::new(2, 2, vec![c(0, 1, r(3, 4)), c(1, 0, r(1, 4))]);
        assert!(e.is_err());
    }

    #[test]
    fn perfect_instance_dictators() {
        let g = toy_instance(GeneratorKind::Perfect, 4, 3, 2, 11).unwrap();
        let lab = g.hidden_labeling.clone().unwrap();
        assert_eq!(ug_value(&g.instance, &lab).unwrap(), r(1, 1));
        let rho = r(-3, 10);
        let cut = CutAssignment::dictators(3, &lab).unwrap();
        let cv = cut_value(&g.instance, &rho, &cut).unwrap();
        assert!(cv.agree);
        assert_eq!(cv.direct, (Rational::one() - &rho) / Rational::from_int(2));
        let obj = refutation_objective(&g.instance, &integral_tables(&g.instance, &lab)).unwrap();
        assert_eq!(obj.objective, r(1, 1));
    }

    #[test]
    fn constant_and_random_cuts() {
        let g = toy_instance(GeneratorKind::Random, 2, 2, 2, 5).unwrap();
        let rho = r(-3, 5);
        let half = CutAssignment::constant(2, 2, r(1, 2)).unwrap();
        assert_eq!(cut_value(&g.instance, &rho, &half).unwrap().direct, r(1, 2));
        let rnd = CutAssignment::random(2, 2, 8).unwrap();
        assert!(cut_value(&g.instance, &rho, &rnd).unwrap().agree);
    }

    #[test]
    fn refutation_objective_examples() {
        let g = toy_instance(GeneratorKind::CycleShift, 4, 3, 1, 0).unwrap();
        assert!(g.instance.constraints().iter().all(|c| c.weight == r(1, 4)));
        let zero = vec![vec![Rational::zero(); 3]; 4];
        assert_eq!(refutation_objective(&g.instance, &zero).unwrap().objective, r(0, 1));
        let uniform = vec![vec![r(1, 3); 3]; 4];
        assert_eq!(refutation_objective(&g.instance, &uniform).unwrap().objective, r(1, 3));
    }

    #[test]
    fn k_rho_values_and_ordering() {
        assert!((k_rho(0.0) - 0.5).abs() < 1e-15);
        assert!(k_rho(-1.0).abs() < 1e-15);
        for i in 1..=9 {
            assert!(bounds_report(-(i as f64) / 10.0).unwrap().ordered);
        }
    }

    #[test]
    fn json_round_trip_and_seed_stability() {
        let a = toy_instance(GeneratorKind::Random, 5, 3, 2, 42).unwrap().instance;
        let b = toy_instance(GeneratorKind::Random, 5, 3, 2, 42).unwrap().instance;
        assert_eq!(a, b);
        assert_eq!(UgInstance::from_json(&a.to_json()).unwrap(), a);
    }

    #[test]
    fn sampler_respects_bits() {
        let g = toy_instance(GeneratorKind::Perfect, 3, 2, 1, 1).unwrap();
        let edges: Vec<_> = EdgeSampler::new(&g.instance, -0.5, 3).unwrap().take(50).collect();
        assert!(edges.iter().all(|((a, za), (b, zb))| *a < 3 && *b < 3 && *za < 4 && *zb < 4));
    }
}
