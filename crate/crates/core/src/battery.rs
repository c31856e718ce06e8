//! The acceptance battery: twelve end-to-end checks, each reduced to one
//! pass/fail verdict with a JSON report.

use std::collections::BTreeSet;
use std::time::Instant;

use num_traits::One;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bernstein::{approximate_j, ladder_ratio, JTilde};
use crate::cube::{
    dictator, majority, majority_stability_dp, parity, random_dyadic, random_dyadic_signed, BooleanFunction,
    RangeTag,
};
use crate::delta::{delta_fourier, delta_hyper_bound, delta_recursive, flip_bound, variance_identity};
use crate::gaussian::{Definiteness, JEvaluator};
use crate::lemmas::{high_low_split_checks, nu_expansion_check, taylor_lemma_numeric};
use crate::sos::{
    certificate_library, check_pseudo_expectation, closure_e, search_certificate, vars, verify_certificate, ConstraintSet,
    LibraryFact, Monomial, Polynomial, PseudoExpectation, SearchOutcome,
};
use crate::tensorization::{base_case_sweep, check_mist, check_tensorization};
use crate::ug::{bounds_report, cut_value, toy_instance, CutAssignment, GeneratorKind};
use crate::{Rational, Result, Scalar};

/// Short names, indexed by criterion number minus one.
pub const CRITERIA: [&str; 12] = [
    "sheppard-majority",
    "j-derivatives",
    "m-definiteness",
    "delta-identities",
    "delta-hypercontractive",
    "base-case-and-tensorization",
    "mist-trend",
    "bernstein-ladder",
    "sos-certificates",
    "pseudo-expectations",
    "lemma-checks",
    "ug-reduction",
];

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub summary: String,
    pub seconds: f64,
    pub details: Value,
}

impl CriterionOutcome {
    /// One line: `PASS 01 sheppard-majority (0.0s): …`.
    pub fn line(&self) -> String {
        format!(
            "{} {:02} {} ({:.1}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.summary
        )
    }
}

type Verdict = Result<(bool, String, Value)>;

/// Runs criterion `id` (1-based). Errors count as failures.
pub fn run_criterion(id: usize, seed: u64) -> Result<CriterionOutcome> {
    let name = *CRITERIA
        .get(id.wrapping_sub(1))
        .ok_or_else(|| crate::Error::Domain(format!("no criterion {id}; valid ids are 1..=12")))?;
    let start = Instant::now();
    let verdict = match id {
        1 => sheppard(),
        2 => j_derivatives(),
        3 => m_definiteness(),
        4 => delta_identities(seed),
        5 => delta_hyper(seed),
        6 => base_and_tensor(seed),
        7 => mist_trend(),
        8 => bernstein_ladder(),
        9 => sos_certificates(seed),
        10 => pseudo_expectations(seed),
        11 => lemma_checks(seed),
        _ => ug_reduction(seed),
    };
    let (passed, summary, details) = verdict.unwrap_or_else(|e| (false, format!("error: {e}"), Value::Null));
    Ok(CriterionOutcome {
        id,
        name,
        passed,
        summary,
        seconds: start.elapsed().as_secs_f64(),
        details,
    })
}

pub fn run_all(seed: u64) -> Vec<CriterionOutcome> {
    (1..=CRITERIA.len())
        .map(|id| run_criterion(id, seed).expect("valid id"))
        .collect()
}

fn q(a: i64, b: i64) -> Rational {
    Rational::from_ratio(a, b)
}

fn sheppard() -> Verdict {
    let target = 2.0 / 3.0;
    let ns = [3usize, 11, 31, 101];
    let values = ns
        .iter()
        .map(|&n| majority_stability_dp(n, 0.5))
        .collect::<Result<Vec<_>>>()?;
    let dist: Vec<f64> = values.iter().map(|v| (v - target).abs()).collect();
    let monotone = dist.windows(2).all(|w| w[1] < w[0]);
    let last = dist[3];
    let ok = monotone && last <= 0.02;
    Ok((
        ok,
        format!("|Stab(Maj_101) − 2/3| = {last:.4}, monotone = {monotone}"),
        json!({"n": ns, "values": values, "target": target}),
    ))
}

const FD_STEP: f64 = 1e-5;
const FD_TOL: f64 = 1e-6;

/// `|a − b| ≤ tol · max(1, |a|)`; the floor keeps entries near zero
/// from demanding absolute accuracy beyond the step's truncation error.
fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(1.0)
}

fn unit_grid() -> Vec<f64> {
    (0..=16).map(|i| 0.1 + 0.05 * i as f64).collect()
}

const GRID_RHOS: [f64; 4] = [-0.7, -0.3, 0.3, 0.7];

fn j_derivatives() -> Verdict {
    let h = FD_STEP;
    let grid = unit_grid();
    let mut checked = 0usize;
    let mut failures = Vec::new();
    let mut worst_fd = 0.0f64;
    let mut worst_det = 0.0f64;
    for &rho in &GRID_RHOS {
        let j = JEvaluator::new(rho)?;
        for &x in &grid {
            for &y in &grid {
                checked += 1;
                let (gx, gy) = j.grad(x, y)?;
                let fd_gx = (j.value(x + h, y)? - j.value(x - h, y)?) / (2.0 * h);
                let fd_gy = (j.value(x, y + h)? - j.value(x, y - h)?) / (2.0 * h);
                let hs = j.hessian(x, y)?;
                let (hxp, hxm) = (j.grad(x + h, y)?, j.grad(x - h, y)?);
                let (hyp, hym) = (j.grad(x, y + h)?, j.grad(x, y - h)?);
                let fd_xx = (hxp.0 - hxm.0) / (2.0 * h);
                let fd_xy = (hyp.0 - hym.0) / (2.0 * h);
                let fd_yy = (hyp.1 - hym.1) / (2.0 * h);
                let t = j.third(x, y)?;
                let (sxp, sxm) = (j.hessian(x + h, y)?, j.hessian(x - h, y)?);
                let (syp, sym) = (j.hessian(x, y + h)?, j.hessian(x, y - h)?);
                let pairs = [
                    ("dx", gx, fd_gx),
                    ("dy", gy, fd_gy),
                    ("dxx", hs.a, fd_xx),
                    ("dxy", hs.b, fd_xy),
                    ("dyy", hs.d, fd_yy),
                    ("dxxx", t.xxx, (sxp.a - sxm.a) / (2.0 * h)),
                    ("dxxy", t.xxy, (syp.a - sym.a) / (2.0 * h)),
                    ("dxyy", t.xyy, (syp.b - sym.b) / (2.0 * h)),
                    ("dyyy", t.yyy, (syp.d - sym.d) / (2.0 * h)),
                ];
                for (name, cf, fd) in pairs {
                    worst_fd = worst_fd.max((cf - fd).abs() / cf.abs().max(1.0));
                    if !close(cf, fd, FD_TOL) {
                        failures.push(json!({"rho": rho, "x": x, "y": y, "partial": name, "closed": cf, "fd": fd}));
                    }
                }
                let lhs = hs.a * hs.d;
                let rhs = rho * rho * hs.b * hs.b;
                let det_err = (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE);
                worst_det = worst_det.max(det_err);
                if det_err > 1e-8 {
                    failures.push(json!({"rho": rho, "x": x, "y": y, "identity": "det", "lhs": lhs, "rhs": rhs}));
                }
                if let Err(e) = j.drho(x, y) {
                    failures.push(json!({"rho": rho, "x": x, "y": y, "drho": e.to_string()}));
                }
            }
        }
    }
    Ok((
        failures.is_empty(),
        format!("{checked} points, worst FD rel {worst_fd:.2e}, worst det rel {worst_det:.2e}"),
        json!({"points": checked, "worst_fd": worst_fd, "worst_det": worst_det, "failures": failures}),
    ))
}

fn m_definiteness() -> Verdict {
    let grid = unit_grid();
    let mut checked = 0usize;
    let mut failures = Vec::new();
    for &rho in &GRID_RHOS {
        let j = JEvaluator::new(rho)?;
        let want = if rho > 0.0 { Definiteness::Nsd } else { Definiteness::Psd };
        for k in 0..=4 {
            let sigma = rho * k as f64 / 4.0;
            for &x in &grid {
                for &y in &grid {
                    checked += 1;
                    let got = j.m_matrix(sigma, x, y)?.definiteness();
                    if got != want && got != Definiteness::Zero {
                        failures.push(json!({"rho": rho, "sigma": sigma, "x": x, "y": y, "got": got}));
                    }
                }
            }
        }
    }
    Ok((
        failures.is_empty(),
        format!("{checked} matrices, {} with the wrong sign", failures.len()),
        json!({"matrices": checked, "failures": failures}),
    ))
}

/// `(1 + χ_[n])/2`, the full parity as a `{0,1}` function.
fn parity_unit(n: usize) -> Result<BooleanFunction<Rational>> {
    let chi = parity::<Rational>(n, &(1..=n).collect::<Vec<_>>())?;
    let half = q(1, 2);
    let values = chi.values().iter().map(|v| (Rational::one() + v) * &half).collect();
    BooleanFunction::new(n, values, RangeTag::UnitInterval)
}

fn delta_corpus(n: usize, count: usize, seed: u64) -> Result<Vec<BooleanFunction<Rational>>> {
    let mut out: Vec<BooleanFunction<Rational>> = (0..count as u64)
        .map(|i| random_dyadic(n, 6, seed.wrapping_mul(1_000_003).wrapping_add(1000 * n as u64 + i)))
        .collect::<Result<_>>()?;
    if n % 2 == 1 {
        out.push(majority(n)?);
    }
    out.push(dictator(n, 1)?);
    out.push(parity_unit(n)?);
    Ok(out)
}

fn delta_identities(seed: u64) -> Verdict {
    let mut total = 0usize;
    let mut failures = Vec::new();
    for n in 1..=8 {
        for (i, f) in delta_corpus(n, 200, seed)?.iter().enumerate() {
            total += 1;
            let rec = delta_recursive(f);
            let four = delta_fourier(f)?;
            let mut bad = Vec::new();
            if rec != four {
                bad.push("recursive != fourier");
            }
            if rec > flip_bound(f) {
                bad.push("flip bound");
            }
            if !variance_identity(f)? {
                bad.push("variance identity");
            }
            if !bad.is_empty() {
                failures.push(json!({"n": n, "index": i, "failed": bad}));
            }
        }
    }
    Ok((
        failures.is_empty(),
        format!("{total} functions, {} failures", failures.len()),
        json!({"functions": total, "failures": failures}),
    ))
}

fn delta_hyper(seed: u64) -> Verdict {
    let sigmas = [q(3, 4), q(9, 10)];
    let mut checked = 0usize;
    let mut failures = Vec::new();
    let mut tightest = f64::INFINITY;
    for i in 0..500u64 {
        let f = random_dyadic_signed::<Rational>(8, 6, seed.wrapping_mul(7_919).wrapping_add(i))?;
        for s in &sigmas {
            checked += 1;
            let (_, b) = delta_hyper_bound(&f, s)?;
            tightest = tightest.min(b.rhs - b.lhs);
            if !b.ok {
                failures.push(json!({"index": i, "sigma": s.to_string(), "bound": b}));
            }
        }
    }
    Ok((
        failures.is_empty(),
        format!("{checked} checks, smallest slack {tightest:.3e}"),
        json!({"checks": checked, "smallest_slack": tightest, "failures": failures}),
    ))
}

fn base_and_tensor(seed: u64) -> Verdict {
    let mut sweeps = Vec::new();
    let mut ok = true;
    for rho in [0.3, 0.5, 0.7] {
        for eps in [0.05, 0.1, 0.2] {
            let s = base_case_sweep(rho, eps, 10_000, seed)?;
            ok &= s.passed == s.trials;
            sweeps.push(json!({"rho": rho, "eps": eps, "passed": s.passed, "trials": s.trials,
                "worst_margin": s.worst.margin}));
        }
    }
    // Smoothing with ε_s = 1/5 lands in [1/10, 9/10], so check at ε = 1/10.
    let (eps_s, eta) = (q(1, 5), q(1, 10));
    let eps = 0.1;
    let mut pairs = 0usize;
    let mut worst = f64::INFINITY;
    let mut tensor_failures = Vec::new();
    for n in 1..=6usize {
        let mut corpus = vec![dictator::<Rational>(n, 1)?, dictator(n, n)?];
        if n % 2 == 1 {
            corpus.push(majority(n)?);
        }
        corpus.push(parity_unit(n)?);
        for s in 0..2 {
            corpus.push(random_dyadic(n, 4, seed.wrapping_add(31 * n as u64 + s))?);
        }
        let smoothed = corpus
            .iter()
            .map(|f| f.smooth(&eps_s, &eta))
            .collect::<Result<Vec<_>>>()?;
        for rho in [0.3, 0.5] {
            for (a, f) in smoothed.iter().enumerate() {
                for (b, g) in smoothed.iter().enumerate() {
                    pairs += 1;
                    let r = check_tensorization(f, g, rho, eps)?;
                    worst = worst.min(r.margin);
                    if !r.ok {
                        tensor_failures.push(json!({"n": n, "rho": rho, "f": a, "g": b, "report": r}));
                    }
                }
            }
        }
    }
    ok &= tensor_failures.is_empty();
    Ok((
        ok,
        format!("9 sweeps of 10^4 trials, {pairs} tensorized pairs, worst margin {worst:.3e}"),
        json!({"sweeps": sweeps, "pairs": pairs, "worst_margin": worst, "failures": tensor_failures}),
    ))
}

fn mist_trend() -> Verdict {
    let mut gaps = Vec::new();
    for n in (5..=15).step_by(2) {
        let r = check_mist(&majority::<f64>(n)?, 0.5, None)?;
        gaps.push((n, r.gap));
    }
    let positive = gaps.iter().all(|g| g.1 > 0.0);
    let decreasing = gaps.windows(2).all(|w| w[1].1 < w[0].1);
    let last = gaps.last().map_or(f64::NAN, |g| g.1);
    let dict = check_mist(&dictator::<f64>(5, 1)?, 0.5, None)?.gap;
    let ok = positive && decreasing && last < 0.06 && dict >= 0.04;
    Ok((
        ok,
        format!("Maj_15 gap {last:.4}, decreasing = {decreasing}, dictator gap {dict:.4}"),
        json!({"majority_gaps": gaps, "dictator_gap": dict}),
    ))
}

fn bernstein_ladder() -> Verdict {
    let jt = approximate_j(0.5, 0.1, 0.01)?;
    let err = jt.ladder.last().map_or(f64::NAN, |r| r.max);
    let ratio = ladder_ratio(&jt.ladder);
    let ok = err <= 0.01 && ratio.is_some_and(|r| r <= 0.75);
    Ok((
        ok,
        format!("degree {} error {err:.3e}, ratio {}", jt.n, ratio.map_or("none".into(), |r| format!("{r:.3}"))),
        json!({"degree": jt.n, "error": err, "ratio": ratio, "ladder": jt.ladder}),
    ))
}

fn sos_certificates(seed: u64) -> Verdict {
    let mut entries = Vec::new();
    for fact in LibraryFact::standard_instances() {
        entries.extend(certificate_library(&fact)?);
    }
    let mut library_ok = true;
    for e in &entries {
        library_ok &= verify_certificate(&e.target, &e.constraints, &e.certificate)?.valid;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perturbable: Vec<_> = entries.iter().filter(|e| e.certificate.coefficient_slots() > 0).collect();
    let mut accepted = Vec::new();
    for _ in 0..100 {
        let e = perturbable[rng.gen_range(0..perturbable.len())];
        let slot = rng.gen_range(0..e.certificate.coefficient_slots());
        let mut num = rng.gen_range(-9i64..=9);
        if num == 0 {
            num = 1;
        }
        let delta = q(num, rng.gen_range(1..=16));
        let p = e.certificate.perturbed(slot, &delta);
        // Structural rejections count as detected perturbations.
        if verify_certificate(&e.target, &e.constraints, &p).is_ok_and(|v| v.valid) {
            accepted.push(json!({"entry": e.name, "slot": slot, "delta": delta.to_string()}));
        }
    }

    let v = vars(&["y"]);
    let interval = ConstraintSet::parse(&v, &[], &["1-y", "1+y"])?;
    let quartic = Polynomial::parse(&v, "y^2 - y^4")?;
    let mut found = None;
    for d in 2..=5 {
        if let SearchOutcome::Certificate { certificate, bits, .. } = search_certificate(&quartic, &interval, d)? {
            if verify_certificate(&quartic, &interval, &certificate)?.valid {
                found = Some((d, bits));
                break;
            }
        }
    }
    let affine = Polynomial::parse(&v, "1 + y")?;
    let witness = match search_certificate(&affine, &ConstraintSet::new(&v), 2)? {
        SearchOutcome::Infeasible { value, .. } => Some(value),
        _ => None,
    };
    let ok = library_ok && accepted.is_empty() && found.is_some() && witness.is_some_and(|w| w < 0.0);
    Ok((
        ok,
        format!(
            "{} library certificates verify = {library_ok}, {} of 100 perturbations accepted, quartic found at degree {}, witness value {}",
            entries.len(),
            accepted.len(),
            found.map_or("none".into(), |f| f.0.to_string()),
            witness.map_or("none".into(), |w| format!("{w:.6}"))
        ),
        json!({"library": entries.len(), "library_ok": library_ok, "accepted_perturbations": accepted,
            "quartic": found.map(|(d, bits)| json!({"degree": d, "bits": bits})), "witness_value": witness}),
    ))
}

fn cube_constraints(n: usize) -> Result<(crate::sos::Vars, ConstraintSet)> {
    let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let v = vars(&refs);
    let eqs: Vec<String> = names.iter().map(|x| format!("{x}^2 - 1")).collect();
    let eq_refs: Vec<&str> = eqs.iter().map(String::as_str).collect();
    let a = ConstraintSet::parse(&v, &eq_refs, &[])?;
    Ok((v, a))
}

/// A corrupted moment tied to the cube equalities must be rejected; an
/// untied one (`E[x₁x₂x₃]` at degree 4) leaves a valid table. A corrupted
/// first moment must
/// also fail PSD: `1 − x_i²` spans a kernel direction of the genuine moment
/// matrix, and changing `E[x_i]` moves the kernel's image off zero. Other
/// single-moment changes can stay PSD (lowering `E[x²]` for `n = 1`, or
/// shifting `E[x₁x₂x₃]`); the tied ones are caught by the equality check.
fn pseudo_expectations(seed: u64) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tables = 0usize;
    let mut corrupted = 0usize;
    let mut psd_failures = 0usize;
    let mut failures = Vec::new();
    let mut weakest_first_order = f64::NEG_INFINITY;
    for n in 1..=3usize {
        let (v, a) = cube_constraints(n)?;
        let tied: BTreeSet<Monomial> = closure_e(&a, 4)?
            .iter()
            .flat_map(|g| g.poly.terms().map(|(m, _)| m.clone()).collect::<Vec<_>>())
            .collect();
        for t in 0..3 {
            let atoms: Vec<(Vec<f64>, f64)> = (0..1usize << n)
                .map(|i| {
                    let x = (0..n).map(|j| if i >> j & 1 == 1 { -1.0 } else { 1.0 }).collect();
                    let w = if t == 0 { 1.0 } else { rng.gen_range(0.05..1.0) };
                    (x, w)
                })
                .collect();
            let pe = PseudoExpectation::from_distribution(&v, 4, &atoms);
            tables += 1;
            let r = check_pseudo_expectation(&pe, &a)?;
            if !r.ok {
                failures.push(json!({"n": n, "table": t, "genuine": true, "margin": r.worst_margin}));
            }
            for m in pe.moments.keys().filter(|m| !m.is_one()).cloned().collect::<Vec<Monomial>>() {
                let mut bad = pe.clone();
                let old = bad.moment(&m)?;
                bad.set(m.clone(), old - 0.5);
                corrupted += 1;
                let r = check_pseudo_expectation(&bad, &a)?;
                let psd_failed = !r.psd_ok && r.worst_margin < -1e-6;
                psd_failures += psd_failed as usize;
                if m.degree() == 1 {
                    weakest_first_order = weakest_first_order.max(r.worst_margin);
                }
                if (r.ok && tied.contains(&m)) || (m.degree() == 1 && !psd_failed) {
                    failures.push(json!({"n": n, "table": t, "moment": m.0, "margin": r.worst_margin}));
                }
            }
        }
    }
    Ok((
        failures.is_empty(),
        format!(
            "{tables} genuine tables, {corrupted} corruptions, tied ones rejected = {}, {psd_failures} fail PSD, weakest first-order margin {weakest_first_order:.3e}",
            failures.is_empty()
        ),
        json!({"tables": tables, "corrupted": corrupted, "psd_failures": psd_failures,
            "weakest_first_order_margin": weakest_first_order, "failures": failures}),
    ))
}

fn lemma_checks(seed: u64) -> Verdict {
    let jt = approximate_j(-0.5, 0.1, 0.01)?;
    let taylor = taylor_lemma_numeric(&jt, 0.1, -0.5, 10_000, seed)?;
    let net = JTilde::at_degree(-0.5, 0.1, 8)?;
    let nu = nu_expansion_check(&net.monomial_exact()?, &q(-1, 2), 0.1, 200, seed);
    let mut splits = Vec::new();
    let mut split_ok = true;
    for eta in [q(1, 5), q(3, 10)] {
        for s in 0..3u64 {
            let f = random_dyadic::<Rational>(8, 4, seed.wrapping_add(100 + s))?;
            let r = high_low_split_checks(&f, &q(1, 10), &eta, seed.wrapping_add(s))?;
            split_ok &= r.all_ok && r.decomposition_holds;
            splits.push(r);
        }
    }
    let ok = taylor.all_pass && nu.mismatches == 0 && split_ok;
    Ok((
        ok,
        format!(
            "Taylor {}/{} (degree {}), nu mismatches {}, split checks ok = {split_ok}",
            taylor.passed, taylor.samples, taylor.degree, nu.mismatches
        ),
        json!({"taylor": taylor, "nu": nu, "splits": splits}),
    ))
}

fn ug_reduction(seed: u64) -> Verdict {
    let mut failures = Vec::new();
    for i in 0..50u64 {
        let s = seed.wrapping_mul(10_007).wrapping_add(i);
        let vertices = 2 + (i as usize % 7);
        let k = 2 + (i as usize % 3);
        let kind = if i % 2 == 0 { GeneratorKind::Random } else { GeneratorKind::Perfect };
        let rho = if i % 2 == 0 { q(-3, 10) } else { q(-3, 5) };
        let g = toy_instance(kind, vertices, k, 2, s)?;
        let cut = CutAssignment::random(k, vertices, s)?;
        let cv = cut_value(&g.instance, &rho, &cut)?;
        if !cv.agree {
            failures.push(json!({"instance": i, "direct": cv.direct.to_string(), "via_stability": cv.via_stability.to_string()}));
        }
        if let Some(labels) = &g.hidden_labeling {
            let dv = cut_value(&g.instance, &rho, &CutAssignment::dictators(k, labels)?)?;
            let want = (Rational::one() - &rho) / Rational::from_int(2);
            if dv.direct != want || !dv.agree {
                failures.push(json!({"instance": i, "dictator_value": dv.direct.to_string(), "expected": want.to_string()}));
            }
        }
    }
    let mut bounds = Vec::new();
    for t in 1..=9 {
        let b = bounds_report(-(t as f64) / 10.0)?;
        if !b.ordered {
            failures.push(json!({"bounds": b}));
        }
        bounds.push(b);
    }
    Ok((
        failures.is_empty(),
        format!("50 instances and 9 bound triples, {} failures", failures.len()),
        json!({"bounds": bounds, "failures": failures}),
    ))
}
