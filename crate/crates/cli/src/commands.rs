use std::collections::BTreeMap;
use std::fs;

use num_traits::{One, Zero};
use serde_json::{json, Value};
use stabkit::battery::{run_criterion, CRITERIA};
use stabkit::bernstein::approximate_j;
use stabkit::cube::majority_stability_dp;
use stabkit::delta::delta_report;
use stabkit::gaussian::{sheppard_two_sided, JEvaluator};
use stabkit::scalar::{format_rational, parse_rational};
use stabkit::sos::{
    certificate_library, check_pseudo_expectation, search_certificate, verify_certificate, Certificate, LibraryFact,
    PseudoExpectation, SearchOutcome,
};
use stabkit::tensorization::{base_case_sweep, borell_block_check, check_mist, check_tensorization};
use stabkit::ug::{bounds_report, cut_value, kkmo_reduce, CutAssignment, EdgeSampler, UgInstance};
use stabkit::{ExactFunction, Rational, Scalar};

use crate::inputs::{named_function, problem_from_json, problem_json, rational, read_json};
use crate::{CliError, Command, Format, Outcome};

pub fn dispatch(cmd: &Command, seed: u64, format: Format) -> Result<Outcome, CliError> {
    match cmd {
        Command::Fourier(f) => fourier(&f.load(seed)?),
        Command::Stab { maj, rho, f } => stab(*maj, rho, || f.load(seed)),
        Command::Delta { f, sigma } => delta(&f.load(seed)?, sigma.as_deref()),
        Command::Jgrid { rho, step, lo, hi } => jgrid(*rho, *step, *lo, *hi, format),
        Command::CheckBase { rho, eps, trials } => {
            let s = base_case_sweep(*rho, *eps, *trials, seed)?;
            Ok(Outcome::new(json!({"rho": rho, "eps": eps, "seed": seed, "summary": s}), s.passed == s.trials))
        }
        Command::CheckTensor { f, g, rho, eps, eta, raw } => {
            let first = f.load(seed)?;
            let second = match g {
                Some(name) => named_function(name, f.n, f.coord, &f.value, f.bits, seed.wrapping_add(1))?,
                None => first.clone(),
            };
            check_tensor(first, second, *rho, *eps, eta, *raw)
        }
        Command::CheckMist { f, rho, constant } => {
            let r = check_mist(&f.load(seed)?, *rho, *constant)?;
            let ok = r.report.ok;
            Ok(Outcome::new(json!({"function": f.f, "n": f.n, "rho": rho, "mist": r}), ok))
        }
        Command::CheckBorell { rho, eps, dim, block, trials, threshold } => {
            let (lo, hi, t) = (*eps, 1.0 - *eps, *threshold);
            let f = move |g: &[f64]| if g[0] <= t { hi } else { lo };
            let r = borell_block_check(&f, &f, *dim, *rho, *eps, *block, *trials, seed)?;
            let ok = r.report.ok;
            Ok(Outcome::new(json!({"rho": rho, "eps": eps, "dim": dim, "threshold": t, "seed": seed, "borell": r}), ok))
        }
        Command::ApproxJ { rho, eps, delta, with_net } => {
            let jt = approximate_j(*rho, *eps, *delta)?;
            Ok(Outcome::new(serde_json::to_value(jt.to_file(*with_net)?).expect("serializable"), true))
        }
        Command::SosVerify { file } => sos_verify(&read_json(file)?),
        Command::SosSearch { problem, degree } => {
            let v = problem.variables();
            let a = problem.constraints(&v)?;
            let target = problem
                .target
                .as_deref()
                .ok_or_else(|| CliError::Usage("sos-search needs --target".into()))?;
            let h = stabkit::sos::Polynomial::parse(&v, target)?;
            sos_search(&h, &a, *degree)
        }
        Command::SosLibrary { fact, params, out_dir } => sos_library(fact.as_deref(), params, out_dir.as_deref()),
        Command::SosPe { file, problem } => {
            let v = read_json(file)?;
            let pe = PseudoExpectation::from_json(&v)?;
            let a = if v.get("equalities").is_some() || v.get("inequalities").is_some() {
                problem_from_json(&v)?.2
            } else {
                problem.constraints(&pe.vars)?
            };
            let r = check_pseudo_expectation(&pe, &a)?;
            let ok = r.ok;
            Ok(Outcome::new(serde_json::to_value(r).expect("serializable"), ok))
        }
        Command::Reduce { instance, rho, sample } => {
            let (inst, _) = instance.load(seed)?;
            reduce(&inst, rho, *sample, seed)
        }
        Command::CutValue { instance, rho, cut, labeling } => {
            let (inst, hidden) = instance.load(seed)?;
            let labels = labeling.clone().or(hidden);
            cut_command(&inst, rho, cut, labels, seed)
        }
        Command::Bounds { rho } => {
            let rhos = rho.clone().unwrap_or_else(|| (1..=9).map(|t| -(t as f64) / 10.0).collect());
            let reports = rhos.iter().map(|&r| bounds_report(r)).collect::<stabkit::Result<Vec<_>>>()?;
            let ok = reports.iter().all(|b| b.ordered);
            Ok(Outcome::new(json!({"bounds": reports}), ok))
        }
        Command::Suite { only } => suite(only.as_deref(), seed),
    }
}

fn subset(s: usize, n: usize) -> Vec<usize> {
    (0..n).filter(|i| s >> i & 1 == 1).map(|i| i + 1).collect()
}

fn fourier(f: &ExactFunction) -> Result<Outcome, CliError> {
    let fe = f.fourier()?;
    let n = f.n();
    let coeffs: Vec<(usize, &Rational)> = fe.coeffs().iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
    let influences = (1..=n).map(|i| fe.influence(i).map(|v| format_rational(&v))).collect::<stabkit::Result<Vec<_>>>()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["set", "coefficient"]).map_err(csv_err)?;
    for (s, c) in &coeffs {
        let set = subset(*s, n).iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        w.write_record([set, format_rational(c)]).map_err(csv_err)?;
    }
    let report = json!({
        "n": n,
        "mean": format_rational(&f.mean()),
        "parseval_sum": format_rational(&fe.parseval_sum()),
        "second_moment": format_rational(&f.second_moment()),
        "coefficients": coeffs.iter().map(|(s, c)| json!([subset(*s, n), format_rational(c)])).collect::<Vec<_>>(),
        "influences": influences,
    });
    let ok = fe.parseval_sum() == f.second_moment();
    Ok(Outcome { report, ok, csv: Some(csv_text(w)?) })
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Usage(format!("csv: {e}"))
}

fn csv_text(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn stab(maj: Option<usize>, rho: &str, load: impl FnOnce() -> Result<ExactFunction, CliError>) -> Result<Outcome, CliError> {
    let r = rational(rho)?;
    let rf = r.to_double();
    if let Some(n) = maj {
        let v = majority_stability_dp(n, rf)?;
        let limit = sheppard_two_sided(rf)?;
        return Ok(Outcome::new(
            json!({"function": "majority", "n": n, "rho": rf, "stab_two_sided": v,
                "sheppard_limit": limit, "distance": (v - limit).abs()}),
            true,
        ));
    }
    let f = load()?;
    let fe = f.fourier()?;
    let two = fe.stab_two_sided(&r)?;
    let one = fe.stability_bilinear(fe, &r)?;
    Ok(Outcome::new(
        json!({"n": f.n(), "rho": format_rational(&r), "stab_two_sided": format_rational(&two),
            "stability": format_rational(&one), "stab_two_sided_f64": two.to_double()}),
        true,
    ))
}

fn delta(f: &ExactFunction, sigma: Option<&str>) -> Result<Outcome, CliError> {
    let s = sigma.map(rational).transpose()?;
    let r = delta_report(f, s.as_ref(), format_rational)?;
    let ok = r.recursive_equals_fourier && r.flip_bound_holds && r.hyper_bound.as_ref().is_none_or(|h| h.ok);
    Ok(Outcome::new(serde_json::to_value(r).expect("serializable"), ok))
}

fn jgrid(rho: f64, step: f64, lo: f64, hi: f64, format: Format) -> Result<Outcome, CliError> {
    if !(step > 0.0 && lo > 0.0 && hi < 1.0 && lo <= hi) {
        return Err(CliError::Usage("need 0 < lo ≤ hi < 1 and step > 0".into()));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let nodes: Vec<f64> = (0..count).map(|i| lo + step * i as f64).collect();
    let j = JEvaluator::new(rho)?;
    let mut rows = Vec::new();
    for &x in &nodes {
        for &y in &nodes {
            let v = j.value(x, y)?;
            let (gx, gy) = j.grad(x, y)?;
            let h = j.hessian(x, y)?;
            rows.push([x, y, v, gx, gy, h.a, h.b, h.d]);
        }
    }
    let csv = if format == Format::Csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["x", "y", "J", "Jx", "Jy", "Jxx", "Jxy", "Jyy"]).map_err(csv_err)?;
        for r in &rows {
            w.write_record(r.iter().map(|v| v.to_string())).map_err(csv_err)?;
        }
        Some(csv_text(w)?)
    } else {
        None
    };
    let report = json!({"rho": rho, "grid_size": count, "columns": ["x", "y", "J", "Jx", "Jy", "Jxx", "Jxy", "Jyy"],
        "rows": rows});
    Ok(Outcome { report, ok: true, csv })
}

fn check_tensor(f: ExactFunction, g: ExactFunction, rho: f64, eps: f64, eta: &str, raw: bool) -> Result<Outcome, CliError> {
    let (f, g, smoothing) = if raw {
        (f, g, Value::Null)
    } else {
        // Smoothing with ε_s = 2ε lands in [ε, 1−ε].
        let eps_s = Rational::from_double(2.0 * eps);
        let eta = rational(eta)?;
        let sm = json!({"eps": format_rational(&eps_s), "eta": format_rational(&eta)});
        (f.smooth(&eps_s, &eta)?, g.smooth(&eps_s, &eta)?, sm)
    };
    let r = check_tensorization(&f, &g, rho, eps)?;
    let ok = r.ok;
    Ok(Outcome::new(json!({"n": f.n(), "rho": rho, "eps": eps, "smoothing": smoothing, "report": r}), ok))
}

fn sos_verify(v: &Value) -> Result<Outcome, CliError> {
    let (_, target, a) = problem_from_json(v)?;
    let h = target.ok_or_else(|| CliError::Usage("certificate file lacks \"target\"".into()))?;
    let cert = Certificate::from_json(&a, v)?;
    let r = verify_certificate(&h, &a, &cert)?;
    Ok(Outcome::new(
        json!({"valid": r.valid, "target": h.to_string(), "degree": cert.degree, "residual": r.residual.to_string()}),
        r.valid,
    ))
}

fn certificate_file(h: &stabkit::sos::Polynomial, a: &stabkit::sos::ConstraintSet, cert: &Certificate) -> Result<Value, CliError> {
    let mut out = cert.to_json(a)?;
    if let (Value::Object(o), Value::Object(p)) = (&mut out, problem_json(h, a)) {
        o.extend(p);
    }
    Ok(out)
}

fn sos_search(h: &stabkit::sos::Polynomial, a: &stabkit::sos::ConstraintSet, d: u32) -> Result<Outcome, CliError> {
    Ok(match search_certificate(h, a, d)? {
        SearchOutcome::Certificate { certificate, bits, sdp } => Outcome::new(
            json!({"outcome": "certificate", "bits": bits, "sdp": sdp,
                "certificate": certificate_file(h, a, &certificate)?}),
            true,
        ),
        SearchOutcome::Infeasible { pe, value, report, sdp } => Outcome::new(
            json!({"outcome": "infeasible", "pseudo_expectation_value": value, "witness": pe.to_json(),
                "witness_check": report, "sdp": sdp}),
            false,
        ),
        SearchOutcome::Indeterminate { reason, sdp } => {
            Outcome::new(json!({"outcome": "indeterminate", "reason": reason, "sdp": sdp}), false)
        }
    })
}

fn sos_library(fact: Option<&str>, params: &[String], out_dir: Option<&std::path::Path>) -> Result<Outcome, CliError> {
    let facts = match fact {
        None => LibraryFact::standard_instances(),
        Some(id) => {
            let mut map = BTreeMap::new();
            for p in params {
                let (k, v) = p
                    .split_once('=')
                    .ok_or_else(|| CliError::Usage(format!("parameter {p:?} is not name=value")))?;
                map.insert(k.to_string(), v.to_string());
            }
            vec![LibraryFact::parse(id, &map)?]
        }
    };
    let mut entries = Vec::new();
    let mut ok = true;
    for f in &facts {
        for e in certificate_library(f)? {
            let valid = verify_certificate(&e.target, &e.constraints, &e.certificate)?.valid;
            ok &= valid;
            let file = certificate_file(&e.target, &e.constraints, &e.certificate)?;
            if let Some(dir) = out_dir {
                fs::create_dir_all(dir).map_err(|err| CliError::Usage(format!("{}: {err}", dir.display())))?;
                let path = dir.join(format!("{:03}-{}.json", entries.len(), slug(&e.name)));
                let text = serde_json::to_string_pretty(&file).expect("serializable");
                fs::write(&path, text).map_err(|err| CliError::Usage(format!("{}: {err}", path.display())))?;
            }
            entries.push(json!({"name": e.name, "valid": valid, "certificate": file}));
        }
    }
    Ok(Outcome::new(json!({"entries": entries}), ok))
}

/// File-name friendly form of an entry name, e.g. `y4_le_y2`.
fn slug(name: &str) -> String {
    let spelled = name
        .replace("<=", " le ")
        .replace(">=", " ge ")
        .replace('-', " minus ")
        .replace('+', " plus ");
    let mut out = String::new();
    for c in spelled.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c);
        } else if c != '^' && !out.is_empty() && !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_end_matches('_').to_string()
}

fn reduce(inst: &UgInstance, rho: &str, sample: Option<usize>, seed: u64) -> Result<Outcome, CliError> {
    let r = rational(rho)?;
    let sign = |z: usize| -> String { (0..inst.k()).map(|j| if z >> j & 1 == 0 { '+' } else { '-' }).collect() };
    if let Some(m) = sample {
        let edges: Vec<_> = EdgeSampler::new(inst, r.to_double(), seed)?.take(m).collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["u_vertex", "u_point", "v_vertex", "v_point"]).map_err(csv_err)?;
        for ((a, za), (b, zb)) in &edges {
            w.write_record([a.to_string(), sign(*za), b.to_string(), sign(*zb)]).map_err(csv_err)?;
        }
        let list: Vec<Value> = edges.iter().map(|((a, za), (b, zb))| json!([[a, sign(*za)], [b, sign(*zb)]])).collect();
        let report = json!({"mode": "sampler", "rho": format_rational(&r), "seed": seed, "edges": list});
        return Ok(Outcome { report, ok: true, csv: Some(csv_text(w)?) });
    }
    let mc = kkmo_reduce(inst, &r)?;
    let total = mc.total_weight();
    let list: Vec<Value> = mc
        .edges
        .iter()
        .map(|(((a, za), (b, zb)), w)| json!([[a, sign(*za)], [b, sign(*zb)], format_rational(w)]))
        .collect();
    let ok = total == Rational::one();
    let report = json!({"mode": "exact", "rho": format_rational(&r), "ug_vertices": mc.ug_vertices, "k": mc.k,
        "edge_count": list.len(), "total_weight": format_rational(&total), "edges": list});
    Ok(Outcome { report, ok, csv: Some(mc.to_csv()) })
}

fn cut_command(inst: &UgInstance, rho: &str, cut: &str, labels: Option<Vec<usize>>, seed: u64) -> Result<Outcome, CliError> {
    let r = rational(rho)?;
    let (k, nv) = (inst.k(), inst.vertices());
    let assignment = match cut {
        "dictators" => {
            let l = labels.ok_or_else(|| CliError::Usage("dictator cuts need --labeling".into()))?;
            CutAssignment::dictators(k, &l)?
        }
        "random" => CutAssignment::random(k, nv, seed)?,
        other => match other.strip_prefix("constant:") {
            Some(c) => CutAssignment::constant(k, nv, rational(c)?)?,
            None => {
                let v = read_json(std::path::Path::new(other))?;
                let tables: Vec<Vec<String>> = serde_json::from_value(v.get("tables").cloned().unwrap_or(Value::Null))
                    .map_err(|e| CliError::Usage(format!("{other}: tables: {e}")))?;
                let tables = tables
                    .iter()
                    .map(|t| t.iter().map(|s| parse_rational(s)).collect::<stabkit::Result<Vec<_>>>())
                    .collect::<stabkit::Result<Vec<_>>>()?;
                CutAssignment::new(k, tables)?
            }
        },
    };
    let cv = cut_value(inst, &r, &assignment)?;
    let ok = cv.agree;
    Ok(Outcome::new(
        json!({"rho": format_rational(&r), "cut": cut, "value": cv, "value_f64": cv.direct.to_double(),
            "dictator_reference": format_rational(&((Rational::one() - &r) / Rational::from_int(2)))}),
        ok,
    ))
}

fn suite(only: Option<&[usize]>, seed: u64) -> Result<Outcome, CliError> {
    let ids: Vec<usize> = match only {
        Some(ids) => ids.to_vec(),
        None => (1..=CRITERIA.len()).collect(),
    };
    let mut outcomes = Vec::new();
    for id in ids {
        let o = run_criterion(id, seed)?;
        eprintln!("{}", o.line());
        outcomes.push(o);
    }
    let ok = outcomes.iter().all(|o| o.passed);
    Ok(Outcome::new(json!({"seed": seed, "passed": ok, "criteria": outcomes}), ok))
}
