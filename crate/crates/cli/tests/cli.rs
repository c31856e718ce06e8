use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn stabkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stabkit")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn majority_stability_near_the_limit() {
    let out = stabkit(&["stab", "--maj", "101", "--rho", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let v = r["stab_two_sided"].as_f64().unwrap();
    assert!((v - 2.0 / 3.0).abs() < 1e-3);
}

#[test]
fn library_files_verify_and_tampering_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let lib = stabkit(&["sos-library", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(lib.status.code(), Some(0), "{}", String::from_utf8_lossy(&lib.stderr));
    let mut files: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert!(!files.is_empty());
    for f in &files {
        let out = stabkit(&["sos-verify", f.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", f.display());
        assert_eq!(json(&out)["valid"], Value::Bool(true));
    }

    let first = &files[0];
    let mut cert: Value = serde_json::from_str(&fs::read_to_string(first).unwrap()).unwrap();
    cert["target"] = Value::String(format!("{} + 1/3", cert["target"].as_str().unwrap()));
    let tampered = dir.path().join("tampered.json");
    fs::write(&tampered, cert.to_string()).unwrap();
    let out = stabkit(&["sos-verify", tampered.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["valid"], Value::Bool(false));
}

#[test]
fn dictator_violates_the_mist_inequality_with_a_witness() {
    let out = stabkit(&["check-mist", "--f", "dictator", "--rho", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert!(r["mist"]["report"]["margin"].as_f64().unwrap() < 0.0);
    assert_eq!(r["mist"]["report"]["witness"]["tau"].as_f64(), Some(0.25));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(stabkit(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(stabkit(&["stab", "--rho", "2", "--f", "majority"]).status.code(), Some(2));
    assert_eq!(stabkit(&["fourier", "--format", "csv", "--f", "dictator"]).status.code(), Some(0));
    assert_eq!(stabkit(&["stab", "--format", "csv", "--rho", "1/2"]).status.code(), Some(2));
    assert_eq!(stabkit(&["sos-verify", "/nonexistent/cert.json"]).status.code(), Some(2));
}

#[test]
fn jgrid_csv_has_a_header_and_rows() {
    let out = stabkit(&["jgrid", "--rho", "-0.4", "--step", "0.2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,J,Jx,Jy,Jxx,Jxy,Jyy"));
    let rows: Vec<_> = lines.collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.split(',').count() == 8));
}

#[test]
fn reduction_weights_sum_to_one() {
    let out = stabkit(&["reduce", "--rho", "-1/2", "--vertices", "3", "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["total_weight"], Value::String("1".into()));
}

#[test]
fn runs_are_deterministic_per_seed() {
    let run = |seed: &str| stabkit(&["--seed", seed, "fourier", "--f", "random", "--n", "4"]).stdout;
    assert_eq!(run("3"), run("3"));
    assert_ne!(run("3"), run("4"));
}

#[test]
fn output_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bounds.json");
    let out = stabkit(&["bounds", "-o", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&fs::read_to_string(Path::new(&path)).unwrap()).unwrap();
    assert!(r.is_object() || r.is_array());
}

#[test]
fn suite_runs_a_single_criterion() {
    let out = stabkit(&["suite", "--only", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("PASS 01"), "{stderr}");
    assert_eq!(stabkit(&["suite", "--only", "13"]).status.code(), Some(2));
}
