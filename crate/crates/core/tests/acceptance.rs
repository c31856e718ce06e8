//! Runs the twelve acceptance criteria, printing one line each.
//!
//! Built without the libtest harness so the lines always show. An optional
//! argument filters criteria by name, as `cargo test` filters do.

use std::process::ExitCode;

use stabkit::battery::{run_criterion, CRITERIA};

fn main() -> ExitCode {
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = Vec::new();
    let mut ran = 0;
    for (i, name) in CRITERIA.iter().enumerate() {
        if filter.as_deref().is_some_and(|f| !name.contains(f)) {
            continue;
        }
        let o = run_criterion(i + 1, 0).expect("valid criterion id");
        println!("{}", o.line());
        ran += 1;
        if !o.passed {
            failed.push(o.name);
        }
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
