//! Acceptance battery at full level.
//!
//! Runs every criterion, prints one `[PASS]`/`[FAIL]` line each with the
//! measured values, and exits non-zero when any criterion fails.

use std::process::ExitCode;

use metastab::harness::validation::{validate_suite_with, Level};

fn main() -> ExitCode {
    let work = tempfile::tempdir().expect("temporary directory");
    println!("acceptance: 10 criteria at full level");
    let report = validate_suite_with(Level::Full, work.path(), |result| println!("{}", result.line()));
    let passed = report.criteria.iter().filter(|c| c.passed).count();
    println!("acceptance: {passed} passed; {} failed", report.criteria.len() - passed);
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
