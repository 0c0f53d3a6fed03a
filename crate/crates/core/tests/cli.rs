//! The `metastab` binary end to end: subcommands, flags and exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const CONFIG: &str = "lambda = 2.0\nn_list = [1, 2, 3]\nseeds = 2\ntrials = 30\ntime_cap = 1e4\nmaster_seed = 9\n\n\
                      [model]\nmodel = \"bond\"\nd = 2\np = 0.4\n";

fn metastab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metastab"))
        .current_dir(dir)
        .env_remove("METASTAB_OUT")
        .env("RUST_LOG", "error")
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn run_then_resume_then_estimate() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), CONFIG).unwrap();
    let first = metastab(dir.path(), &["--config", "c.toml", "--out", "res", "--workers", "2", "run"]);
    let summary = json(&first);
    assert_eq!(summary["units"], 6);
    let csv = fs::read(dir.path().join("res/results.csv")).unwrap();
    let before = fs::read(dir.path().join("res/summary.json")).unwrap();

    let again = metastab(dir.path(), &["--config", "c.toml", "--out", "res", "--resume", "run"]);
    assert!(again.status.success());
    assert!(String::from_utf8_lossy(&again.stderr).contains("0 units computed, 6 reused"));
    assert_eq!(fs::read(dir.path().join("res/results.csv")).unwrap(), csv);
    assert_eq!(fs::read(dir.path().join("res/summary.json")).unwrap(), before);

    let estimate = json(&metastab(dir.path(), &["estimate", "res"]));
    assert_eq!(estimate, summary);
}

#[test]
fn output_directory_defaults_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), CONFIG).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_metastab"))
        .current_dir(dir.path())
        .env("METASTAB_OUT", "from-env")
        .args(["--config", "c.toml", "--seed", "3", "run"])
        .output()
        .unwrap();
    assert_eq!(json(&out)["master_seed"], 3);
    assert!(dir.path().join("from-env/results.csv").exists());
}

#[test]
fn generate_then_simulate_with_dumps() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), CONFIG).unwrap();
    let gen = metastab(dir.path(), &["--config", "c.toml", "--out", "g", "generate", "--n", "2"]);
    assert!(gen.status.success());
    let path = String::from_utf8(gen.stdout).unwrap().trim().to_string();
    assert!(path.ends_with("graph-bond-n2-0.txt"));
    let sim = metastab(
        dir.path(),
        &["simulate", &path, "--trials", "200", "--exact", "--dump-system", "sys.mtx", "--dump-trials", "t.csv"],
    );
    let report = json(&sim);
    assert_eq!(report["trials"], 200);
    assert!(report["exact"].as_f64().unwrap() > 0.0);
    let system = fs::read_to_string(dir.path().join("sys.mtx")).unwrap();
    assert!(system.starts_with("%%MatrixMarket matrix coordinate real general"));
    let dump = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert!(dump.starts_with("trial_index,tau,censored,events\n"));
    assert_eq!(dump.lines().count(), 201);
}

#[test]
fn census_writes_table_and_verdict_summary() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), CONFIG.replace("seeds = 2", "seeds = 5")).unwrap();
    let out = metastab(dir.path(), &["--config", "c.toml", "--out", "cen", "census", "--n", "12"]);
    let summary = json(&out);
    assert_eq!(summary["seeds"], 5);
    let on_disk: Value = serde_json::from_slice(&fs::read(dir.path().join("cen/census-summary.json")).unwrap()).unwrap();
    assert_eq!(on_disk, summary);
    assert!(dir.path().join("cen/census.csv").exists());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), CONFIG.replace("trials = 30", "trials = \"many\"")).unwrap();
    let out = metastab(dir.path(), &["--config", "bad.toml", "run"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4") && err.contains("trials"), "{err}");

    let missing = metastab(dir.path(), &["run"]);
    assert_eq!(missing.status.code(), Some(2));

    fs::write(dir.path().join("tree.toml"), "n_list = [4]\n[model]\nmodel = \"gw\"\nnu = \"2:1\"\n").unwrap();
    let not_lattice = metastab(dir.path(), &["--config", "tree.toml", "census", "--n", "4"]);
    assert_eq!(not_lattice.status.code(), Some(2));
}

#[test]
fn quick_validation_reports_every_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let out = metastab(dir.path(), &["--out", "v", "validate", "--level", "quick"]);
    let report: Value = serde_json::from_slice(&fs::read(dir.path().join("v/validation.json")).unwrap()).unwrap();
    let criteria = report["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 10);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]") || l.starts_with("[FAIL]")).count(), 10);
    let passed = report["passed"].as_bool().unwrap();
    assert_eq!(out.status.code(), Some(if passed { 0 } else { 1 }));
    assert!(!dir.path().join("v/validation-work").exists());
}
