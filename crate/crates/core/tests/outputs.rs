//! Schema checks on every file the pipeline and CLI write.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use metastab::contact::{run_trials, write_trial_dump, ContactConfig};
use metastab::graph::Graph;
use metastab::harness::{
    run_experiment, unit_key, ExperimentConfig, ManifestEntry, UnitOutcome, MANIFEST_FILE, RESULTS_FILE,
    RESULTS_HEADER, SUMMARY_FILE,
};
use metastab::structure::{census_over_seeds, write_census_csv};
use metastab::generators::ModelSpec;
use serde_json::Value;

const BOND: &str = "lambda = 2.0\nn_list = [1, 2, 3]\nseeds = 3\ntrials = 40\ntime_cap = 1e4\nmaster_seed = 5\n\n\
                    [model]\nmodel = \"bond\"\nd = 2\np = 0.4\n";
const TREES: &str = "lambda = 1.0\nn_list = [2, 3, 4]\nseeds = 3\ntrials = 40\nmaster_seed = 5\n\n\
                     [model]\nmodel = \"gw\"\nnu = \"0:0.25,1:0.25,2:0.5\"\n";

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().expect("object").keys().cloned().collect()
}

fn set(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn rows(path: &Path) -> (Vec<String>, Vec<csv::StringRecord>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    (header, r.records().map(Result::unwrap).collect())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn results_csv_matches_header_and_normalisations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml(BOND).unwrap();
    run_experiment(&cfg, dir.path(), 2).unwrap();
    let (header, records) = rows(&dir.path().join(RESULTS_FILE));
    assert_eq!(header, RESULTS_HEADER);
    assert_eq!(records.len(), 9);
    for row in &records {
        let f = |i: usize| row[i].parse::<f64>().unwrap();
        assert_eq!(&row[0], "bond");
        assert_eq!(&row[1], "d=2;p=0.4");
        let n: u32 = row[2].parse().unwrap();
        let graph_size: usize = row[3].parse().unwrap();
        assert!(graph_size >= 1);
        assert_eq!(f(4), (2.0 * n as f64).powi(2));
        assert!(f(5) > 0.0 && f(6) >= 0.0);
        assert!(close(f(7), f(5).ln()));
        assert!(close(f(8), f(7) / graph_size as f64));
        // X_box normalises by n^d; box_size is |B_n| = (2n)^d.
        assert!(close(f(9), f(7) / (n as f64).powi(2)));
        assert!((0.0..=1.0).contains(&f(10)));
        row[11].parse::<u64>().unwrap();
    }
}

#[test]
fn summary_json_carries_the_rate_estimate_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml(BOND).unwrap();
    run_experiment(&cfg, dir.path(), 1).unwrap();
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap()).unwrap();
    assert_eq!(
        keys(&summary),
        set(&[
            "model", "params", "lambda", "n_list", "seeds", "trials", "time_cap", "master_seed", "units", "records",
            "empty_units", "failed_units", "unusable_records", "theta", "rate", "rate_error", "x_plateau",
        ])
    );
    let rate = &summary["rate"];
    assert_eq!(
        keys(rate),
        set(&[
            "gamma_tilde", "gamma_tilde_ci", "theta", "m", "gamma", "per_n", "relative_increments",
            "asymptote_not_reached",
        ])
    );
    assert_eq!(rate["asymptote_not_reached"], Value::Bool(true));
    assert_eq!(rate["per_n"].as_array().unwrap().len(), 3);
    assert_eq!(rate["relative_increments"].as_array().unwrap().len(), 2);
    let theta = rate["theta"].as_f64().unwrap();
    let gamma = rate["gamma"].as_f64().unwrap();
    assert!(close(gamma, rate["gamma_tilde"].as_f64().unwrap() / theta));
    assert!(close(theta, summary["theta"]["theta"].as_f64().unwrap()));
}

#[test]
fn manifest_lines_are_keyed_entries() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml(BOND).unwrap();
    run_experiment(&cfg, dir.path(), 3).unwrap();
    let text = fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
    let mut seen = BTreeSet::new();
    for line in text.lines() {
        let entry: ManifestEntry = serde_json::from_str(line).unwrap();
        assert_eq!(entry.key, unit_key(&cfg, entry.n, entry.index));
        assert_eq!(entry.key.len(), 64);
        assert!(matches!(entry.outcome, UnitOutcome::Done { .. }));
        assert!(seen.insert((entry.n, entry.index)));
    }
    assert_eq!(seen.len(), 9);
}

#[test]
fn tree_rows_use_generation_volume_and_tree_normalisation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml(TREES).unwrap();
    let report = run_experiment(&cfg, dir.path(), 2).unwrap();
    assert!(report.summary.rate.as_ref().unwrap().m.is_some());
    let (header, records) = rows(&dir.path().join(RESULTS_FILE));
    assert_eq!(header, RESULTS_HEADER);
    assert!(!records.is_empty());
    for row in &records {
        let f = |i: usize| row[i].parse::<f64>().unwrap();
        let n: i32 = row[2].parse().unwrap();
        let v_n: f64 = (0..=n).map(|k| 1.25f64.powi(k)).sum();
        assert!(close(f(4), v_n));
        // Y = log Ê / m^n in the X_box column.
        assert!(close(f(9), f(7) / 1.25f64.powi(n)));
        assert!(close(f(9) * 1.25f64.powi(n), f(8) * f(3)));
    }
}

#[test]
fn trial_dump_has_one_typed_row_per_trial() {
    let outcomes = run_trials(&Graph::cycle(4), &ContactConfig::new(1.0), 50, 3).unwrap();
    let mut buf = Vec::new();
    write_trial_dump(&outcomes, &mut buf).unwrap();
    let mut r = csv::Reader::from_reader(buf.as_slice());
    assert_eq!(r.headers().unwrap(), vec!["trial_index", "tau", "censored", "events"]);
    for (i, row) in r.records().enumerate() {
        let row = row.unwrap();
        assert_eq!(row[0].parse::<usize>().unwrap(), i);
        assert_eq!(row[1].parse::<f64>().unwrap(), outcomes[i].tau);
        assert_eq!(row[2].parse::<bool>().unwrap(), outcomes[i].censored);
        assert_eq!(row[3].parse::<u64>().unwrap(), outcomes[i].events);
    }
}

#[test]
fn census_csv_lists_ranked_components() {
    let reports = census_over_seeds(&ModelSpec::Bond { d: 2, p: 0.6 }, 8, 0.5, 4, 1).unwrap();
    let mut buf = Vec::new();
    write_census_csv(&reports, &mut buf).unwrap();
    let mut r = csv::Reader::from_reader(buf.as_slice());
    assert_eq!(r.headers().unwrap(), vec!["seed", "n", "component_rank", "size", "diameter", "in_boundary_shell"]);
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), reports.iter().map(|(_, c)| c.rows.len()).sum::<usize>());
    let mut total = 0;
    for row in &rows {
        row[0].parse::<u64>().unwrap();
        assert_eq!(&row[1], "8");
        row[2].parse::<usize>().unwrap();
        total += row[3].parse::<usize>().unwrap();
        row[4].parse::<f64>().unwrap();
        row[5].parse::<bool>().unwrap();
    }
    // Every site of B_8 appears in exactly one component.
    assert_eq!(total, 4 * 256);
}
