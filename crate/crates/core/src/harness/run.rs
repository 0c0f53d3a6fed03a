//! The full pipeline over `(n, seed index)` units with a resumable journal.
//!
//! Each unit samples a graph, keeps its maximal component, estimates the
//! mean extinction time and normalises it. Completed units are appended to
//! `manifest.jsonl` by a single writer thread, keyed by a SHA-256 hash of
//! everything that determines the unit. `results.csv` and `summary.json`
//! are rebuilt from the journal in `(n, index)` order, so they do not
//! depend on the worker count or on how many runs it took to finish.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ExperimentConfig, HarnessError};
use crate::contact::{estimate_mean_extinction, ContactConfig};
use crate::estimators::{compute_record, estimate_theta, gamma_trend, Family, RateEstimate, Record, ThetaEstimate};
use crate::generators::{ModelSpec, PreparedModel};
use crate::graph::{induced_subgraph, maximal_component};
use crate::rng::{mix_seed, unit_seed, StreamRole};

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CONFIG_FILE: &str = "config.toml";

pub const RESULTS_HEADER: [&str; 12] = [
    "model",
    "params",
    "n",
    "graph_size",
    "box_size",
    "mean_tau",
    "se",
    "log_mean",
    "X",
    "X_box",
    "censored_frac",
    "seed",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum UnitOutcome {
    Done { record: Record },
    /// The sampled graph had no vertices.
    Empty,
    Failed { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub key: String,
    pub n: u32,
    pub index: u64,
    pub seed: u64,
    pub outcome: UnitOutcome,
}

#[derive(Serialize)]
struct UnitKey<'a> {
    model: &'a ModelSpec,
    lambda: f64,
    trials: usize,
    time_cap: Option<f64>,
    master_seed: u64,
    n: u32,
    index: u64,
}

/// Content hash of everything that determines one unit.
pub fn unit_key(cfg: &ExperimentConfig, n: u32, index: u64) -> String {
    let key = UnitKey {
        model: &cfg.model,
        lambda: cfg.lambda,
        trials: cfg.trials,
        time_cap: cfg.cap(),
        master_seed: cfg.master_seed,
        n,
        index,
    };
    let bytes = serde_json::to_vec(&key).expect("key serialises");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub model: String,
    pub params: String,
    pub lambda: f64,
    pub n_list: Vec<u32>,
    pub seeds: usize,
    pub trials: usize,
    pub time_cap: Option<f64>,
    pub master_seed: u64,
    pub units: usize,
    pub records: usize,
    pub empty_units: usize,
    pub failed_units: usize,
    pub unusable_records: usize,
    pub theta: Option<ThetaEstimate>,
    pub rate: Option<RateEstimate>,
    pub rate_error: Option<String>,
    /// Mean of `log Ê / |G_n|` at the largest scale.
    pub x_plateau: Option<f64>,
}

/// What a call to [`run_experiment`] did.
#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub computed: usize,
    pub reused: usize,
    pub summary: RunSummary,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> HarnessError + '_ {
    move |e| HarnessError::Io(format!("{}: {e}", path.display()))
}

fn load_manifest(path: &Path) -> Result<HashMap<String, ManifestEntry>, HarnessError> {
    let mut done = HashMap::new();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(done),
        Err(e) => return Err(io_err(path)(e)),
    };
    let mut kept = Vec::new();
    let mut torn = false;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        match serde_json::from_str::<ManifestEntry>(&line) {
            Ok(entry) => {
                done.insert(entry.key.clone(), entry);
                kept.push(line);
            }
            // A run interrupted mid-write leaves a torn last line; that unit is redone.
            Err(e) => {
                log::warn!("ignoring manifest line {}: {e}", i + 1);
                torn = true;
            }
        }
    }
    if torn {
        let clean: String = kept.iter().map(|l| format!("{l}\n")).collect();
        fs::write(path, clean).map_err(io_err(path))?;
    }
    Ok(done)
}

fn run_unit(cfg: &ExperimentConfig, model: &PreparedModel, n: u32, index: u64) -> ManifestEntry {
    let seed = unit_seed(cfg.master_seed, n as u64, index);
    let key = unit_key(cfg, n, index);
    let outcome = (|| {
        let gen = match model.sample(seed) {
            Ok(g) => g,
            Err(e) => return UnitOutcome::Failed { reason: e.to_string() },
        };
        let Ok(comp) = maximal_component(&gen.graph) else { return UnitOutcome::Empty };
        let graph = induced_subgraph(&gen.graph, &comp.vertices).expect("component vertices are valid");
        let contact = ContactConfig::new(cfg.lambda).with_time_cap(cfg.cap());
        let contact_seed = mix_seed(seed, 0, StreamRole::Contact);
        // All-censored units are kept as failures; the journal still marks them complete.
        let est = match estimate_mean_extinction(&graph, &contact, cfg.trials, contact_seed) {
            Ok(est) => est,
            Err(e) => return UnitOutcome::Failed { reason: e.to_string() },
        };
        match compute_record(&graph, &est, &gen.normalizer, seed) {
            Ok(record) => UnitOutcome::Done { record },
            Err(e) => UnitOutcome::Failed { reason: e.to_string() },
        }
    })();
    ManifestEntry { key, n, index, seed, outcome }
}

/// Run (or resume) an experiment into `out_dir` with `workers` threads.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path, workers: usize) -> Result<RunReport, HarnessError> {
    cfg.validate()?;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let config_path = out_dir.join(CONFIG_FILE);
    fs::write(&config_path, cfg.to_toml()).map_err(io_err(&config_path))?;

    let manifest_path = out_dir.join(MANIFEST_FILE);
    if !cfg.resume && manifest_path.exists() {
        fs::remove_file(&manifest_path).map_err(io_err(&manifest_path))?;
    }
    let mut done = load_manifest(&manifest_path)?;

    let units: Vec<(u32, u64)> =
        cfg.n_list.iter().flat_map(|&n| (0..cfg.seeds as u64).map(move |i| (n, i))).collect();
    let pending: Vec<(u32, u64)> =
        units.iter().copied().filter(|&(n, i)| !done.contains_key(&unit_key(cfg, n, i))).collect();
    let reused = units.len() - pending.len();

    let manifest = OpenOptions::new().create(true).append(true).open(&manifest_path).map_err(io_err(&manifest_path))?;
    let (tx, rx) = mpsc::channel::<ManifestEntry>();
    let writer = std::thread::spawn(move || -> std::io::Result<Vec<ManifestEntry>> {
        let mut manifest = manifest;
        let mut written = Vec::new();
        for entry in rx {
            let line = serde_json::to_string(&entry).expect("entry serialises");
            writeln!(manifest, "{line}")?;
            manifest.flush()?;
            written.push(entry);
        }
        Ok(written)
    });

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Io(e.to_string()))?;
    let computed = pending.len();
    let outcome = pool.install(|| -> Result<(), HarnessError> {
        for &n in &cfg.n_list {
            let at_n: Vec<u64> = pending.iter().filter(|u| u.0 == n).map(|u| u.1).collect();
            if at_n.is_empty() {
                continue;
            }
            let model = cfg.model.prepare(n, cfg.master_seed)?;
            at_n.par_iter().for_each_with(tx.clone(), |tx, &i| {
                // The receiver lives until every sender is gone.
                let _ = tx.send(run_unit(cfg, &model, n, i));
            });
        }
        Ok(())
    });
    drop(tx);
    let written = writer.join().expect("writer thread").map_err(io_err(&manifest_path))?;
    outcome?;
    for entry in written {
        done.insert(entry.key.clone(), entry);
    }

    let entries: Vec<&ManifestEntry> = units.iter().map(|&(n, i)| &done[&unit_key(cfg, n, i)]).collect();
    write_results(cfg, &entries, &out_dir.join(RESULTS_FILE))?;
    let summary = summarise(cfg, &entries);
    let summary_path = out_dir.join(SUMMARY_FILE);
    let json = serde_json::to_string_pretty(&summary).expect("summary serialises");
    fs::write(&summary_path, json + "\n").map_err(io_err(&summary_path))?;
    Ok(RunReport { out_dir: out_dir.to_path_buf(), computed, reused, summary })
}

/// Recompute the summary of an existing run directory from its config and
/// journal; units missing from the journal are left out.
pub fn summarise_run(out_dir: &Path) -> Result<RunSummary, HarnessError> {
    let cfg = ExperimentConfig::load(&out_dir.join(CONFIG_FILE))?;
    let done = load_manifest(&out_dir.join(MANIFEST_FILE))?;
    let entries: Vec<&ManifestEntry> = cfg
        .n_list
        .iter()
        .flat_map(|&n| (0..cfg.seeds as u64).map(move |i| (n, i)))
        .filter_map(|(n, i)| done.get(&unit_key(&cfg, n, i)))
        .collect();
    Ok(summarise(&cfg, &entries))
}

/// One results row per completed unit, in `(n, index)` order.
fn write_results(cfg: &ExperimentConfig, entries: &[&ManifestEntry], path: &Path) -> Result<(), HarnessError> {
    let csv_err = |e: csv::Error| HarnessError::Io(format!("{}: {e}", path.display()));
    let mut out = csv::Writer::from_path(path).map_err(csv_err)?;
    out.write_record(RESULTS_HEADER).map_err(csv_err)?;
    let (model, params) = (cfg.model.name(), cfg.model.params_string());
    for entry in entries {
        let UnitOutcome::Done { record } = &entry.outcome else { continue };
        // Trees use v_n for the box size and Y for the box normalisation.
        let (graph_size, box_size, mean_tau, se, log_mean, x, x_box, censored) = match record {
            Record::Box(r) => (r.graph_size, r.box_size, r.mean_tau, r.se, r.log_mean, r.x, r.x_box, r.censored_frac),
            Record::Gw(r) => (r.graph_size, r.v_n, r.mean_tau, r.se, r.log_mean, r.x, r.y, r.censored_frac),
        };
        out.write_record([
            model.to_string(),
            params.clone(),
            entry.n.to_string(),
            graph_size.to_string(),
            box_size.to_string(),
            mean_tau.to_string(),
            se.to_string(),
            log_mean.to_string(),
            x.to_string(),
            x_box.to_string(),
            censored.to_string(),
            entry.seed.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush().map_err(|e| HarnessError::Io(e.to_string()))?;
    Ok(())
}

fn summarise(cfg: &ExperimentConfig, entries: &[&ManifestEntry]) -> RunSummary {
    let records: Vec<&Record> = entries
        .iter()
        .filter_map(|e| match &e.outcome {
            UnitOutcome::Done { record } => Some(record),
            _ => None,
        })
        .collect();
    let count = |f: fn(&UnitOutcome) -> bool| entries.iter().filter(|e| f(&e.outcome)).count();
    let unusable_records = records
        .iter()
        .filter(|r| match r {
            Record::Box(r) => !r.usable,
            Record::Gw(r) => !r.usable,
        })
        .count();

    let mut theta = None;
    let family = match &cfg.model {
        ModelSpec::Gw { nu, .. } => Ok(Family::GaltonWatson { m: nu.mean() }),
        _ => {
            let samples: Vec<(u32, f64, f64)> = records
                .iter()
                .filter_map(|r| match r {
                    Record::Box(r) => Some((r.n, r.graph_size as f64, r.box_size)),
                    Record::Gw(_) => None,
                })
                .collect();
            match estimate_theta(&samples) {
                Ok(t) => {
                    let fam = Family::Lattice { theta: t.theta };
                    theta = Some(t);
                    Ok(fam)
                }
                Err(e) => Err(e),
            }
        }
    };
    let owned: Vec<Record> = records.iter().map(|r| (*r).clone()).collect();
    let (rate, rate_error) = match family.and_then(|f| gamma_trend(&owned, f)) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let x_plateau = records.iter().map(|r| r.n()).max().map(|top| {
        let xs: Vec<f64> = records
            .iter()
            .filter(|r| r.n() == top)
            .map(|r| match r {
                Record::Box(r) => r.x,
                Record::Gw(r) => r.x,
            })
            .collect();
        xs.iter().sum::<f64>() / xs.len() as f64
    });

    RunSummary {
        model: cfg.model.name().to_string(),
        params: cfg.model.params_string(),
        lambda: cfg.lambda,
        n_list: cfg.n_list.clone(),
        seeds: cfg.seeds,
        trials: cfg.trials,
        time_cap: cfg.cap(),
        master_seed: cfg.master_seed,
        units: entries.len(),
        records: records.len(),
        empty_units: count(|o| matches!(o, UnitOutcome::Empty)),
        failed_units: count(|o| matches!(o, UnitOutcome::Failed { .. })),
        unusable_records,
        theta,
        rate,
        rate_error,
        x_plateau,
    }
}
