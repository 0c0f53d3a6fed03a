use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use metastab::contact::{
    dump_absorption_system, exact_expected_extinction, run_trials, write_trial_dump, ContactConfig,
    ExtinctionEstimate,
};
use metastab::graph::{read_graph, write_graph};
use metastab::harness::validation::{validate_suite_with, Level};
use metastab::harness::{run_experiment, summarise_run, ConfigError, ExperimentConfig, HarnessError};
use metastab::rng::unit_seed;
use metastab::structure::{census_over_seeds, write_census_csv, StructureError};

#[derive(Parser)]
#[command(name = "metastab", version, about = "Contact process extinction times on random graphs")]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "METASTAB_OUT")]
    out: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of available cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Skip units already in the manifest.
    #[arg(long, global = true)]
    resume: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one graph of the configured model and write it as text.
    Generate {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        index: u64,
    },
    /// Estimate the mean extinction time on a graph file.
    Simulate {
        graph: PathBuf,
        #[arg(long, default_value_t = metastab::contact::DEFAULT_LAMBDA)]
        lambda: f64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Censoring horizon; `inf` disables censoring.
        #[arg(long, default_value_t = metastab::contact::DEFAULT_TIME_CAP)]
        time_cap: f64,
        /// Also solve for the exact expected extinction time.
        #[arg(long)]
        exact: bool,
        /// Write the absorption system in coordinate format.
        #[arg(long, value_name = "PATH")]
        dump_system: Option<PathBuf>,
        /// Write per-trial outcomes as CSV.
        #[arg(long, value_name = "PATH")]
        dump_trials: Option<PathBuf>,
    },
    /// Recompute the summary of a run directory from its journal.
    Estimate { dir: Option<PathBuf> },
    /// Component census of the configured lattice model over the config seeds.
    Census {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
    },
    /// Run the full pipeline.
    Run,
    /// Run the acceptance battery.
    Validate {
        #[arg(long, value_enum, default_value_t = Level::Quick)]
        level: Level,
    },
}

enum Failure {
    Config(String),
    Other(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(c) => Failure::Config(c.to_string()),
            other => Failure::Other(other.to_string()),
        }
    }
}

fn other(e: impl std::fmt::Display) -> Failure {
    Failure::Other(e.to_string())
}

impl Cli {
    fn load_config(&self) -> Result<ExperimentConfig, Failure> {
        let path = self.config.as_ref().ok_or_else(|| Failure::Config("--config is required".into()))?;
        let mut cfg = ExperimentConfig::load(path)?;
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        cfg.resume |= self.resume;
        Ok(cfg)
    }

    fn out_dir(&self, cfg: Option<&ExperimentConfig>) -> PathBuf {
        self.out.clone().or_else(|| cfg.and_then(|c| c.out.clone())).unwrap_or_else(|| PathBuf::from("metastab-out"))
    }

    fn workers(&self) -> usize {
        self.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(other)?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| other(format!("{}: {e}", path.display())))
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serialisable"));
}

fn execute(cli: &Cli) -> Result<bool, Failure> {
    match &cli.command {
        Command::Generate { n, index } => {
            let cfg = cli.load_config()?;
            let seed = unit_seed(cfg.master_seed, *n as u64, *index);
            let generated = cfg.model.prepare(*n, cfg.master_seed).and_then(|m| m.sample(seed)).map_err(other)?;
            let path = cli.out_dir(Some(&cfg)).join(format!("graph-{}-n{n}-{index}.txt", cfg.model.name()));
            let mut w = create(&path)?;
            write_graph(&generated.graph, &mut w).and_then(|_| w.flush()).map_err(other)?;
            println!("{}", path.display());
        }
        Command::Simulate { graph, lambda, trials, time_cap, exact, dump_system, dump_trials } => {
            let file = File::open(graph).map_err(|e| other(format!("{}: {e}", graph.display())))?;
            let g = read_graph(BufReader::new(file)).map_err(other)?;
            let cap = time_cap.is_finite().then_some(*time_cap);
            let cfg = ContactConfig::new(*lambda).with_time_cap(cap);
            let outcomes = run_trials(&g, &cfg, *trials, cli.seed.unwrap_or(0)).map_err(other)?;
            if let Some(path) = dump_trials {
                write_trial_dump(&outcomes, create(path)?).map_err(other)?;
            }
            if let Some(path) = dump_system {
                dump_absorption_system(&g, *lambda, create(path)?).map_err(other)?;
            }
            let est = ExtinctionEstimate::from_outcomes(&outcomes).map_err(other)?;
            let exact_value = if *exact { Some(exact_expected_extinction(&g, *lambda).map_err(other)?) } else { None };
            print_json(&json!({
                "vertices": g.vertex_count(),
                "edges": g.edge_count(),
                "lambda": lambda,
                "trials": est.trials,
                "censored": est.censored,
                "mean_tau": est.mean,
                "se": est.std_error,
                "log_mean": est.mean.ln(),
                "exact": exact_value,
            }));
        }
        Command::Estimate { dir } => {
            let dir = dir.clone().unwrap_or_else(|| cli.out_dir(None));
            print_json(&summarise_run(&dir)?);
        }
        Command::Census { n, epsilon } => {
            let cfg = cli.load_config()?;
            let reports = census_over_seeds(&cfg.model, *n, *epsilon, cfg.seeds, cfg.master_seed).map_err(|e| match e {
                StructureError::NotLattice(_) | StructureError::BadEpsilon(_) | StructureError::BadScale(_) => {
                    Failure::Config(e.to_string())
                }
                e => other(e),
            })?;
            let dir = cli.out_dir(Some(&cfg));
            write_census_csv(&reports, create(&dir.join("census.csv"))?).map_err(other)?;
            let passed = reports.iter().filter(|(_, r)| r.passes()).count();
            let summary = json!({
                "model": cfg.model.name(),
                "params": cfg.model.params_string(),
                "n": n,
                "epsilon": epsilon,
                "seeds": reports.len(),
                "unique_giant": reports.iter().filter(|(_, r)| r.verdict_unique_giant).count(),
                "others_small_or_in_shell": reports.iter().filter(|(_, r)| r.verdict_others).count(),
                "both": passed,
                "fraction": passed as f64 / reports.len() as f64,
            });
            let mut w = create(&dir.join("census-summary.json"))?;
            writeln!(w, "{}", serde_json::to_string_pretty(&summary).expect("json")).map_err(other)?;
            print_json(&summary);
        }
        Command::Run => {
            let cfg = cli.load_config()?;
            let dir = cli.out_dir(Some(&cfg));
            let report = run_experiment(&cfg, &dir, cli.workers())?;
            eprintln!("{} units computed, {} reused, outputs in {}", report.computed, report.reused, dir.display());
            print_json(&report.summary);
        }
        Command::Validate { level } => {
            let dir = cli.out_dir(None);
            fs::create_dir_all(&dir).map_err(other)?;
            let work = dir.join("validation-work");
            let report = validate_suite_with(*level, &work, |c| println!("{}", c.line()));
            let _ = fs::remove_dir_all(&work);
            let mut w = create(&dir.join("validation.json"))?;
            writeln!(w, "{}", serde_json::to_string_pretty(&report).expect("json")).map_err(other)?;
            return Ok(report.passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build_global();
    }
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
