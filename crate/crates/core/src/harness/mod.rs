//! Experiment orchestration: configuration, the resumable pipeline and the
//! validation battery.

mod config;
mod run;
pub mod validation;

use thiserror::Error;

pub use config::{ConfigError, ExperimentConfig};
pub use run::{
    run_experiment, summarise_run, unit_key, ManifestEntry, RunReport, RunSummary, UnitOutcome, CONFIG_FILE, MANIFEST_FILE,
    RESULTS_FILE, RESULTS_HEADER, SUMMARY_FILE,
};

use crate::generators::GenError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error("i/o: {0}")]
    Io(String),
}
