//! Experiment configuration: flat keys plus one `[model]` table.
//!
//! ```toml
//! lambda = 2.0
//! n_list = [4, 8, 16]
//! seeds = 20
//! trials = 1000
//! time_cap = 1e6
//! master_seed = 7
//!
//! [model]
//! model = "bond"
//! d = 2
//! p = 0.7
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contact::{DEFAULT_LAMBDA, DEFAULT_TIME_CAP};
use crate::generators::ModelSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}, field `{field}`: {message}")]
    Parse { line: usize, field: String, message: String },
    #[error("field `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
}

fn default_lambda() -> f64 {
    DEFAULT_LAMBDA
}

fn default_time_cap() -> f64 {
    DEFAULT_TIME_CAP
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    pub n_list: Vec<u32>,
    #[serde(default = "one")]
    pub seeds: usize,
    #[serde(default = "one")]
    pub trials: usize,
    /// Censoring horizon; `inf` disables censoring.
    #[serde(default = "default_time_cap")]
    pub time_cap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub resume: bool,
    pub model: ModelSpec,
}

/// Line (1-based) containing byte `offset`, and the key written on it.
fn locate(text: &str, offset: usize) -> (usize, String) {
    let line = text[..offset.min(text.len())].matches('\n').count() + 1;
    let source = text.lines().nth(line - 1).unwrap_or("");
    let key = source.split('=').next().unwrap_or("").trim().trim_matches(['[', ']']).to_string();
    (line, key)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let (line, field) = e.span().map_or((0, String::new()), |s| locate(text, s.start));
            ConfigError::Parse { line, field, message: e.message().to_string() }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.to_path_buf(), message: e.to_string() })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |field, message: &str| Err(ConfigError::Invalid { field, message: message.into() });
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return invalid("lambda", "must be finite and non-negative");
        }
        if self.lambda > 0.0 && self.lambda <= crate::contact::LAMBDA_C_LINE {
            log::warn!("lambda = {} is likely at or below the critical rate of the line", self.lambda);
        }
        if self.n_list.is_empty() || self.n_list.windows(2).any(|w| w[0] >= w[1]) || self.n_list[0] == 0 {
            return invalid("n_list", "must be non-empty, positive and strictly ascending");
        }
        if self.seeds == 0 {
            return invalid("seeds", "must be at least 1");
        }
        if self.trials == 0 {
            return invalid("trials", "must be at least 1");
        }
        if !(self.time_cap > 0.0) {
            return invalid("time_cap", "must be positive");
        }
        Ok(())
    }

    /// The cap as passed to the simulator.
    pub fn cap(&self) -> Option<f64> {
        self.time_cap.is_finite().then_some(self.time_cap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SMOKE: &str = "lambda = 2.0\nn_list = [2]\nseeds = 1\ntrials = 100\n\n[model]\nmodel = \"bond\"\nd = 2\np = 1.0\n";

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_toml(SMOKE).unwrap();
        assert_eq!(cfg.model, ModelSpec::Bond { d: 2, p: 1.0 });
        assert_eq!(cfg.cap(), Some(DEFAULT_TIME_CAP));
        let uncapped = ExperimentConfig::from_toml(&SMOKE.replace("seeds", "time_cap = inf\nseeds")).unwrap();
        assert_eq!(uncapped.cap(), None);
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn errors_carry_line_and_field() {
        let bad = SMOKE.replace("trials = 100", "trials = \"many\"");
        match ExperimentConfig::from_toml(&bad) {
            Err(ConfigError::Parse { line, field, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(field, "trials");
            }
            other => panic!("{other:?}"),
        }
        let typo = SMOKE.replace("seeds", "sedes");
        assert!(matches!(ExperimentConfig::from_toml(&typo), Err(ConfigError::Parse { line: 3, .. })));
        let descending = SMOKE.replace("[2]", "[4, 2]");
        assert!(matches!(
            ExperimentConfig::from_toml(&descending),
            Err(ConfigError::Invalid { field: "n_list", .. })
        ));
    }

    fn model_strategy() -> impl Strategy<Value = ModelSpec> {
        prop_oneof![
            (1usize..4, 0.0..=1.0f64).prop_map(|(d, p)| ModelSpec::Bond { d, p }),
            (1usize..4, 0.0..=1.0f64).prop_map(|(d, p)| ModelSpec::Site { d, p }),
            (1usize..4, 0.1..3.0f64).prop_map(|(d, radius)| ModelSpec::Rgg { d, radius }),
            (-1.0..1.0f64, 2u32..5).prop_map(|(h, pad_factor)| ModelSpec::Gff { d: 3, h, pad_factor }),
            (0.0..2.0f64, proptest::option::of(16u32..40))
                .prop_map(|(u, kill_radius)| ModelSpec::RiVacant { d: 3, u, kill_radius, eq_walks: 100 }),
        ]
    }

    proptest! {
        #[test]
        fn config_round_trip(
            model in model_strategy(),
            lambda in 0.0..10.0f64,
            n_list in proptest::collection::btree_set(1u32..200, 1..5),
            seeds in 1usize..50,
            trials in 1usize..10_000,
            cap in prop_oneof![Just(f64::INFINITY), 1.0..1e8f64],
            master_seed in any::<u64>(),
            resume in any::<bool>(),
        ) {
            let cfg = ExperimentConfig {
                lambda,
                n_list: n_list.into_iter().collect(),
                seeds,
                trials,
                time_cap: cap,
                out: None,
                master_seed,
                resume,
                model,
            };
            prop_assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        }
    }
}
