//! The contact process on a finite graph.
//!
//! Infected vertices recover at rate 1 and infect each neighbour at rate
//! `λ`. The extinction time `τ_G` is the hitting time of the all-healthy
//! state, started (by default) from full occupancy.

pub mod exact;
mod sim;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use exact::{
    dump_absorption_system, exact_expected_extinction, exact_extinction_times, ExactMethod, ExactSolution,
    MAX_EXACT_VERTICES,
};
pub use sim::{run_coupled, Layer};

use crate::graph::{Graph, VertexId};

/// Numerical literature estimate of the critical rate of the contact
/// process on the integer line. Only used to warn about subcritical runs.
pub const LAMBDA_C_LINE: f64 = 1.6494;

/// Default infection rate.
pub const DEFAULT_LAMBDA: f64 = 2.0;

/// Default censoring horizon.
pub const DEFAULT_TIME_CAP: f64 = 1e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContactError {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("initial infected set is empty")]
    EmptyInitialState,
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(VertexId),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("every one of {trials} trials was censored")]
    AllCensored { trials: usize },
    #[error("{vertices} vertices exceed the exact-solver limit {limit}")]
    TooManyVertices { vertices: usize, limit: usize },
    #[error("iterative solve did not converge in {iterations} iterations")]
    NotConverged { iterations: usize },
    #[error("solution backward error {residual:e} above tolerance")]
    ResidualTooLarge { residual: f64 },
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for ContactError {
    fn from(e: std::io::Error) -> Self {
        ContactError::Io(e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    Full,
    Set(Vec<VertexId>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContactConfig {
    pub lambda: f64,
    pub initial: InitialState,
    pub time_cap: Option<f64>,
}

impl ContactConfig {
    /// Full occupancy with the default time cap.
    pub fn new(lambda: f64) -> Self {
        ContactConfig { lambda, initial: InitialState::Full, time_cap: Some(DEFAULT_TIME_CAP) }
    }

    pub fn with_time_cap(mut self, cap: Option<f64>) -> Self {
        self.time_cap = cap;
        self
    }

    pub fn with_initial(mut self, initial: InitialState) -> Self {
        self.initial = initial;
        self
    }

    fn layer(&self) -> Layer {
        Layer {
            lambda: self.lambda,
            members: None,
            initial: match &self.initial {
                InitialState::Full => None,
                InitialState::Set(vs) => Some(vs.clone()),
            },
        }
    }
}

/// Where a trial's randomness came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPath {
    pub master: u64,
    pub trial: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialOutcome {
    /// Extinction time, or the time cap when censored.
    pub tau: f64,
    pub censored: bool,
    /// Infections plus recoveries realised in this copy.
    pub events: u64,
    pub seed_path: SeedPath,
}

fn warn_if_disconnected(g: &Graph) {
    if !g.is_empty() && !g.is_connected() {
        log::warn!("contact process run on a disconnected graph");
    }
}

/// One extinction time, exact in distribution.
pub fn simulate_extinction(g: &Graph, cfg: &ContactConfig, seed: SeedPath) -> Result<TrialOutcome, ContactError> {
    let mut out = run_coupled(g, &[cfg.layer()], seed, cfg.time_cap)?;
    Ok(out.pop().expect("one layer"))
}

/// One realisation read at several infection rates. Extinction times are
/// nondecreasing in `λ` on every realisation.
pub fn coupled_simulate(
    g: &Graph,
    lambdas: &[f64],
    seed: SeedPath,
    time_cap: Option<f64>,
) -> Result<Vec<TrialOutcome>, ContactError> {
    if lambdas.is_empty() || lambdas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ContactError::InvalidConfig("rates must be non-empty and strictly ascending".into()));
    }
    if lambdas[0] <= 0.0 {
        return Err(ContactError::InvalidConfig("coupled rates must be positive".into()));
    }
    let layers: Vec<Layer> = lambdas.iter().map(|&l| Layer::full(l)).collect();
    run_coupled(g, &layers, seed, time_cap)
}

/// Outcome on `G` and on each induced subgraph, all from one realisation.
#[derive(Clone, Debug, PartialEq)]
pub struct SubgraphCoupling {
    pub full: TrialOutcome,
    pub parts: Vec<TrialOutcome>,
}

/// Run `G` and the subgraphs induced by `subsets` on one realisation;
/// `τ_{G'} ≤ τ_G` holds pathwise for each part.
pub fn coupled_subgraph_simulate(
    g: &Graph,
    lambda: f64,
    subsets: &[Vec<VertexId>],
    seed: SeedPath,
    time_cap: Option<f64>,
) -> Result<SubgraphCoupling, ContactError> {
    let mut layers = vec![Layer::full(lambda)];
    layers.extend(subsets.iter().map(|s| Layer::induced(lambda, s.clone())));
    let mut out = run_coupled(g, &layers, seed, time_cap)?;
    let full = out.remove(0);
    Ok(SubgraphCoupling { full, parts: out })
}

/// Trials `0..trials` with seed paths `(master_seed, i)`, in index order.
pub fn run_trials(
    g: &Graph,
    cfg: &ContactConfig,
    trials: usize,
    master_seed: u64,
) -> Result<Vec<TrialOutcome>, ContactError> {
    warn_if_disconnected(g);
    (0..trials as u64)
        .into_par_iter()
        .map(|trial| simulate_extinction(g, cfg, SeedPath { master: master_seed, trial }))
        .collect()
}

/// Mean extinction time over uncensored trials.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtinctionEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub censored: usize,
    pub trials: usize,
    /// Uncensored extinction times in trial order.
    pub samples: Vec<f64>,
}

impl ExtinctionEstimate {
    pub fn from_outcomes(outcomes: &[TrialOutcome]) -> Result<Self, ContactError> {
        let samples: Vec<f64> = outcomes.iter().filter(|o| !o.censored).map(|o| o.tau).collect();
        let censored = outcomes.len() - samples.len();
        if samples.is_empty() {
            return Err(ContactError::AllCensored { trials: outcomes.len() });
        }
        let k = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / k;
        let std_error = if samples.len() > 1 {
            (samples.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt()
        } else {
            0.0
        };
        Ok(ExtinctionEstimate { mean, std_error, censored, trials: outcomes.len(), samples })
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.trials as f64
    }
}

/// `Ê[τ_G]` with standard error; aggregation is by trial index, so the
/// result does not depend on the worker count.
pub fn estimate_mean_extinction(
    g: &Graph,
    cfg: &ContactConfig,
    trials: usize,
    master_seed: u64,
) -> Result<ExtinctionEstimate, ContactError> {
    if trials == 0 {
        return Err(ContactError::InvalidConfig("at least one trial is required".into()));
    }
    ExtinctionEstimate::from_outcomes(&run_trials(g, cfg, trials, master_seed)?)
}

/// CSV dump `trial_index,tau,censored,events`.
pub fn write_trial_dump<W: Write>(outcomes: &[TrialOutcome], w: W) -> Result<(), ContactError> {
    let mut out = csv::Writer::from_writer(w);
    let io = |e: csv::Error| ContactError::Io(e.to_string());
    out.write_record(["trial_index", "tau", "censored", "events"]).map_err(io)?;
    for o in outcomes {
        out.write_record([
            o.seed_path.trial.to_string(),
            o.tau.to_string(),
            o.censored.to_string(),
            o.events.to_string(),
        ])
        .map_err(io)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seed(trial: u64) -> SeedPath {
        SeedPath { master: 17, trial }
    }

    #[test]
    fn single_vertex_dies_by_recovery() {
        let g = Graph::path(1);
        let o = simulate_extinction(&g, &ContactConfig::new(5.0), seed(0)).unwrap();
        assert!(!o.censored);
        assert_eq!(o.events, 1);
    }

    #[test]
    fn errors() {
        assert_eq!(
            simulate_extinction(&Graph::empty(), &ContactConfig::new(1.0), seed(0)),
            Err(ContactError::EmptyGraph)
        );
        let cfg = ContactConfig::new(1.0).with_initial(InitialState::Set(vec![]));
        assert_eq!(simulate_extinction(&Graph::path(2), &cfg, seed(0)), Err(ContactError::EmptyInitialState));
        assert!(coupled_simulate(&Graph::path(2), &[2.0, 0.5], seed(0), None).is_err());
        let tiny = ContactConfig::new(1.0).with_time_cap(Some(1e-12));
        assert_eq!(
            estimate_mean_extinction(&Graph::path(3), &tiny, 50, 1),
            Err(ContactError::AllCensored { trials: 50 })
        );
    }

    #[test]
    fn single_rate_coupling_equals_plain_simulation() {
        let g = Graph::cycle(5);
        for t in 0..50 {
            let plain = simulate_extinction(&g, &ContactConfig::new(1.5).with_time_cap(None), seed(t)).unwrap();
            let coupled = coupled_simulate(&g, &[1.5], seed(t), None).unwrap();
            assert_eq!(coupled, vec![plain]);
        }
    }

    #[test]
    fn censoring_reports_cap() {
        let g = Graph::complete(8);
        let o = simulate_extinction(&g, &ContactConfig::new(10.0).with_time_cap(Some(5.0)), seed(1)).unwrap();
        assert!(o.censored);
        assert_eq!(o.tau, 5.0);
    }

    #[test]
    fn results_are_schedule_independent() {
        let g = Graph::star(4);
        let cfg = ContactConfig::new(2.0);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| estimate_mean_extinction(&g, &cfg, 500, 3)).unwrap();
        let b = many.install(|| estimate_mean_extinction(&g, &cfg, 500, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn explicit_initial_set() {
        let g = Graph::path(4);
        let cfg = ContactConfig::new(0.0).with_initial(InitialState::Set(vec![2]));
        let o = simulate_extinction(&g, &cfg, seed(0)).unwrap();
        assert_eq!(o.events, 1);
    }

    #[test]
    fn trial_dump_format() {
        let outcomes = run_trials(&Graph::path(2), &ContactConfig::new(1.0), 2, 5).unwrap();
        let mut buf = Vec::new();
        write_trial_dump(&outcomes, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("trial_index,tau,censored,events\n0,"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn monte_carlo_matches_exact_mean() {
        for (g, lambda) in [(Graph::path(2), 2.0), (Graph::path(3), 0.0), (Graph::cycle(4), 1.0)] {
            let exact = exact_expected_extinction(&g, lambda).unwrap();
            let est = estimate_mean_extinction(&g, &ContactConfig::new(lambda), 20_000, 11).unwrap();
            assert!((est.mean - exact).abs() < 4.0 * est.std_error, "{} vs {exact}", est.mean);
        }
    }

    #[test]
    fn rate_coupling_is_monotone() {
        let g = Graph::cycle(6);
        for t in 0..200 {
            let out = coupled_simulate(&g, &[0.5, 1.0, 2.0], seed(t), None).unwrap();
            assert!(out.windows(2).all(|w| w[0].tau <= w[1].tau));
        }
    }

    #[test]
    fn subgraph_coupling_is_dominated() {
        let g = Graph::path(6);
        let parts = vec![vec![0, 1, 2], vec![3, 4, 5]];
        for t in 0..200 {
            let c = coupled_subgraph_simulate(&g, 1.5, &parts, seed(t), None).unwrap();
            assert!(c.parts.iter().all(|p| p.tau <= c.full.tau));
        }
    }
}
