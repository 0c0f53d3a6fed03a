//! Normalised extinction statistics, rate constants and inequality checks.
//!
//! A per-graph mean extinction time `Ê[τ | G_n]` becomes a record carrying
//! both normalisations: `X = log Ê / |G_n|` and `X_box = log Ê / n^d` for box
//! models, `Y = log Ê / m^n` for Galton-Watson trees.

mod inequalities;
mod trend;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use inequalities::{
    supermult_check, supermult_exact, tail_bound_check, upper_bound_check, SupermultReport, TailBoundReport,
    TailPoint, UpperBoundReport,
};
pub use trend::{gamma_trend, Family, RateEstimate, ScalePoint, ScaleValue, TrendPoint};

use crate::contact::{ContactError, ExtinctionEstimate};
use crate::generators::{Conditioning, GwRecord, Normalizer};
use crate::graph::{Graph, VertexId};
use crate::rng::{stream, StreamRole};

/// Above this `se / mean` the delta-method interval is replaced by a
/// bootstrap.
pub const DELTA_METHOD_LIMIT: f64 = 0.3;
pub const BOOTSTRAP_RESAMPLES: usize = 1000;
/// Records with more censoring than this are kept but marked unusable.
pub const MAX_CENSORED_FRACTION: f64 = 0.5;
/// Asymptotic 1% critical value of `√k · D_k` for the one-sample KS test.
pub const KS_CRITICAL_1PCT: f64 = 1.628;

const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("mean extinction time {0} is not positive")]
    NonpositiveMean(f64),
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("need records at {needed} or more scales, got {got}")]
    TooFewScales { needed: usize, got: usize },
    #[error("censored fraction {fraction} at n = {n} is at least one half")]
    CensoringTooHigh { n: u32, fraction: f64 },
    #[error("vertex {0} appears in more than one subgraph")]
    NotDisjoint(VertexId),
    #[error("vertex {0} is not in the graph")]
    NotSubgraph(VertexId),
    #[error("subgraph {0} is empty or disconnected")]
    NotConnected(usize),
    #[error(transparent)]
    Contact(#[from] ContactError),
}

/// Record for a graph sampled inside a box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub n: u32,
    pub graph_size: usize,
    /// `|B_n|`, sites or volume.
    pub box_size: f64,
    pub mean_tau: f64,
    pub se: f64,
    pub log_mean: f64,
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "X_box")]
    pub x_box: f64,
    /// 95% interval on `log_mean`.
    pub ci: (f64, f64),
    pub censored_frac: f64,
    pub usable: bool,
    pub seed: u64,
}

/// Record for a Galton-Watson tree grown to generation `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GwEstimateRecord {
    pub n: u32,
    pub graph_size: usize,
    pub z_n: u64,
    pub m: f64,
    pub v_n: f64,
    pub w_proxy: f64,
    pub mean_tau: f64,
    pub se: f64,
    pub log_mean: f64,
    #[serde(rename = "Y")]
    pub y: f64,
    #[serde(rename = "X")]
    pub x: f64,
    pub ci: (f64, f64),
    pub censored_frac: f64,
    pub usable: bool,
    pub conditioning: Conditioning,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Record {
    Box(EstimateRecord),
    Gw(GwEstimateRecord),
}

impl Record {
    pub fn n(&self) -> u32 {
        match self {
            Record::Box(r) => r.n,
            Record::Gw(r) => r.n,
        }
    }

    pub fn log_mean(&self) -> f64 {
        match self {
            Record::Box(r) => r.log_mean,
            Record::Gw(r) => r.log_mean,
        }
    }
}

/// 95% interval on `log Ê`: delta method while `se/mean` is below
/// [`DELTA_METHOD_LIMIT`], otherwise a percentile bootstrap over the
/// uncensored samples keyed by `seed`.
pub fn log_mean_interval(est: &ExtinctionEstimate, seed: u64) -> (f64, f64) {
    let log_mean = est.mean.ln();
    let rel = est.std_error / est.mean;
    if rel < DELTA_METHOD_LIMIT || est.samples.len() < 2 {
        return (log_mean - Z95 * rel, log_mean + Z95 * rel);
    }
    let k = est.samples.len();
    let mut rng = stream(seed, 0, StreamRole::Bootstrap);
    let mut logs: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let total: f64 = (0..k).map(|_| est.samples[rng.random_range(0..k)]).sum();
            (total / k as f64).ln()
        })
        .collect();
    logs.sort_by(f64::total_cmp);
    let at = |q: f64| logs[((q * BOOTSTRAP_RESAMPLES as f64) as usize).min(BOOTSTRAP_RESAMPLES - 1)];
    (at(0.025), at(0.975))
}

/// Normalise one extinction estimate. Pure: identical inputs give an
/// identical record.
pub fn compute_record(
    graph: &Graph,
    est: &ExtinctionEstimate,
    normalizer: &Normalizer,
    seed: u64,
) -> Result<Record, EstimateError> {
    if !(est.mean > 0.0) {
        return Err(EstimateError::NonpositiveMean(est.mean));
    }
    let graph_size = graph.vertex_count();
    let log_mean = est.mean.ln();
    let x = log_mean / graph_size as f64;
    let ci = log_mean_interval(est, seed);
    let censored_frac = est.censored_fraction();
    let usable = censored_frac <= MAX_CENSORED_FRACTION;
    Ok(match *normalizer {
        Normalizer::Box { n, d, box_size } => Record::Box(EstimateRecord {
            n,
            graph_size,
            box_size,
            mean_tau: est.mean,
            se: est.std_error,
            log_mean,
            x,
            x_box: log_mean / (n as f64).powi(d as i32),
            ci,
            censored_frac,
            usable,
            seed,
        }),
        Normalizer::GaltonWatson { n, m, v_n, z_n, conditioning } => Record::Gw(GwEstimateRecord {
            n,
            graph_size,
            z_n,
            m,
            v_n,
            w_proxy: graph_size as f64 / v_n,
            mean_tau: est.mean,
            se: est.std_error,
            log_mean,
            y: log_mean / m.powi(n as i32),
            x,
            ci,
            censored_frac,
            usable,
            conditioning,
            seed,
        }),
    })
}

/// `θ̂` from `(n, |G_n|, |B_n|)` samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaEstimate {
    pub theta: f64,
    pub se: f64,
    /// Per-scale mean and variance of `|G_n| / |B_n|`.
    pub per_n: Vec<DensityPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub n: u32,
    pub mean: f64,
    pub variance: f64,
    pub count: usize,
}

/// Mean and unbiased variance of a sample.
pub fn mean_variance(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0) } else { 0.0 };
    (mean, var)
}

/// Per-scale density table, ascending in `n`.
pub fn density_table(samples: &[(u32, f64, f64)]) -> Vec<DensityPoint> {
    let mut scales: Vec<u32> = samples.iter().map(|s| s.0).collect();
    scales.sort_unstable();
    scales.dedup();
    scales
        .into_iter()
        .map(|n| {
            let ratios: Vec<f64> = samples.iter().filter(|s| s.0 == n).map(|s| s.1 / s.2).collect();
            let (mean, variance) = mean_variance(&ratios);
            DensityPoint { n, mean, variance, count: ratios.len() }
        })
        .collect()
}

/// Density of the maximal component at the largest available scale.
pub fn estimate_theta(samples: &[(u32, f64, f64)]) -> Result<ThetaEstimate, EstimateError> {
    let per_n = density_table(samples);
    let last = per_n.last().ok_or(EstimateError::InsufficientSamples { needed: 2, got: 0 })?;
    if last.count < 2 {
        return Err(EstimateError::InsufficientSamples { needed: 2, got: last.count });
    }
    let theta = last.mean;
    let se = (last.variance / last.count as f64).sqrt();
    Ok(ThetaEstimate { theta, se, per_n })
}

/// Kolmogorov-Smirnov distance between the empirical law of `samples` and
/// a continuous CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let k = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / k).abs().max(((i + 1) as f64 / k - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Weighted regression of `Z_{k+1}` on `Z_k` through the origin with
/// weights `1/Z_k` (conditional variance is `σ² Z_k`). Returns the slope
/// and its standard error.
pub fn offspring_mean_regression(trees: &[GwRecord]) -> Result<(f64, f64), EstimateError> {
    let pairs: Vec<(f64, f64)> = trees
        .iter()
        .flat_map(|t| t.generations.windows(2).filter(|w| w[0] > 0).map(|w| (w[0] as f64, w[1] as f64)))
        .collect();
    if pairs.len() < 2 {
        return Err(EstimateError::InsufficientSamples { needed: 2, got: pairs.len() });
    }
    let sum_x: f64 = pairs.iter().map(|p| p.0).sum();
    let slope = pairs.iter().map(|p| p.1).sum::<f64>() / sum_x;
    let sigma2 = pairs.iter().map(|(x, y)| (y - slope * x).powi(2) / x).sum::<f64>() / (pairs.len() - 1) as f64;
    Ok((slope, (sigma2 / sum_x).sqrt()))
}
