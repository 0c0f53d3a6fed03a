//! Checks of the upper bound, the tail bound and supermultiplicativity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EstimateError;
use crate::contact::{
    coupled_subgraph_simulate, exact_expected_extinction, run_trials, ContactConfig, SeedPath, MAX_EXACT_VERTICES,
};
use crate::graph::{induced_subgraph, Graph, VertexId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundReport {
    pub log_mean: f64,
    /// `|V| + 2λ|E|`.
    pub log_bound: f64,
    pub holds: bool,
}

/// `log E[τ] ≤ |V| + 2λ|E|` from the exact solver.
pub fn upper_bound_check(g: &Graph, lambda: f64) -> Result<UpperBoundReport, EstimateError> {
    let log_mean = exact_expected_extinction(g, lambda)?.ln();
    let log_bound = g.vertex_count() as f64 + 2.0 * lambda * g.edge_count() as f64;
    Ok(UpperBoundReport { log_mean, log_bound, holds: log_mean <= log_bound })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub t: f64,
    pub empirical_cdf: f64,
    pub se: f64,
    /// `t / E[τ]`.
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBoundReport {
    pub exact_mean: f64,
    pub trials: usize,
    pub points: Vec<TailPoint>,
    /// Grid points where the CDF exceeds `t/E[τ] + 3·SE`.
    pub violations: Vec<f64>,
}

/// Ten evenly spaced points spanning `[0.1·E, 2·E]`.
pub fn default_tail_grid(exact_mean: f64) -> Vec<f64> {
    (0..10).map(|i| exact_mean * (0.1 + 1.9 * i as f64 / 9.0)).collect()
}

/// Empirical `P(τ ≤ t)` against `t / E[τ]`, with `E[τ]` from the exact
/// solver. Trials are uncensored.
pub fn tail_bound_check(
    g: &Graph,
    lambda: f64,
    trials: usize,
    t_grid: Option<&[f64]>,
    master_seed: u64,
) -> Result<TailBoundReport, EstimateError> {
    let exact_mean = exact_expected_extinction(g, lambda)?;
    let grid = t_grid.map_or_else(|| default_tail_grid(exact_mean), <[f64]>::to_vec);
    let outcomes = run_trials(g, &ContactConfig::new(lambda).with_time_cap(None), trials, master_seed)?;
    let mut taus: Vec<f64> = outcomes.iter().map(|o| o.tau).collect();
    taus.sort_by(f64::total_cmp);
    let k = trials as f64;
    let points: Vec<TailPoint> = grid
        .iter()
        .map(|&t| {
            let p = taus.partition_point(|&x| x <= t) as f64 / k;
            TailPoint { t, empirical_cdf: p, se: (p * (1.0 - p) / k).sqrt(), bound: t / exact_mean }
        })
        .collect();
    let violations = points.iter().filter(|p| p.empirical_cdf > p.bound + 3.0 * p.se).map(|p| p.t).collect();
    Ok(TailBoundReport { exact_mean, trials, points, violations })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupermultReport {
    pub graph_size: usize,
    pub parts: usize,
    pub log_mean_full: f64,
    pub log_mean_parts: Vec<f64>,
    /// `D = log E[τ_G] − Σ log E[τ_{G_i}]`.
    pub defect: f64,
    /// `(N + 1) · log(2|G|³)`.
    pub correction: f64,
    /// `D + (N + 1) · log(2|G|³)`; bounded below by `log c₀`.
    pub adjusted_defect: f64,
    /// `E[τ_G] ≥ max_i E[τ_{G_i}]`.
    pub dominates_max_part: bool,
    /// Trials with some `τ_{G_i} > τ_G`; zero under the coupling.
    pub pathwise_violations: usize,
}

fn validate_parts(g: &Graph, parts: &[Vec<VertexId>]) -> Result<Vec<Graph>, EstimateError> {
    let mut owner = vec![false; g.vertex_count()];
    let mut subgraphs = Vec::with_capacity(parts.len());
    for (i, part) in parts.iter().enumerate() {
        for &v in part {
            let slot = owner.get_mut(v).ok_or(EstimateError::NotSubgraph(v))?;
            if *slot {
                return Err(EstimateError::NotDisjoint(v));
            }
            *slot = true;
        }
        let sub = induced_subgraph(g, part).map_err(|_| EstimateError::NotConnected(i))?;
        if !sub.is_connected() {
            return Err(EstimateError::NotConnected(i));
        }
        subgraphs.push(sub);
    }
    Ok(subgraphs)
}

fn report(g: &Graph, log_mean_full: f64, log_mean_parts: Vec<f64>, pathwise_violations: usize) -> SupermultReport {
    let defect = log_mean_full - log_mean_parts.iter().sum::<f64>();
    let size = g.vertex_count() as f64;
    let correction = (log_mean_parts.len() + 1) as f64 * (2.0 * size.powi(3)).ln();
    let max_part = log_mean_parts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    SupermultReport {
        graph_size: g.vertex_count(),
        parts: log_mean_parts.len(),
        log_mean_full,
        defect,
        correction,
        adjusted_defect: defect + correction,
        dominates_max_part: log_mean_full >= max_part,
        log_mean_parts,
        pathwise_violations,
    }
}

/// Monte Carlo defect report from one coupled realisation per trial;
/// every copy shares the recovery and transmission clocks. `time_cap`
/// censors a trial in all copies at once.
pub fn supermult_check(
    g: &Graph,
    parts: &[Vec<VertexId>],
    lambda: f64,
    trials: usize,
    master_seed: u64,
    time_cap: Option<f64>,
) -> Result<SupermultReport, EstimateError> {
    validate_parts(g, parts)?;
    if trials == 0 {
        return Err(EstimateError::InsufficientSamples { needed: 1, got: 0 });
    }
    let runs = (0..trials as u64)
        .into_par_iter()
        .map(|trial| coupled_subgraph_simulate(g, lambda, parts, SeedPath { master: master_seed, trial }, time_cap))
        .collect::<Result<Vec<_>, _>>()?;
    // A trial counts only when the full copy died, so every copy is observed.
    let kept: Vec<_> = runs.iter().filter(|r| !r.full.censored).collect();
    if kept.is_empty() {
        return Err(crate::contact::ContactError::AllCensored { trials }.into());
    }
    let k = kept.len() as f64;
    let log_mean_full = (kept.iter().map(|r| r.full.tau).sum::<f64>() / k).ln();
    let log_mean_parts =
        (0..parts.len()).map(|i| (kept.iter().map(|r| r.parts[i].tau).sum::<f64>() / k).ln()).collect();
    let violations = runs.iter().filter(|r| r.parts.iter().any(|p| p.tau > r.full.tau)).count();
    Ok(report(g, log_mean_full, log_mean_parts, violations))
}

/// Defect report from exact expected extinction times.
pub fn supermult_exact(g: &Graph, parts: &[Vec<VertexId>], lambda: f64) -> Result<SupermultReport, EstimateError> {
    let subgraphs = validate_parts(g, parts)?;
    if g.vertex_count() > MAX_EXACT_VERTICES {
        return Err(crate::contact::ContactError::TooManyVertices {
            vertices: g.vertex_count(),
            limit: MAX_EXACT_VERTICES,
        }
        .into());
    }
    let log_mean_full = exact_expected_extinction(g, lambda)?.ln();
    let log_mean_parts = subgraphs
        .iter()
        .map(|s| exact_expected_extinction(s, lambda).map(f64::ln))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(report(g, log_mean_full, log_mean_parts, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::ContactError;

    #[test]
    fn upper_bound_on_small_graphs() {
        for g in [Graph::path(1), Graph::path(4), Graph::cycle(4), Graph::star(4), Graph::complete(5)] {
            for lambda in [0.0, 0.5, 2.0, 4.0] {
                assert!(upper_bound_check(&g, lambda).unwrap().holds);
            }
        }
    }

    #[test]
    fn single_vertex_tail() {
        let r = tail_bound_check(&Graph::path(1), 1.0, 20_000, Some(&[0.1]), 3).unwrap();
        // P(τ ≤ 0.1) = 1 - e^{-0.1}
        let p = 1.0 - (-0.1f64).exp();
        assert!((r.points[0].empirical_cdf - p).abs() < 4.0 * r.points[0].se);
        assert!(r.violations.is_empty());
        assert_eq!(default_tail_grid(1.0).len(), 10);
    }

    #[test]
    fn tail_guard() {
        assert!(matches!(
            tail_bound_check(&Graph::path(21), 1.0, 10, None, 0),
            Err(EstimateError::Contact(ContactError::TooManyVertices { .. }))
        ));
    }

    #[test]
    fn whole_graph_as_its_own_part() {
        let g = Graph::cycle(5);
        let all: Vec<usize> = (0..5).collect();
        let r = supermult_check(&g, &[all.clone()], 1.5, 300, 2, None).unwrap();
        assert_eq!(r.defect, 0.0);
        assert_eq!(r.pathwise_violations, 0);
        assert_eq!(supermult_exact(&g, &[all], 1.5).unwrap().defect, 0.0);
    }

    #[test]
    fn singletons_give_nonnegative_defect() {
        let g = Graph::path(4);
        let parts: Vec<Vec<usize>> = (0..4).map(|v| vec![v]).collect();
        let r = supermult_exact(&g, &parts, 1.0).unwrap();
        assert!(r.log_mean_parts.iter().all(|&l| l.abs() < 1e-12));
        assert!(r.defect >= 0.0);
    }

    #[test]
    fn exact_path_defect() {
        let g = Graph::path(4);
        let r = supermult_exact(&g, &[vec![0, 1], vec![2, 3]], 2.0).unwrap();
        let expected = exact_expected_extinction(&g, 2.0).unwrap().ln() - 2.0 * 2.5f64.ln();
        assert!((r.defect - expected).abs() < 1e-12);
        assert!(r.dominates_max_part);
        assert!((r.correction - 3.0 * 128f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn part_validation() {
        let g = Graph::path(4);
        assert_eq!(supermult_exact(&g, &[vec![0, 1], vec![1, 2]], 1.0), Err(EstimateError::NotDisjoint(1)));
        assert_eq!(supermult_exact(&g, &[vec![0, 9]], 1.0), Err(EstimateError::NotSubgraph(9)));
        assert_eq!(supermult_exact(&g, &[vec![0, 2]], 1.0), Err(EstimateError::NotConnected(0)));
    }
}
