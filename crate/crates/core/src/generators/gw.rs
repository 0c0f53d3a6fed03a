//! Galton-Watson trees grown to a fixed generation.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::GenError;
use crate::graph::{Graph, Provenance, VertexId};
use crate::rng::{stream, StreamRole};

/// Rejection attempts allowed when conditioning on survival.
pub const MAX_CONDITIONING_ATTEMPTS: u32 = 1_000_000;

/// Offspring distribution with finite support: `probs[k] = ν(k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct OffspringLaw {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl OffspringLaw {
    pub fn new(probs: Vec<f64>) -> Result<Self, GenError> {
        if probs.is_empty() || probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(GenError::InvalidLaw("probabilities must be finite and non-negative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(GenError::InvalidLaw(format!("probabilities sum to {total}, not 1")));
        }
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(OffspringLaw { probs, cumulative })
    }

    /// Law putting all mass on `k` children.
    pub fn deterministic(k: usize) -> Self {
        let mut probs = vec![0.0; k + 1];
        probs[k] = 1.0;
        OffspringLaw::new(probs).expect("point mass is a law")
    }

    pub fn prob(&self, k: usize) -> f64 {
        self.probs.get(k).copied().unwrap_or(0.0)
    }

    /// `m = Σ k ν(k)`.
    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    /// `Σ k² ν(k)`.
    pub fn second_moment(&self) -> f64 {
        self.probs.iter().enumerate().map(|(k, p)| (k * k) as f64 * p).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        self.cumulative.partition_point(|&c| c <= u).min(self.probs.len() - 1)
    }

    pub fn check_supercritical(&self) -> Result<(), GenError> {
        let m = self.mean();
        if m <= 1.0 {
            return Err(GenError::SubcriticalLaw { mean: m });
        }
        Ok(())
    }
}

impl FromStr for OffspringLaw {
    type Err = GenError;

    /// Parses `"k:prob,k:prob,..."`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut probs: Vec<f64> = Vec::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, p) = item
                .split_once(':')
                .ok_or_else(|| GenError::InvalidLaw(format!("expected k:prob, got {item:?}")))?;
            let k: usize = k.trim().parse().map_err(|_| GenError::InvalidLaw(format!("bad count {k:?}")))?;
            let p: f64 = p.trim().parse().map_err(|_| GenError::InvalidLaw(format!("bad probability {p:?}")))?;
            if probs.len() <= k {
                probs.resize(k + 1, 0.0);
            }
            probs[k] += p;
        }
        OffspringLaw::new(probs)
    }
}

impl fmt::Display for OffspringLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self
            .probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(k, p)| format!("{k}:{p}"))
            .collect();
        f.write_str(&items.join(","))
    }
}

impl TryFrom<String> for OffspringLaw {
    type Error = GenError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<OffspringLaw> for String {
    fn from(law: OffspringLaw) -> String {
        law.to_string()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conditioning {
    None,
    /// Condition on `Z_n ≠ 0`; stands in for conditioning on survival.
    #[default]
    SurvivalToN,
}

/// A sampled tree and its generation statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct GwRecord {
    pub law: OffspringLaw,
    pub m: f64,
    pub sigma2: f64,
    /// `Z_0, ..., Z_n`.
    pub generations: Vec<u64>,
    /// `1 + m + ... + m^n`.
    pub v_n: f64,
    /// Tree rooted at vertex 0, vertices numbered generation by generation.
    pub tree: Graph,
    pub conditioning: Conditioning,
    /// Rejection attempts used (1 without conditioning).
    pub attempts: u32,
}

impl GwRecord {
    pub fn depth(&self) -> usize {
        self.generations.len() - 1
    }

    /// `|G_n| = 1 + Z_1 + ... + Z_n`.
    pub fn size(&self) -> u64 {
        self.generations.iter().sum()
    }

    pub fn z_n(&self) -> u64 {
        *self.generations.last().expect("Z_0 present")
    }

    /// `|G_n| / v_n`, a proxy for `W_∞`.
    pub fn w_proxy(&self) -> f64 {
        self.size() as f64 / self.v_n
    }
}

pub fn geometric_sum(m: f64, n: usize) -> f64 {
    (0..=n).map(|k| m.powi(k as i32)).sum()
}

/// Grow one tree to generation `n`, returning generation sizes and the
/// parent of each non-root vertex.
fn grow<R: Rng>(law: &OffspringLaw, n: usize, rng: &mut R) -> (Vec<u64>, Vec<VertexId>) {
    let mut generations = vec![1u64];
    let mut parent = vec![usize::MAX];
    let mut frontier = 0..1usize;
    for _ in 0..n {
        let start = parent.len();
        for v in frontier.clone() {
            let kids = law.sample(rng);
            parent.extend(std::iter::repeat_n(v, kids));
        }
        generations.push((parent.len() - start) as u64);
        frontier = start..parent.len();
    }
    (generations, parent)
}

/// Sample a Galton-Watson tree up to generation `n`.
///
/// Under [`Conditioning::SurvivalToN`] trees are redrawn until `Z_n ≠ 0`,
/// attempt `k` using stream `(seed, k)`. Subcritical laws are accepted with
/// a warning.
pub fn gen_gw_tree(
    law: &OffspringLaw,
    n: usize,
    conditioning: Conditioning,
    seed: u64,
) -> Result<GwRecord, GenError> {
    if law.prob(0) == 1.0 && conditioning == Conditioning::SurvivalToN && n > 0 {
        return Err(GenError::ImpossibleConditioning);
    }
    if let Err(e) = law.check_supercritical() {
        log::warn!("{e}; proceeding for exploratory use");
    }
    let mut attempt = 0u32;
    let (generations, parent) = loop {
        if attempt >= MAX_CONDITIONING_ATTEMPTS {
            return Err(GenError::ConditioningExhausted { attempts: attempt });
        }
        let mut rng = stream(seed, attempt as u64, StreamRole::GaltonWatson);
        attempt += 1;
        let (generations, parent) = grow(law, n, &mut rng);
        if conditioning == Conditioning::None || *generations.last().expect("root") > 0 {
            break (generations, parent);
        }
    };
    let edges = parent.iter().enumerate().skip(1).map(|(v, &p)| (p, v));
    let tree = Graph::from_edges(parent.len(), edges)?
        .with_provenance(Provenance::new("gw", n as u64, seed));
    let m = law.mean();
    Ok(GwRecord {
        law: law.clone(),
        m,
        sigma2: law.second_moment(),
        generations,
        v_n: geometric_sum(m, n),
        tree,
        conditioning,
        attempts: attempt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_tree_is_deterministic() {
        let rec = gen_gw_tree(&OffspringLaw::deterministic(2), 4, Conditioning::None, 1).unwrap();
        assert_eq!(rec.generations, vec![1, 2, 4, 8, 16]);
        assert_eq!(rec.size(), 31);
        assert_eq!(rec.tree.vertex_count(), 31);
        assert_eq!(rec.tree.edge_count(), 30);
        assert_eq!(rec.v_n, 31.0);
        assert!(rec.tree.is_connected());
    }

    #[test]
    fn extinct_law_cannot_be_conditioned() {
        let law: OffspringLaw = "0:1".parse().unwrap();
        assert!(matches!(
            gen_gw_tree(&law, 3, Conditioning::SurvivalToN, 0),
            Err(GenError::ImpossibleConditioning)
        ));
        // Unconditioned: a lone root.
        let rec = gen_gw_tree(&law, 3, Conditioning::None, 0).unwrap();
        assert_eq!(rec.size(), 1);
    }

    #[test]
    fn law_parsing() {
        let law: OffspringLaw = "0:0.25, 1:0.25, 2:0.5".parse().unwrap();
        assert_eq!(law.mean(), 1.25);
        assert_eq!(law.second_moment(), 2.25);
        assert_eq!(law.to_string(), "0:0.25,1:0.25,2:0.5");
        assert!("0:0.5".parse::<OffspringLaw>().is_err());
        assert!("x:1".parse::<OffspringLaw>().is_err());
        assert!(matches!(law.check_supercritical(), Ok(())));
        assert!(matches!(
            OffspringLaw::deterministic(1).check_supercritical(),
            Err(GenError::SubcriticalLaw { .. })
        ));
    }

    #[test]
    fn survival_conditioning_holds() {
        let law: OffspringLaw = "0:0.25,1:0.25,2:0.5".parse().unwrap();
        for seed in 0..50 {
            let rec = gen_gw_tree(&law, 6, Conditioning::SurvivalToN, seed).unwrap();
            assert!(rec.z_n() > 0);
            assert_eq!(rec.tree.vertex_count() as u64, rec.size());
        }
    }

    #[test]
    fn first_generation_mean() {
        let law: OffspringLaw = "0:0.25,1:0.25,2:0.5".parse().unwrap();
        let trials = 40_000;
        let z1: Vec<f64> = (0..trials)
            .map(|s| gen_gw_tree(&law, 1, Conditioning::None, s).unwrap().generations[1] as f64)
            .collect();
        let mean = z1.iter().sum::<f64>() / trials as f64;
        let var = law.second_moment() - 1.25 * 1.25;
        let se = (var / trials as f64).sqrt();
        assert!((mean - 1.25).abs() < 4.0 * se, "mean {mean}");
    }
}
