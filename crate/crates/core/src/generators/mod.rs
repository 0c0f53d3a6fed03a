//! Samplers for the random graph ensembles.
//!
//! Every sampler is a pure function of its parameters and seed. The two
//! ensembles with expensive set-up (the Gaussian free field and random
//! interlacements) expose a prepared sampler that is built once per box and
//! then drawn from many times.

pub mod gff;
pub mod green;
pub mod gw;
pub mod interlacement;
pub mod percolation;
pub mod rgg;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gff::{gen_gff_excursion, GffSampler};
pub use gw::{gen_gw_tree, Conditioning, GwRecord, OffspringLaw};
pub use interlacement::{gen_interlacements, InterlacementSample, InterlacementSampler};
pub use percolation::{gen_bond_percolation, gen_site_percolation};
pub use rgg::gen_rgg;

use crate::graph::{BoxSpec, Graph, GraphError};
use crate::rng::{mix_seed, StreamRole};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("dimension {d} is below the minimum {min} for this model")]
    BadDimension { d: usize, min: usize },
    #[error("box flavor does not match the model (lattice vs continuum)")]
    WrongBoxFlavor,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid offspring law: {0}")]
    InvalidLaw(String),
    #[error("offspring law puts all mass on zero; survival conditioning is impossible")]
    ImpossibleConditioning,
    #[error("offspring mean {mean} is not supercritical")]
    SubcriticalLaw { mean: f64 },
    #[error("survival conditioning failed after {attempts} attempts")]
    ConditioningExhausted { attempts: u32 },
    #[error("padded box has {sites} sites, above the dense limit {limit}")]
    TooLarge { sites: u64, limit: u64 },
    #[error("kill radius {kill_radius} is smaller than 4n = {}", 4 * n)]
    KillRadiusTooSmall { kill_radius: u32, n: u32 },
    #[error("linear solver did not converge in {iterations} iterations")]
    SolverDidNotConverge { iterations: usize },
    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn default_pad_factor() -> u32 {
    4
}

fn default_eq_walks() -> u32 {
    interlacement::DEFAULT_EQUILIBRIUM_WALKS
}

/// Model block of an experiment configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelSpec {
    Bond {
        d: usize,
        p: f64,
    },
    Site {
        d: usize,
        p: f64,
    },
    Rgg {
        d: usize,
        #[serde(rename = "R")]
        radius: f64,
    },
    Gw {
        nu: OffspringLaw,
        #[serde(default)]
        conditioning: Conditioning,
    },
    Gff {
        d: usize,
        h: f64,
        #[serde(default = "default_pad_factor")]
        pad_factor: u32,
    },
    RiOccupied {
        d: usize,
        u: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kill_radius: Option<u32>,
        #[serde(default = "default_eq_walks")]
        eq_walks: u32,
    },
    RiVacant {
        d: usize,
        u: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kill_radius: Option<u32>,
        #[serde(default = "default_eq_walks")]
        eq_walks: u32,
    },
}

/// How a generated graph is normalised by the estimators.
#[derive(Clone, Debug, PartialEq)]
pub enum Normalizer {
    /// Box models: `|B_n|` is `(2n)^d` sites or volume.
    Box { n: u32, d: usize, box_size: f64 },
    /// Galton-Watson trees grown to generation `n`.
    GaltonWatson { n: u32, m: f64, v_n: f64, z_n: u64, conditioning: Conditioning },
}

impl Normalizer {
    /// `|B_n|` or `v_n`.
    pub fn reference_size(&self) -> f64 {
        match self {
            Normalizer::Box { box_size, .. } => *box_size,
            Normalizer::GaltonWatson { v_n, .. } => *v_n,
        }
    }
}

/// A sampled graph together with its normalisation data.
#[derive(Clone, Debug)]
pub struct GeneratedGraph {
    pub graph: Graph,
    pub normalizer: Normalizer,
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Bond { .. } => "bond",
            ModelSpec::Site { .. } => "site",
            ModelSpec::Rgg { .. } => "rgg",
            ModelSpec::Gw { .. } => "gw",
            ModelSpec::Gff { .. } => "gff",
            ModelSpec::RiOccupied { .. } => "ri-occupied",
            ModelSpec::RiVacant { .. } => "ri-vacant",
        }
    }

    /// Compact `key=value;...` rendering used in result tables.
    pub fn params_string(&self) -> String {
        match self {
            ModelSpec::Bond { d, p } | ModelSpec::Site { d, p } => format!("d={d};p={p}"),
            ModelSpec::Rgg { d, radius } => format!("d={d};R={radius}"),
            ModelSpec::Gw { nu, conditioning } => {
                let c = match conditioning {
                    Conditioning::None => "none",
                    Conditioning::SurvivalToN => "survival-to-n",
                };
                format!("nu={};conditioning={c}", nu.to_string().replace(',', " "))
            }
            ModelSpec::Gff { d, h, pad_factor } => format!("d={d};h={h};pad_factor={pad_factor}"),
            ModelSpec::RiOccupied { d, u, kill_radius, eq_walks }
            | ModelSpec::RiVacant { d, u, kill_radius, eq_walks } => {
                let m = kill_radius.map_or("4n".to_string(), |m| m.to_string());
                format!("d={d};u={u};kill_radius={m};eq_walks={eq_walks}")
            }
        }
    }

    /// Spatial dimension, `None` for trees.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            ModelSpec::Gw { .. } => None,
            ModelSpec::Bond { d, .. }
            | ModelSpec::Site { d, .. }
            | ModelSpec::Rgg { d, .. }
            | ModelSpec::Gff { d, .. }
            | ModelSpec::RiOccupied { d, .. }
            | ModelSpec::RiVacant { d, .. } => Some(*d),
        }
    }

    /// The box `B_n` the model lives in, `None` for trees.
    pub fn box_at(&self, n: u32) -> Option<BoxSpec> {
        match self {
            ModelSpec::Gw { .. } => None,
            ModelSpec::Rgg { d, .. } => Some(BoxSpec::continuum(n, *d)),
            _ => Some(BoxSpec::lattice(n, self.dimension().expect("box model"))),
        }
    }

    pub fn is_lattice(&self) -> bool {
        !matches!(self, ModelSpec::Gw { .. } | ModelSpec::Rgg { .. })
    }

    /// Build the sampler for scale `n`. `setup_seed` keys any randomness in
    /// the set-up itself (the interlacement equilibrium measure).
    pub fn prepare(&self, n: u32, setup_seed: u64) -> Result<PreparedModel, GenError> {
        let kind = match self {
            ModelSpec::Gff { d, pad_factor, .. } => {
                Prepared::Gff(Box::new(GffSampler::new(&BoxSpec::lattice(n, *d), *pad_factor)?))
            }
            ModelSpec::RiOccupied { d, kill_radius, eq_walks, .. }
            | ModelSpec::RiVacant { d, kill_radius, eq_walks, .. } => {
                let m = kill_radius.unwrap_or(4 * n);
                let seed = mix_seed(setup_seed, n as u64, StreamRole::EquilibriumMeasure);
                Prepared::Interlacement(Box::new(InterlacementSampler::new(
                    &BoxSpec::lattice(n, *d),
                    m,
                    *eq_walks,
                    seed,
                )?))
            }
            _ => Prepared::Direct,
        };
        Ok(PreparedModel { spec: self.clone(), n, kind })
    }
}

#[derive(Clone, Debug)]
enum Prepared {
    Direct,
    Gff(Box<GffSampler>),
    Interlacement(Box<InterlacementSampler>),
}

/// A model bound to a scale, ready to draw graphs from seeds.
#[derive(Clone, Debug)]
pub struct PreparedModel {
    spec: ModelSpec,
    n: u32,
    kind: Prepared,
}

impl PreparedModel {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn sample(&self, seed: u64) -> Result<GeneratedGraph, GenError> {
        let n = self.n;
        let graph = match (&self.spec, &self.kind) {
            (ModelSpec::Bond { d, p }, _) => gen_bond_percolation(&BoxSpec::lattice(n, *d), *p, seed)?,
            (ModelSpec::Site { d, p }, _) => gen_site_percolation(&BoxSpec::lattice(n, *d), *p, seed)?,
            (ModelSpec::Rgg { d, radius }, _) => gen_rgg(&BoxSpec::continuum(n, *d), *radius, seed)?,
            (ModelSpec::Gw { nu, conditioning }, _) => {
                let rec = gen_gw_tree(nu, n as usize, *conditioning, seed)?;
                let normalizer =
                    Normalizer::GaltonWatson { n, m: rec.m, v_n: rec.v_n, z_n: rec.z_n(), conditioning: *conditioning };
                return Ok(GeneratedGraph { graph: rec.tree, normalizer });
            }
            (ModelSpec::Gff { h, .. }, Prepared::Gff(s)) => s.excursion(*h, seed),
            (ModelSpec::RiOccupied { u, .. }, Prepared::Interlacement(s)) => s.sample_graph(*u, seed, true)?,
            (ModelSpec::RiVacant { u, .. }, Prepared::Interlacement(s)) => s.sample_graph(*u, seed, false)?,
            _ => unreachable!("prepared sampler matches its model"),
        };
        let bx = self.spec.box_at(n).expect("box model");
        Ok(GeneratedGraph { graph, normalizer: Normalizer::Box { n, d: bx.d, box_size: bx.measure() } })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_block_parses_from_toml() {
        let spec: ModelSpec = toml::from_str("model = \"bond\"\nd = 2\np = 0.7\n").unwrap();
        assert_eq!(spec, ModelSpec::Bond { d: 2, p: 0.7 });
        let spec: ModelSpec = toml::from_str("model = \"gw\"\nnu = \"0:0.25,1:0.25,2:0.5\"\n").unwrap();
        assert!(matches!(spec, ModelSpec::Gw { conditioning: Conditioning::SurvivalToN, .. }));
        let spec: ModelSpec = toml::from_str("model = \"rgg\"\nd = 2\nR = 1.5\n").unwrap();
        assert_eq!(spec.params_string(), "d=2;R=1.5");
        let spec: ModelSpec = toml::from_str("model = \"ri-vacant\"\nd = 3\nu = 0.5\n").unwrap();
        assert_eq!(spec.name(), "ri-vacant");
        assert!(toml::from_str::<ModelSpec>("model = \"ising\"\n").is_err());
    }

    #[test]
    fn prepared_models_are_reproducible() {
        let specs = [
            ModelSpec::Bond { d: 2, p: 0.6 },
            ModelSpec::Site { d: 3, p: 0.6 },
            ModelSpec::Rgg { d: 2, radius: 1.4 },
            ModelSpec::Gw { nu: "1:0.5,2:0.5".parse().unwrap(), conditioning: Conditioning::None },
            ModelSpec::Gff { d: 3, h: 0.0, pad_factor: 2 },
            ModelSpec::RiVacant { d: 3, u: 0.5, kill_radius: None, eq_walks: 50 },
        ];
        for spec in specs {
            let a = spec.prepare(2, 1).unwrap().sample(9).unwrap();
            let b = spec.prepare(2, 1).unwrap().sample(9).unwrap();
            assert_eq!(a.graph, b.graph, "{}", spec.name());
            assert!(a.normalizer.reference_size() > 0.0);
        }
    }
}
