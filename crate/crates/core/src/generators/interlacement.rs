//! Random interlacements seen from a box, with walks killed at `∂B_M`.
//!
//! The equilibrium measure of `K = B_n` is estimated once per sampler:
//! from every inner-boundary site `x` of `K`, independent walks are run and
//! `e(x)` is the fraction that leave `B_M` before returning to `K`. The
//! capacity estimate is `Σ e(x)`. A sample at level `u` is the union of the
//! traces in `K` of `Poisson(u·cap)` walks started from `e / cap` and run
//! until they leave `B_M`. Trajectory arrivals are generated as a rate-`cap`
//! Poisson process in `u`, so samples at `u₁ < u₂` with a shared seed are
//! nested.

use rand::Rng;
use rayon::prelude::*;

use super::percolation::open_sites_graph;
use super::GenError;
use crate::graph::{BoxFlavor, BoxSpec, Graph, Provenance};
use crate::rng::{exponential, stream, StreamRole};

/// Default escape walks per inner-boundary site.
pub const DEFAULT_EQUILIBRIUM_WALKS: u32 = 4000;

#[derive(Clone, Debug)]
pub struct InterlacementSampler {
    bx: BoxSpec,
    kill: BoxSpec,
    /// Inner-boundary sites (lexicographic index in `bx`) and `ê(x)`.
    boundary: Vec<usize>,
    equilibrium: Vec<f64>,
    cumulative: Vec<f64>,
    capacity: f64,
}

/// Occupied set of one sample, as a site mask over `B_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct InterlacementSample {
    pub u: f64,
    pub trajectories: usize,
    pub occupied: Vec<bool>,
}

fn random_step<R: Rng>(rng: &mut R, x: &mut [i64]) {
    let d = x.len();
    let k = rng.random_range(0..2 * d);
    x[k / 2] += if k % 2 == 0 { 1 } else { -1 };
}

impl InterlacementSampler {
    pub fn new(bx: &BoxSpec, kill_radius: u32, walks_per_site: u32, seed: u64) -> Result<Self, GenError> {
        if bx.flavor != BoxFlavor::Lattice {
            return Err(GenError::WrongBoxFlavor);
        }
        if bx.d < 3 {
            return Err(GenError::BadDimension { d: bx.d, min: 3 });
        }
        if kill_radius < 4 * bx.n {
            return Err(GenError::KillRadiusTooSmall { kill_radius, n: bx.n });
        }
        if walks_per_site == 0 {
            return Err(GenError::InvalidParameter("walks_per_site must be positive".into()));
        }
        let kill = bx.rescaled(kill_radius);
        let n = bx.n as i64;
        let boundary: Vec<usize> = (0..bx.site_count())
            .filter(|&i| bx.site_coords(i).iter().any(|&c| c == -n || c == n - 1))
            .collect();
        let equilibrium: Vec<f64> = boundary
            .par_iter()
            .map(|&site| {
                let mut rng = stream(seed, site as u64, StreamRole::EquilibriumMeasure);
                let start = bx.site_coords(site);
                let mut escapes = 0u32;
                let mut x = start.clone();
                for _ in 0..walks_per_site {
                    x.copy_from_slice(&start);
                    loop {
                        random_step(&mut rng, &mut x);
                        if !kill.contains_site(&x) {
                            escapes += 1;
                            break;
                        }
                        if bx.contains_site(&x) {
                            break;
                        }
                    }
                }
                escapes as f64 / walks_per_site as f64
            })
            .collect();
        let mut acc = 0.0;
        let cumulative: Vec<f64> = equilibrium
            .iter()
            .map(|e| {
                acc += e;
                acc
            })
            .collect();
        Ok(InterlacementSampler { bx: *bx, kill, boundary, equilibrium, cumulative, capacity: acc })
    }

    pub fn box_spec(&self) -> &BoxSpec {
        &self.bx
    }

    pub fn kill_radius(&self) -> u32 {
        self.kill.n
    }

    /// Estimated capacity of `B_n` relative to `B_M`.
    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    /// `(site index, ê(site))` over the inner boundary.
    pub fn equilibrium_measure(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.boundary.iter().copied().zip(self.equilibrium.iter().copied())
    }

    /// Occupied set at level `u`. Trajectory `k` uses stream `(seed, k)`.
    pub fn sample(&self, u: f64, seed: u64) -> Result<InterlacementSample, GenError> {
        if !(u >= 0.0 && u.is_finite()) {
            return Err(GenError::InvalidParameter(format!("intensity u = {u} must be non-negative")));
        }
        let mut occupied = vec![false; self.bx.site_count()];
        let mut arrivals = stream(seed, 0, StreamRole::Arrivals);
        let mut level = 0.0;
        let mut k = 0usize;
        if self.capacity > 0.0 {
            loop {
                level += exponential(&mut arrivals, self.capacity);
                if level > u {
                    break;
                }
                self.run_trajectory(seed, k, &mut occupied);
                k += 1;
            }
        }
        Ok(InterlacementSample { u, trajectories: k, occupied })
    }

    fn run_trajectory(&self, seed: u64, k: usize, occupied: &mut [bool]) {
        let mut rng = stream(seed, k as u64, StreamRole::Trajectory);
        let target = rng.random::<f64>() * self.capacity;
        let slot = self.cumulative.partition_point(|&c| c <= target).min(self.boundary.len() - 1);
        let mut x = self.bx.site_coords(self.boundary[slot]);
        loop {
            if let Some(i) = self.bx.site_index(&x) {
                occupied[i] = true;
            }
            random_step(&mut rng, &mut x);
            if !self.kill.contains_site(&x) {
                break;
            }
        }
    }

    /// Occupied (`occupied = true`) or vacant set as an induced graph.
    pub fn sample_graph(&self, u: f64, seed: u64, occupied: bool) -> Result<Graph, GenError> {
        let s = self.sample(u, seed)?;
        let mask: Vec<bool> = s.occupied.iter().map(|&o| o == occupied).collect();
        let model = if occupied { "ri-occupied" } else { "ri-vacant" };
        Ok(open_sites_graph(&self.bx, &mask).with_provenance(
            Provenance::new(model, self.bx.n as u64, seed)
                .with_param("u", u)
                .with_param("kill_radius", self.kill.n as f64),
        ))
    }
}

/// One-shot sampler; the equilibrium measure is estimated from `seed`.
pub fn gen_interlacements(
    bx: &BoxSpec,
    u: f64,
    kill_radius: u32,
    seed: u64,
    occupied: bool,
) -> Result<Graph, GenError> {
    InterlacementSampler::new(bx, kill_radius, DEFAULT_EQUILIBRIUM_WALKS, seed)?.sample_graph(u, seed, occupied)
}
