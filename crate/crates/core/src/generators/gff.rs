//! Gaussian free field on `B_n` and its excursion sets `{φ ≥ h}`.
//!
//! The covariance is the Green function of the walk killed on leaving the
//! padded box `B_{pad·n}`; it converges to the full-lattice Green function
//! as the pad factor grows. The covariance on `B_n` is Cholesky-factorised
//! once per sampler and reused for every field draw.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use super::green::green_matrix;
use super::percolation::open_sites_graph;
use super::GenError;
use crate::graph::{BoxFlavor, BoxSpec, Graph, Provenance};
use crate::rng::{stream, StreamRole};

/// Largest padded box (in sites) the dense sampler accepts.
pub const GFF_MAX_PADDED_SITES: usize = 20_000;

#[derive(Clone, Debug)]
pub struct GffSampler {
    bx: BoxSpec,
    pad_factor: u32,
    /// Lower Cholesky factor of the covariance on `B_n`.
    chol: DMatrix<f64>,
    covariance: DMatrix<f64>,
}

impl GffSampler {
    pub fn new(bx: &BoxSpec, pad_factor: u32) -> Result<Self, GenError> {
        if bx.flavor != BoxFlavor::Lattice {
            return Err(GenError::WrongBoxFlavor);
        }
        if bx.d < 3 {
            return Err(GenError::BadDimension { d: bx.d, min: 3 });
        }
        if pad_factor < 2 {
            return Err(GenError::InvalidParameter(format!("pad_factor {pad_factor} must be at least 2")));
        }
        let padded = bx.rescaled(bx.n * pad_factor);
        let padded_sites = (padded.side() as f64).powi(bx.d as i32);
        if padded_sites > GFF_MAX_PADDED_SITES as f64 {
            return Err(GenError::TooLarge { sites: padded_sites as u64, limit: GFF_MAX_PADDED_SITES as u64 });
        }
        let targets: Vec<usize> = (0..bx.site_count())
            .map(|i| padded.site_index(&bx.site_coords(i)).expect("inner box inside padded box"))
            .collect();
        let g = green_matrix(&padded, &targets)?;
        let k = targets.len();
        let covariance = DMatrix::from_fn(k, k, |i, j| g[i][j]);
        let chol = covariance
            .clone()
            .cholesky()
            .ok_or(GenError::NotPositiveDefinite)?
            .unpack();
        Ok(GffSampler { bx: *bx, pad_factor, chol, covariance })
    }

    pub fn box_spec(&self) -> &BoxSpec {
        &self.bx
    }

    pub fn pad_factor(&self) -> u32 {
        self.pad_factor
    }

    /// `g(x, y)` between sites of `B_n` given by lexicographic index.
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        self.covariance[(i, j)]
    }

    /// `g(x, x)` for every site of `B_n`.
    pub fn green_diag(&self) -> Vec<f64> {
        (0..self.bx.site_count()).map(|i| self.covariance[(i, i)]).collect()
    }

    /// One field realisation `φ = L z` indexed by site.
    pub fn sample_field(&self, seed: u64) -> Vec<f64> {
        let mut rng = stream(seed, 0, StreamRole::Field);
        let k = self.bx.site_count();
        let z: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut phi = vec![0.0; k];
        for (i, out) in phi.iter_mut().enumerate() {
            *out = (0..=i).map(|j| self.chol[(i, j)] * z[j]).sum();
        }
        phi
    }

    /// Graph induced on the excursion set `{x ∈ B_n : φ_x ≥ h}`.
    pub fn excursion(&self, h: f64, seed: u64) -> Graph {
        let phi = self.sample_field(seed);
        let open: Vec<bool> = phi.iter().map(|&v| v >= h).collect();
        open_sites_graph(&self.bx, &open).with_provenance(
            Provenance::new("gff", self.bx.n as u64, seed)
                .with_param("h", h)
                .with_param("pad_factor", self.pad_factor as f64),
        )
    }
}

/// One-shot excursion-set sampler. Prefer [`GffSampler`] when drawing many
/// fields on the same box.
pub fn gen_gff_excursion(bx: &BoxSpec, h: f64, pad_factor: u32, seed: u64) -> Result<Graph, GenError> {
    Ok(GffSampler::new(bx, pad_factor)?.excursion(h, seed))
}
