//! Geometry of the sampled graphs: the component census, annulus
//! crossings, the uniqueness event, density of the maximal component and
//! spanning-tree degrees of geometric graphs.

mod mst;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mst::{mst_degree_check, prim_mst_length, MstReport};

use crate::estimators::{density_table, DensityPoint};
use crate::generators::{GenError, ModelSpec};
use crate::graph::{connected_components, maximal_component, vertices_in_box, BoxSpec, DisjointSets, Graph, GraphError};
use crate::rng::unit_seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructureError {
    #[error("graph has no coordinate embedding")]
    NoEmbedding,
    #[error("epsilon {0} must lie strictly between 0 and 1")]
    BadEpsilon(f64),
    #[error("annulus scale {0} is below 4")]
    BadScale(u32),
    #[error("model {0} has no lattice box")]
    NotLattice(&'static str),
    #[error("graph is not connected")]
    NotConnected,
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Graph(GraphError),
}

impl From<GraphError> for StructureError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::NoEmbedding => StructureError::NoEmbedding,
            other => StructureError::Graph(other),
        }
    }
}

/// One component in a census, ranked by size (ties by smallest id).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    pub rank: usize,
    pub size: usize,
    pub diameter: f64,
    /// Contained in the shell `B_n \ B_{n − ⌈n^ε⌉}`.
    pub in_boundary_shell: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub n: u32,
    pub d: usize,
    pub epsilon: f64,
    /// `n^{d−ε}`.
    pub giant_threshold: f64,
    /// `n^ε`.
    pub small_threshold: f64,
    pub shell_thickness: u32,
    pub rows: Vec<CensusRow>,
    /// Exactly one component is larger than `n^{d−ε}`.
    pub verdict_unique_giant: bool,
    /// Every other component is smaller than `n^ε` or lies in the shell.
    pub verdict_others: bool,
}

impl CensusReport {
    pub fn passes(&self) -> bool {
        self.verdict_unique_giant && self.verdict_others
    }

    /// Recompute both verdicts from the rows alone.
    pub fn verdicts_from_rows(&self) -> (bool, bool) {
        verdicts(&self.rows, self.giant_threshold, self.small_threshold)
    }
}

fn verdicts(rows: &[CensusRow], giant: f64, small: f64) -> (bool, bool) {
    let giants = rows.iter().filter(|r| r.size as f64 > giant).count();
    let unique = giants == 1;
    let skip = if unique { 1 } else { 0 };
    let others = rows.iter().skip(skip).all(|r| (r.size as f64) < small || r.in_boundary_shell);
    (unique, others)
}

/// Census of the components of `g`, a graph restricted to the lattice box
/// `B_n`.
pub fn component_census(g: &Graph, n: u32, epsilon: f64) -> Result<CensusReport, StructureError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(StructureError::BadEpsilon(epsilon));
    }
    let emb = g.embedding().ok_or(StructureError::NoEmbedding)?;
    let d = emb.dim();
    let nf = n as f64;
    let small_threshold = nf.powf(epsilon);
    let giant_threshold = nf.powf(d as f64 - epsilon);
    let shell_thickness = small_threshold.ceil() as u32;
    let inner = n.saturating_sub(shell_thickness);
    let in_inner = |v: usize| {
        let x = emb.point(v);
        inner > 0 && x.iter().all(|&c| c >= -(inner as f64) && c < inner as f64)
    };
    let mut comps = connected_components(g);
    // Stable sort keeps the smallest-id order among equal sizes.
    comps.sort_by(|a, b| b.size().cmp(&a.size()));
    let rows: Vec<CensusRow> = comps
        .iter()
        .enumerate()
        .map(|(rank, c)| CensusRow {
            rank,
            size: c.size(),
            diameter: c.metric_diameter.unwrap_or(0.0),
            in_boundary_shell: !c.vertices.iter().any(|&v| in_inner(v)),
        })
        .collect();
    let (verdict_unique_giant, verdict_others) = verdicts(&rows, giant_threshold, small_threshold);
    Ok(CensusReport {
        n,
        d,
        epsilon,
        giant_threshold,
        small_threshold,
        shell_thickness,
        rows,
        verdict_unique_giant,
        verdict_others,
    })
}

/// CSV rows `seed,n,component_rank,size,diameter,in_boundary_shell`.
pub fn write_census_csv<W: Write>(reports: &[(u64, CensusReport)], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["seed", "n", "component_rank", "size", "diameter", "in_boundary_shell"])?;
    for (seed, rep) in reports {
        for r in &rep.rows {
            out.write_record([
                seed.to_string(),
                rep.n.to_string(),
                r.rank.to_string(),
                r.size.to_string(),
                r.diameter.to_string(),
                r.in_boundary_shell.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

fn lattice_box(spec: &ModelSpec, n: u32) -> Result<BoxSpec, StructureError> {
    if !spec.is_lattice() {
        return Err(StructureError::NotLattice(spec.name()));
    }
    Ok(spec.box_at(n).expect("lattice model"))
}

/// Census of `seeds` independent samples at scale `n`, merged by seed
/// index. Sample `i` uses seed `unit_seed(master_seed, n, i)`.
pub fn census_over_seeds(
    spec: &ModelSpec,
    n: u32,
    epsilon: f64,
    seeds: usize,
    master_seed: u64,
) -> Result<Vec<(u64, CensusReport)>, StructureError> {
    lattice_box(spec, n)?;
    let model = spec.prepare(n, master_seed)?;
    (0..seeds as u64)
        .into_par_iter()
        .map(|i| {
            let seed = unit_seed(master_seed, n as u64, i);
            let g = model.sample(seed)?.graph;
            Ok((seed, component_census(&g, n, epsilon)?))
        })
        .collect()
}

/// Annulus `x + (B_ℓ \ B_{⌊ℓ/4⌋})` around a lattice site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSpec {
    pub center: Vec<i64>,
    pub scale: u32,
}

impl AnnulusSpec {
    pub fn new(center: Vec<i64>, scale: u32) -> Result<Self, StructureError> {
        if scale < 4 {
            return Err(StructureError::BadScale(scale));
        }
        Ok(AnnulusSpec { center, scale })
    }

    fn offset_in(&self, x: &[f64], r: u32) -> bool {
        let r = r as f64;
        x.iter().zip(&self.center).all(|(&c, &o)| {
            let y = c - o as f64;
            y >= -r && y < r
        })
    }
}

/// Components of `g ∩ (x + B_{ℓ+1})` that meet both the inner box
/// `x + B_{⌊ℓ/4⌋}` and the layer just outside `x + B_ℓ`.
pub fn annulus_crossing_components(g: &Graph, spec: &AnnulusSpec) -> Result<usize, StructureError> {
    let emb = g.embedding().ok_or(StructureError::NoEmbedding)?;
    if emb.dim() != spec.center.len() {
        return Err(GraphError::DimensionMismatch { expected: spec.center.len(), found: emb.dim() }.into());
    }
    let nv = g.vertex_count();
    let pts: Vec<Vec<f64>> = (0..nv).map(|v| emb.point(v)).collect();
    let region: Vec<bool> = pts.iter().map(|x| spec.offset_in(x, spec.scale + 1)).collect();
    let mut ds = DisjointSets::new(nv);
    for (a, b) in g.edges() {
        if region[a] && region[b] {
            ds.union(a, b);
        }
    }
    let inner = spec.scale / 4;
    let mut touches_inner = vec![false; nv];
    let mut touches_outer = vec![false; nv];
    for v in (0..nv).filter(|&v| region[v]) {
        let r = ds.find(v);
        if spec.offset_in(&pts[v], inner) {
            touches_inner[r] = true;
        }
        if !spec.offset_in(&pts[v], spec.scale) {
            touches_outer[r] = true;
        }
    }
    Ok((0..nv).filter(|&r| touches_inner[r] && touches_outer[r]).count())
}

/// Whether every pair of components of `g ∩ B_n` with metric diameter
/// above `n/10` is joined inside `g`, a sample on `B_{2n}`.
pub fn uniqueness_event_on(g: &Graph, n: u32) -> Result<bool, StructureError> {
    let emb = g.embedding().ok_or(StructureError::NoEmbedding)?;
    let inner = BoxSpec::lattice(n, emb.dim());
    let keep = vertices_in_box(g, &inner)?;
    let mut in_box = vec![false; g.vertex_count()];
    for &v in &keep {
        in_box[v] = true;
    }
    let mut local = DisjointSets::new(g.vertex_count());
    let mut global = DisjointSets::new(g.vertex_count());
    for (a, b) in g.edges() {
        global.union(a, b);
        if in_box[a] && in_box[b] {
            local.union(a, b);
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for &v in &keep {
        groups.entry(local.find(v)).or_default().push(v);
    }
    let threshold = n as f64 / 10.0;
    let mut label = None;
    for vs in groups.values() {
        if emb.linf_diameter(vs) > threshold {
            let l = global.find(vs[0]);
            if *label.get_or_insert(l) != l {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Sample the model on `B_{2n}` with `seed` and test the uniqueness event
/// at scale `n`.
pub fn uniqueness_event(spec: &ModelSpec, n: u32, seed: u64) -> Result<bool, StructureError> {
    lattice_box(spec, 2 * n)?;
    let g = spec.prepare(2 * n, seed)?.sample(seed)?.graph;
    uniqueness_event_on(&g, n)
}

/// Per-scale mean and variance of `|G_n| / |B_n|` over `seeds` samples.
pub fn density_series(
    spec: &ModelSpec,
    n_list: &[u32],
    seeds: usize,
    master_seed: u64,
) -> Result<Vec<DensityPoint>, StructureError> {
    if seeds < 2 {
        return Err(StructureError::InsufficientSamples { needed: 2, got: seeds });
    }
    let mut samples = Vec::with_capacity(n_list.len() * seeds);
    for &n in n_list {
        let model = spec.prepare(n, master_seed)?;
        let batch = (0..seeds as u64)
            .into_par_iter()
            .map(|i| {
                let gen = model.sample(unit_seed(master_seed, n as u64, i))?;
                let size = maximal_component(&gen.graph).map_or(0, |c| c.size());
                Ok((n, size as f64, gen.normalizer.reference_size()))
            })
            .collect::<Result<Vec<_>, StructureError>>()?;
        samples.extend(batch);
    }
    Ok(density_table(&samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_bond_percolation;
    use crate::graph::{lattice_box_graph, Embedding};

    #[test]
    fn full_box_census() {
        let g = lattice_box_graph(&BoxSpec::lattice(8, 2));
        let r = component_census(&g, 8, 0.5).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].size, 256);
        assert!(r.passes());
        assert_eq!(r.shell_thickness, 3);
    }

    #[test]
    fn empty_bonds_have_no_giant() {
        let bx = BoxSpec::lattice(16, 2);
        let g = gen_bond_percolation(&bx, 0.0, 1).unwrap();
        let r = component_census(&g, 16, 0.5).unwrap();
        assert!(!r.verdict_unique_giant);
        assert!(r.verdict_others);
        assert_eq!(r.verdicts_from_rows(), (r.verdict_unique_giant, r.verdict_others));
    }

    #[test]
    fn census_guards() {
        let g = lattice_box_graph(&BoxSpec::lattice(2, 2));
        assert_eq!(component_census(&g, 2, 1.0), Err(StructureError::BadEpsilon(1.0)));
        assert_eq!(component_census(&Graph::path(3), 2, 0.5), Err(StructureError::NoEmbedding));
    }

    #[test]
    fn census_is_deterministic() {
        let g = gen_bond_percolation(&BoxSpec::lattice(16, 2), 0.6, 5).unwrap();
        assert_eq!(component_census(&g, 16, 0.5), component_census(&g, 16, 0.5));
    }

    #[test]
    fn annulus_counts() {
        let spec = AnnulusSpec::new(vec![0, 0], 8).unwrap();
        let full = lattice_box_graph(&BoxSpec::lattice(10, 2));
        assert_eq!(annulus_crossing_components(&full, &spec).unwrap(), 1);
        let empty = Graph::empty().with_embedding(Embedding::Lattice { dim: 2, coords: vec![] }).unwrap();
        assert_eq!(annulus_crossing_components(&empty, &spec).unwrap(), 0);
        // a straight path from the centre out to x = 9
        let coords: Vec<i64> = (0..10).flat_map(|x| [x, 0]).collect();
        let line = Graph::path(10).with_embedding(Embedding::Lattice { dim: 2, coords }).unwrap();
        assert_eq!(annulus_crossing_components(&line, &spec).unwrap(), 1);
        assert_eq!(AnnulusSpec::new(vec![0, 0], 3), Err(StructureError::BadScale(3)));
    }

    #[test]
    fn uniqueness_extremes() {
        let full = ModelSpec::Bond { d: 2, p: 1.0 };
        assert!(uniqueness_event(&full, 12, 0).unwrap());
        let none = ModelSpec::Site { d: 2, p: 0.0 };
        assert!(uniqueness_event(&none, 12, 0).unwrap());
        assert!(matches!(
            uniqueness_event(&ModelSpec::Rgg { d: 2, radius: 1.0 }, 4, 0),
            Err(StructureError::NotLattice("rgg"))
        ));
    }

    #[test]
    fn two_separated_bars_fail_uniqueness() {
        // Two vertical bars in B_20 that never meet.
        let mut coords = Vec::new();
        let mut edges = Vec::new();
        for x in [-5i64, 5] {
            for y in -10..10 {
                let v = coords.len() / 2;
                coords.extend([x, y]);
                if y > -10 {
                    edges.push((v - 1, v));
                }
            }
        }
        let g = Graph::from_edges(coords.len() / 2, edges)
            .unwrap()
            .with_embedding(Embedding::Lattice { dim: 2, coords })
            .unwrap();
        assert!(!uniqueness_event_on(&g, 10).unwrap());
    }

    #[test]
    fn density_extremes() {
        let full = density_series(&ModelSpec::Bond { d: 2, p: 1.0 }, &[2, 4], 3, 0).unwrap();
        assert!(full.iter().all(|p| p.mean == 1.0 && p.variance == 0.0));
        let none = density_series(&ModelSpec::Site { d: 2, p: 0.0 }, &[4], 3, 0).unwrap();
        assert_eq!(none[0].mean, 0.0);
        assert!(density_series(&ModelSpec::Bond { d: 2, p: 0.5 }, &[4], 1, 0).is_err());
    }
}
