//! Finite simple graphs with optional lattice or Euclidean embedding.
//!
//! Vertices are dense integers `0..|V|`. Adjacency lists are kept sorted,
//! symmetric, loop-free and duplicate-free; every constructor enforces this.
//! Graph values are immutable after construction and are shared read-only
//! across worker threads.

mod io;
mod lattice;
mod union_find;

pub use io::{read_graph, write_graph, ParseGraphError};
pub use lattice::{BoxFlavor, BoxSpec};
pub use union_find::DisjointSets;

use thiserror::Error;

pub type VertexId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(VertexId),
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(VertexId, VertexId),
    #[error("graph has no coordinate embedding")]
    NoEmbedding,
    #[error("embedding dimension {found} does not match expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("embedding has {found} coordinates for {vertices} vertices in dimension {dim}")]
    BadEmbedding { vertices: usize, dim: usize, found: usize },
}

/// Vertex coordinates, stored row-major (`dim` values per vertex).
#[derive(Clone, Debug, PartialEq)]
pub enum Embedding {
    Lattice { dim: usize, coords: Vec<i64> },
    Continuum { dim: usize, coords: Vec<f64> },
}

impl Embedding {
    pub fn dim(&self) -> usize {
        match self {
            Embedding::Lattice { dim, .. } | Embedding::Continuum { dim, .. } => *dim,
        }
    }

    fn len(&self) -> usize {
        match self {
            Embedding::Lattice { coords, .. } => coords.len(),
            Embedding::Continuum { coords, .. } => coords.len(),
        }
    }

    /// Coordinates of vertex `v` as reals.
    pub fn point(&self, v: VertexId) -> Vec<f64> {
        match self {
            Embedding::Lattice { dim, coords } => {
                coords[v * dim..(v + 1) * dim].iter().map(|&c| c as f64).collect()
            }
            Embedding::Continuum { dim, coords } => coords[v * dim..(v + 1) * dim].to_vec(),
        }
    }

    /// Integer coordinates of vertex `v`, if this is a lattice embedding.
    pub fn site(&self, v: VertexId) -> Option<&[i64]> {
        match self {
            Embedding::Lattice { dim, coords } => Some(&coords[v * dim..(v + 1) * dim]),
            Embedding::Continuum { .. } => None,
        }
    }

    fn restrict(&self, keep: &[VertexId]) -> Embedding {
        match self {
            Embedding::Lattice { dim, coords } => Embedding::Lattice {
                dim: *dim,
                coords: keep
                    .iter()
                    .flat_map(|&v| coords[v * dim..(v + 1) * dim].iter().copied())
                    .collect(),
            },
            Embedding::Continuum { dim, coords } => Embedding::Continuum {
                dim: *dim,
                coords: keep
                    .iter()
                    .flat_map(|&v| coords[v * dim..(v + 1) * dim].iter().copied())
                    .collect(),
            },
        }
    }

    /// ℓ∞ diameter of a vertex set: the largest coordinate spread.
    pub fn linf_diameter(&self, vs: &[VertexId]) -> f64 {
        let dim = self.dim();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &v in vs {
            for (axis, c) in self.point(v).into_iter().enumerate() {
                lo[axis] = lo[axis].min(c);
                hi[axis] = hi[axis].max(c);
            }
        }
        (0..dim).map(|a| hi[a] - lo[a]).fold(0.0, f64::max)
    }
}

/// Generator name, parameters, scale and seed a graph came from.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Provenance {
    pub model: String,
    pub n: u64,
    pub seed: u64,
    pub params: Vec<(String, f64)>,
}

impl Provenance {
    pub fn new(model: impl Into<String>, n: u64, seed: u64) -> Self {
        Provenance { model: model.into(), n, seed, params: Vec::new() }
    }

    pub fn with_param(mut self, key: impl Into<String>, value: f64) -> Self {
        self.params.push((key.into(), value));
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    adj: Vec<Vec<VertexId>>,
    embedding: Option<Embedding>,
    provenance: Provenance,
}

impl Graph {
    /// Build from an edge list, rejecting loops, duplicates and unknown ids.
    pub fn from_edges(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self, GraphError> {
        let mut adj = vec![Vec::new(); vertex_count];
        for (a, b) in edges {
            if a >= vertex_count {
                return Err(GraphError::UnknownVertex(a));
            }
            if b >= vertex_count {
                return Err(GraphError::UnknownVertex(b));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        for (v, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(GraphError::DuplicateEdge(v.min(w[0]), v.max(w[0])));
            }
        }
        Ok(Graph { adj, embedding: None, provenance: Provenance::default() })
    }

    /// Adjacency lists already known to be simple and symmetric; only sorts.
    pub(crate) fn from_adjacency_unchecked(mut adj: Vec<Vec<VertexId>>) -> Self {
        for list in &mut adj {
            list.sort_unstable();
        }
        debug_assert!(adj.iter().enumerate().all(|(v, l)| {
            l.windows(2).all(|w| w[0] < w[1]) && l.iter().all(|&w| w != v && adj[w].binary_search(&v).is_ok())
        }));
        Graph { adj, embedding: None, provenance: Provenance::default() }
    }

    pub fn empty() -> Self {
        Graph { adj: Vec::new(), embedding: None, provenance: Provenance::default() }
    }

    /// Path `0 - 1 - ... - (k-1)`.
    pub fn path(k: usize) -> Self {
        Graph::from_edges(k, (1..k).map(|i| (i - 1, i))).expect("path is simple")
    }

    /// Cycle on `k >= 3` vertices.
    pub fn cycle(k: usize) -> Self {
        assert!(k >= 3, "cycle needs at least 3 vertices");
        Graph::from_edges(k, (0..k).map(|i| (i, (i + 1) % k))).expect("cycle is simple")
    }

    /// Star with centre 0 and `leaves` leaves.
    pub fn star(leaves: usize) -> Self {
        Graph::from_edges(leaves + 1, (1..=leaves).map(|i| (0, i))).expect("star is simple")
    }

    pub fn complete(k: usize) -> Self {
        let edges = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b)));
        Graph::from_edges(k, edges).expect("complete graph is simple")
    }

    pub fn with_embedding(mut self, embedding: Embedding) -> Result<Self, GraphError> {
        let expected = self.adj.len() * embedding.dim();
        if embedding.len() != expected {
            return Err(GraphError::BadEmbedding {
                vertices: self.adj.len(),
                dim: embedding.dim(),
                found: embedding.len(),
            });
        }
        self.embedding = Some(embedding);
        Ok(self)
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        a < self.adj.len() && self.adj[a].binary_search(&b).is_ok()
    }

    /// Edges `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(a, l)| l.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
    }

    pub fn embedding(&self) -> Option<&Embedding> {
        self.embedding.as_ref()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn is_connected(&self) -> bool {
        !self.is_empty() && connected_components(self).len() == 1
    }
}

/// A connected component, identified by its sorted vertex set.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub vertices: Vec<VertexId>,
    /// ℓ∞ metric diameter when the parent graph is embedded.
    pub metric_diameter: Option<f64>,
}

impl Component {
    pub fn size(&self) -> usize {
        self.vertices.len()
    }

    pub fn min_vertex(&self) -> VertexId {
        self.vertices[0]
    }
}

/// Partition the vertex set into connected components, ordered by their
/// smallest vertex id.
pub fn connected_components(g: &Graph) -> Vec<Component> {
    let nv = g.vertex_count();
    let mut ds = DisjointSets::new(nv);
    for (a, b) in g.edges() {
        ds.union(a, b);
    }
    let mut slot = vec![usize::MAX; nv];
    let mut groups: Vec<Vec<VertexId>> = Vec::new();
    for v in 0..nv {
        let r = ds.find(v);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(v);
    }
    groups
        .into_iter()
        .map(|vertices| {
            let metric_diameter = g.embedding().map(|e| e.linf_diameter(&vertices));
            Component { vertices, metric_diameter }
        })
        .collect()
}

/// A largest component; ties go to the one with the smallest vertex id.
pub fn maximal_component(g: &Graph) -> Result<Component, GraphError> {
    let comps = connected_components(g);
    // Components arrive ordered by minimum id, so the first maximum wins.
    let mut best: Option<Component> = None;
    for c in comps {
        if best.as_ref().is_none_or(|b| c.size() > b.size()) {
            best = Some(c);
        }
    }
    best.ok_or(GraphError::EmptyGraph)
}

/// Induced subgraph, with the map from new ids to original ids.
///
/// New ids follow the ascending order of the original ids; duplicates in
/// `vs` are ignored.
pub fn induced_subgraph_with_map(
    g: &Graph,
    vs: &[VertexId],
) -> Result<(Graph, Vec<VertexId>), GraphError> {
    let nv = g.vertex_count();
    let mut keep: Vec<VertexId> = vs.to_vec();
    if let Some(&bad) = keep.iter().find(|&&v| v >= nv) {
        return Err(GraphError::UnknownVertex(bad));
    }
    keep.sort_unstable();
    keep.dedup();
    let mut new_id = vec![usize::MAX; nv];
    for (i, &v) in keep.iter().enumerate() {
        new_id[v] = i;
    }
    let adj = keep
        .iter()
        .map(|&v| {
            g.neighbors(v)
                .iter()
                .filter_map(|&w| (new_id[w] != usize::MAX).then_some(new_id[w]))
                .collect()
        })
        .collect();
    let mut out = Graph::from_adjacency_unchecked(adj);
    out.embedding = g.embedding.as_ref().map(|e| e.restrict(&keep));
    out.provenance = g.provenance.clone();
    Ok((out, keep))
}

pub fn induced_subgraph(g: &Graph, vs: &[VertexId]) -> Result<Graph, GraphError> {
    induced_subgraph_with_map(g, vs).map(|(sub, _)| sub)
}

/// Vertices of an embedded graph that lie in `bx`.
pub fn vertices_in_box(g: &Graph, bx: &BoxSpec) -> Result<Vec<VertexId>, GraphError> {
    let emb = g.embedding().ok_or(GraphError::NoEmbedding)?;
    if emb.dim() != bx.d {
        return Err(GraphError::DimensionMismatch { expected: bx.d, found: emb.dim() });
    }
    let vs = (0..g.vertex_count())
        .filter(|&v| match emb {
            Embedding::Lattice { .. } => bx.contains_site(emb.site(v).expect("lattice")),
            Embedding::Continuum { .. } => bx.contains_point(&emb.point(v)),
        })
        .collect();
    Ok(vs)
}

/// `G ∩ B_n`: the subgraph induced by vertices whose coordinates lie in the box.
pub fn box_restrict(g: &Graph, bx: &BoxSpec) -> Result<Graph, GraphError> {
    let vs = vertices_in_box(g, bx)?;
    induced_subgraph(g, &vs)
}

/// Full nearest-neighbour lattice graph on a lattice box, vertices in
/// lexicographic scan order.
pub fn lattice_box_graph(bx: &BoxSpec) -> Graph {
    let nsites = bx.site_count();
    let mut adj = vec![Vec::with_capacity(2 * bx.d); nsites];
    let mut x = vec![0i64; bx.d];
    for i in 0..nsites {
        bx.site_coords_into(i, &mut x);
        for axis in 0..bx.d {
            if x[axis] + 1 < bx.n as i64 {
                let j = i + bx.stride(axis);
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    let coords = (0..nsites).flat_map(|i| bx.site_coords(i)).collect();
    Graph::from_adjacency_unchecked(adj)
        .with_embedding(Embedding::Lattice { dim: bx.d, coords })
        .expect("coordinates match")
}
