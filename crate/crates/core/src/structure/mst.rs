//! Euclidean minimum spanning trees of embedded graphs.

use serde::{Deserialize, Serialize};

use super::StructureError;
use crate::graph::{DisjointSets, Graph, VertexId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MstReport {
    pub max_degree: usize,
    pub total_length: f64,
    pub edges: Vec<(VertexId, VertexId)>,
}

fn edge_lengths(g: &Graph) -> Result<Vec<(f64, VertexId, VertexId)>, StructureError> {
    let emb = g.embedding().ok_or(StructureError::NoEmbedding)?;
    Ok(g.edges()
        .map(|(a, b)| {
            let (p, q) = (emb.point(a), emb.point(b));
            let len = p.iter().zip(&q).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            (len, a, b)
        })
        .collect())
}

/// Kruskal's algorithm on Euclidean edge lengths; equal lengths are
/// ordered by endpoint ids, which makes the tree unique.
pub fn mst_degree_check(g: &Graph) -> Result<MstReport, StructureError> {
    let mut weighted = edge_lengths(g)?;
    if !g.is_connected() {
        return Err(StructureError::NotConnected);
    }
    weighted.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let nv = g.vertex_count();
    let mut ds = DisjointSets::new(nv);
    let mut degree = vec![0usize; nv];
    let mut edges = Vec::with_capacity(nv - 1);
    let mut total_length = 0.0;
    for (len, a, b) in weighted {
        if ds.union(a, b) {
            degree[a] += 1;
            degree[b] += 1;
            total_length += len;
            edges.push((a, b));
            if edges.len() + 1 == nv {
                break;
            }
        }
    }
    Ok(MstReport { max_degree: degree.into_iter().max().unwrap_or(0), total_length, edges })
}

/// Total length of the minimum spanning tree by Prim's algorithm, as an
/// independent cross-check of [`mst_degree_check`].
pub fn prim_mst_length(g: &Graph) -> Result<f64, StructureError> {
    let emb = g.embedding().ok_or(StructureError::NoEmbedding)?;
    if !g.is_connected() {
        return Err(StructureError::NotConnected);
    }
    let nv = g.vertex_count();
    let mut in_tree = vec![false; nv];
    let mut best = vec![f64::INFINITY; nv];
    best[0] = 0.0;
    let mut total = 0.0;
    for _ in 0..nv {
        let v = (0..nv).filter(|&v| !in_tree[v]).min_by(|&a, &b| best[a].total_cmp(&best[b])).expect("vertex left");
        in_tree[v] = true;
        total += best[v];
        let p = emb.point(v);
        for &w in g.neighbors(v) {
            let len = p.iter().zip(emb.point(w)).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            if !in_tree[w] && len < best[w] {
                best[w] = len;
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_rgg;
    use crate::graph::{induced_subgraph, maximal_component, BoxSpec, Embedding};
    use crate::rng::{stream, StreamRole};
    use rand::Rng;

    fn continuum(g: Graph, coords: Vec<f64>, dim: usize) -> Graph {
        g.with_embedding(Embedding::Continuum { dim, coords }).unwrap()
    }

    #[test]
    fn collinear_points_form_a_path() {
        let g = continuum(Graph::complete(3), vec![0.0, 0.0, 1.0, 0.0, 2.5, 0.0], 2);
        let r = mst_degree_check(&g).unwrap();
        assert_eq!(r.max_degree, 2);
        assert_eq!(r.edges, vec![(0, 1), (1, 2)]);
        assert_eq!(r.total_length, 2.5);
    }

    #[test]
    fn single_vertex_and_guards() {
        let g = continuum(Graph::path(1), vec![0.3, 0.3], 2);
        assert_eq!(mst_degree_check(&g).unwrap().max_degree, 0);
        assert_eq!(mst_degree_check(&Graph::path(2)), Err(StructureError::NoEmbedding));
        let split = continuum(Graph::from_edges(2, []).unwrap(), vec![0.0, 0.0, 5.0, 5.0], 2);
        assert_eq!(mst_degree_check(&split), Err(StructureError::NotConnected));
    }

    #[test]
    fn kruskal_agrees_with_prim_and_beats_bfs_trees() {
        for seed in 0..20 {
            let mut rng = stream(seed, 0, StreamRole::Graph);
            let k = rng.random_range(2..25);
            let coords: Vec<f64> = (0..2 * k).map(|_| rng.random::<f64>()).collect();
            let g = continuum(Graph::complete(k), coords, 2);
            let r = mst_degree_check(&g).unwrap();
            assert_eq!(r.edges.len(), k - 1);
            let tree = Graph::from_edges(k, r.edges.iter().copied()).unwrap();
            assert!(tree.is_connected());
            assert!((r.total_length - prim_mst_length(&g).unwrap()).abs() < 1e-9);
            // star from vertex 0 is another spanning tree
            let emb = g.embedding().unwrap();
            let star: f64 = (1..k)
                .map(|v| emb.point(0).iter().zip(emb.point(v)).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt())
                .sum();
            assert!(r.total_length <= star + 1e-12);
        }
    }

    #[test]
    fn rgg_components_have_bounded_mst_degree() {
        for seed in 0..10 {
            let g = gen_rgg(&BoxSpec::continuum(5, 2), 1.2, seed).unwrap();
            let c = maximal_component(&g).unwrap();
            let sub = induced_subgraph(&g, &c.vertices).unwrap();
            assert!(mst_degree_check(&sub).unwrap().max_degree <= 6);
        }
    }
}
