//! Random geometric graph on a Poisson point process of intensity one.

use std::collections::HashMap;

use rand::Rng;

use super::GenError;
use crate::graph::{BoxFlavor, BoxSpec, Embedding, Graph, Provenance, VertexId};
use crate::rng::{poisson, stream, StreamRole};

/// Poisson(`(2n)^d`) uniform points in `[-n, n]^d`, joined when their
/// Euclidean distance is strictly below `radius`.
///
/// Neighbour search hashes points into cells of width `radius` and only
/// compares points in adjacent cells.
pub fn gen_rgg(bx: &BoxSpec, radius: f64, seed: u64) -> Result<Graph, GenError> {
    if bx.flavor != BoxFlavor::Continuum {
        return Err(GenError::WrongBoxFlavor);
    }
    if bx.d < 2 {
        return Err(GenError::BadDimension { d: bx.d, min: 2 });
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(GenError::InvalidParameter(format!("radius {radius} must be positive")));
    }
    let d = bx.d;
    let half = bx.n as f64;
    let mut rng = stream(seed, 0, StreamRole::Graph);
    let count = poisson(&mut rng, bx.measure()) as usize;
    let coords: Vec<f64> = (0..count * d)
        .map(|_| -half + 2.0 * half * rng.random::<f64>())
        .collect();
    let adj = radius_neighbors(&coords, d, radius);
    let g = Graph::from_adjacency_unchecked(adj)
        .with_embedding(Embedding::Continuum { dim: d, coords })?
        .with_provenance(Provenance::new("rgg", bx.n as u64, seed).with_param("R", radius));
    Ok(g)
}

/// Adjacency for the relation `|x - y| < radius` via a cell hash.
pub(crate) fn radius_neighbors(coords: &[f64], d: usize, radius: f64) -> Vec<Vec<VertexId>> {
    let count = coords.len() / d;
    let extent = coords.iter().fold(1.0f64, |m, c| m.max(c.abs()));
    // Cell width never drops so low that cell keys overflow.
    let width = radius.max(extent * 1e-9);
    let cell_of = |i: usize| -> Vec<i64> {
        coords[i * d..(i + 1) * d].iter().map(|&c| (c / width).floor() as i64).collect()
    };
    let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for i in 0..count {
        cells.entry(cell_of(i)).or_default().push(i);
    }
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(d as u32))
        .map(|mut k| {
            (0..d)
                .map(|_| {
                    let o = (k % 3) as i64 - 1;
                    k /= 3;
                    o
                })
                .collect()
        })
        .collect();
    let r2 = radius * radius;
    let mut adj: Vec<Vec<VertexId>> = vec![Vec::new(); count];
    let mut key = vec![0i64; d];
    for i in 0..count {
        let home = cell_of(i);
        let xi = &coords[i * d..(i + 1) * d];
        for off in &offsets {
            for a in 0..d {
                key[a] = home[a] + off[a];
            }
            if let Some(members) = cells.get(&key) {
                for &j in members {
                    if j <= i {
                        continue;
                    }
                    let xj = &coords[j * d..(j + 1) * d];
                    let dist2: f64 = xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum();
                    if dist2 < r2 {
                        adj[i].push(j);
                        adj[j].push(i);
                    }
                }
            }
        }
    }
    adj
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_edges(g: &Graph, radius: f64) -> Vec<(usize, usize)> {
        let emb = g.embedding().unwrap();
        let nv = g.vertex_count();
        let mut out = Vec::new();
        for a in 0..nv {
            let pa = emb.point(a);
            for b in a + 1..nv {
                let pb = emb.point(b);
                let d2: f64 = pa.iter().zip(&pb).map(|(x, y)| (x - y) * (x - y)).sum();
                if d2 < radius * radius {
                    out.push((a, b));
                }
            }
        }
        out
    }

    #[test]
    fn matches_brute_force() {
        for (n, d, r) in [(4, 2, 1.3), (2, 3, 0.9), (6, 2, 0.5)] {
            let g = gen_rgg(&BoxSpec::continuum(n, d), r, 17).unwrap();
            assert!(g.vertex_count() <= 500);
            assert_eq!(g.edges().collect::<Vec<_>>(), brute_force_edges(&g, r));
        }
    }

    #[test]
    fn huge_radius_gives_complete_graph() {
        let n = 3;
        let g = gen_rgg(&BoxSpec::continuum(n, 2), 2.0 * n as f64 * 2f64.sqrt() + 1e-9, 8).unwrap();
        let k = g.vertex_count();
        assert_eq!(g.edge_count(), k * (k - 1) / 2);
    }

    #[test]
    fn tiny_radius_gives_edgeless_graph() {
        let g = gen_rgg(&BoxSpec::continuum(3, 2), 1e-12, 8).unwrap();
        assert!(g.vertex_count() > 0);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn point_count_has_poisson_mean() {
        let bx = BoxSpec::continuum(16, 2);
        let seeds = 200;
        let mean = (0..seeds)
            .map(|s| gen_rgg(&bx, 0.01, s).unwrap().vertex_count() as f64)
            .sum::<f64>()
            / seeds as f64;
        let se = (1024.0 / seeds as f64).sqrt();
        assert!((mean - 1024.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(gen_rgg(&BoxSpec::lattice(2, 2), 1.0, 0), Err(GenError::WrongBoxFlavor)));
        assert!(matches!(gen_rgg(&BoxSpec::continuum(2, 1), 1.0, 0), Err(GenError::BadDimension { .. })));
        assert!(gen_rgg(&BoxSpec::continuum(2, 2), 0.0, 0).is_err());
    }
}
