//! Bernoulli bond and site percolation restricted to a lattice box.

use rand::Rng;

use super::GenError;
use crate::graph::{BoxFlavor, BoxSpec, Embedding, Graph, Provenance, VertexId};
use crate::rng::{stream, StreamRole};

fn check_box(bx: &BoxSpec, p: f64) -> Result<(), GenError> {
    if bx.flavor != BoxFlavor::Lattice {
        return Err(GenError::WrongBoxFlavor);
    }
    if bx.d < 2 {
        return Err(GenError::BadDimension { d: bx.d, min: 2 });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(GenError::InvalidParameter(format!("p = {p} is not a probability")));
    }
    Ok(())
}

/// Bond percolation on `B_n`: every site is kept, every nearest-neighbour
/// edge inside the box is open independently with probability `p`.
///
/// Edges are drawn in scan order (site-major, axis-minor) from the graph
/// stream of `seed`.
pub fn gen_bond_percolation(bx: &BoxSpec, p: f64, seed: u64) -> Result<Graph, GenError> {
    check_box(bx, p)?;
    let mut rng = stream(seed, 0, StreamRole::Graph);
    let nsites = bx.site_count();
    let mut adj: Vec<Vec<VertexId>> = vec![Vec::new(); nsites];
    let mut x = vec![0i64; bx.d];
    let strides: Vec<usize> = (0..bx.d).map(|a| bx.stride(a)).collect();
    for i in 0..nsites {
        bx.site_coords_into(i, &mut x);
        for axis in 0..bx.d {
            if x[axis] + 1 < bx.n as i64 && rng.random::<f64>() < p {
                let j = i + strides[axis];
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    let coords = (0..nsites).flat_map(|i| bx.site_coords(i)).collect();
    let g = Graph::from_adjacency_unchecked(adj)
        .with_embedding(Embedding::Lattice { dim: bx.d, coords })?
        .with_provenance(Provenance::new("bond", bx.n as u64, seed).with_param("p", p));
    Ok(g)
}

/// Site percolation on `B_n`: each site is open independently with
/// probability `p`; the graph is induced by the open sites.
pub fn gen_site_percolation(bx: &BoxSpec, p: f64, seed: u64) -> Result<Graph, GenError> {
    check_box(bx, p)?;
    if bx.d == 2 {
        log::warn!("site percolation in d = 2 is outside the regime where the uniqueness estimate is known");
    }
    let mut rng = stream(seed, 0, StreamRole::Graph);
    let open: Vec<bool> = (0..bx.site_count()).map(|_| rng.random::<f64>() < p).collect();
    let g = open_sites_graph(bx, &open)
        .with_provenance(Provenance::new("site", bx.n as u64, seed).with_param("p", p));
    Ok(g)
}

/// Graph induced by the marked sites of a lattice box, ids in scan order.
pub(crate) fn open_sites_graph(bx: &BoxSpec, open: &[bool]) -> Graph {
    debug_assert_eq!(open.len(), bx.site_count());
    let mut id = vec![usize::MAX; open.len()];
    let mut sites = Vec::new();
    for (i, &o) in open.iter().enumerate() {
        if o {
            id[i] = sites.len();
            sites.push(i);
        }
    }
    let mut adj: Vec<Vec<VertexId>> = vec![Vec::new(); sites.len()];
    let mut x = vec![0i64; bx.d];
    let mut coords = Vec::with_capacity(sites.len() * bx.d);
    for (v, &i) in sites.iter().enumerate() {
        bx.site_coords_into(i, &mut x);
        coords.extend_from_slice(&x);
        for axis in 0..bx.d {
            if x[axis] + 1 < bx.n as i64 {
                let j = i + bx.stride(axis);
                if open[j] {
                    adj[v].push(id[j]);
                    adj[id[j]].push(v);
                }
            }
        }
    }
    Graph::from_adjacency_unchecked(adj)
        .with_embedding(Embedding::Lattice { dim: bx.d, coords })
        .expect("coordinates match open sites")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{connected_components, lattice_box_graph};

    #[test]
    fn bond_extremes() {
        let bx = BoxSpec::lattice(1, 2);
        let full = gen_bond_percolation(&bx, 1.0, 3).unwrap();
        assert_eq!((full.vertex_count(), full.edge_count()), (4, 4));
        let none = gen_bond_percolation(&BoxSpec::lattice(2, 2), 0.0, 3).unwrap();
        assert_eq!((none.vertex_count(), none.edge_count()), (16, 0));
        assert_eq!(connected_components(&none).len(), 16);
    }

    #[test]
    fn bond_rejects_low_dimension() {
        let r = gen_bond_percolation(&BoxSpec::lattice(3, 1), 0.5, 1);
        assert!(matches!(r, Err(GenError::BadDimension { d: 1, min: 2 })));
    }

    #[test]
    fn site_extremes() {
        let bx = BoxSpec::lattice(2, 3);
        let full = gen_site_percolation(&bx, 1.0, 5).unwrap();
        let lattice = lattice_box_graph(&bx);
        assert_eq!(full.vertex_count(), lattice.vertex_count());
        assert_eq!(full.edge_count(), lattice.edge_count());
        assert!(gen_site_percolation(&bx, 0.0, 5).unwrap().is_empty());
    }

    #[test]
    fn same_seed_same_graph() {
        let bx = BoxSpec::lattice(8, 2);
        assert_eq!(gen_bond_percolation(&bx, 0.6, 42).unwrap(), gen_bond_percolation(&bx, 0.6, 42).unwrap());
        assert_ne!(gen_bond_percolation(&bx, 0.6, 42).unwrap(), gen_bond_percolation(&bx, 0.6, 43).unwrap());
    }

    #[test]
    fn bond_open_count_is_binomial() {
        let bx = BoxSpec::lattice(32, 2);
        // |E(B_32)| counted by enumerating positive-direction neighbours.
        let mut total_edges = 0usize;
        for i in 0..bx.site_count() {
            let x = bx.site_coords(i);
            for axis in 0..2 {
                let mut y = x.clone();
                y[axis] += 1;
                total_edges += bx.contains_site(&y) as usize;
            }
        }
        assert_eq!(total_edges, 8064);
        let p = 0.6;
        let seeds = 100;
        let mean = (0..seeds)
            .map(|s| gen_bond_percolation(&bx, p, s).unwrap().edge_count() as f64)
            .sum::<f64>()
            / seeds as f64;
        let se = (total_edges as f64 * p * (1.0 - p) / seeds as f64).sqrt();
        assert!((mean - p * total_edges as f64).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn site_open_count_is_binomial() {
        let bx = BoxSpec::lattice(16, 3);
        let p = 0.7;
        let seeds = 100;
        let mean = (0..seeds)
            .map(|s| gen_site_percolation(&bx, p, s).unwrap().vertex_count() as f64)
            .sum::<f64>()
            / seeds as f64;
        let nsites = 32f64.powi(3);
        let se = (nsites * p * (1.0 - p) / seeds as f64).sqrt();
        assert!((mean - p * nsites).abs() < 3.0 * se, "mean {mean}");
    }
}
