//! Random geometric graphs and the degree of Euclidean minimum spanning
//! trees of their components.
//!
//! `cargo run --release --example rgg_mst`

use metastab::generators::gen_rgg;
use metastab::graph::{connected_components, induced_subgraph, BoxSpec};
use metastab::structure::{mst_degree_check, prim_mst_length};

fn main() {
    for radius in [1.0, 1.5, 2.0] {
        let g = gen_rgg(&BoxSpec::continuum(6, 2), radius, 5).unwrap();
        let components = connected_components(&g);
        let largest = &components[0];
        let sub = induced_subgraph(&g, &largest.vertices).unwrap();
        let mst = mst_degree_check(&sub).unwrap();
        println!(
            "R = {radius}: {} points, {} edges, {} components; largest {} with MST length {:.3} (Prim {:.3}), max degree {}",
            g.vertex_count(),
            g.edge_count(),
            components.len(),
            largest.size(),
            mst.total_length,
            prim_mst_length(&sub).unwrap(),
            mst.max_degree
        );
    }
}
