//! Lattice boxes, percolation samples and the text graph format.
//!
//! `cargo run --release --example graph_io`

use metastab::generators::gen_site_percolation;
use metastab::graph::{box_restrict, lattice_box_graph, maximal_component, read_graph, write_graph, BoxSpec};

fn main() {
    let bx = BoxSpec::lattice(2, 2);
    let full = lattice_box_graph(&bx);
    println!("B_2 in Z^2: {} sites, {} edges", full.vertex_count(), full.edge_count());

    let g = gen_site_percolation(&BoxSpec::lattice(4, 2), 0.6, 8).unwrap();
    let inner = box_restrict(&g, &BoxSpec::lattice(2, 2)).unwrap();
    let giant = maximal_component(&g).unwrap();
    println!("site percolation p = 0.6 on B_4: {} open sites, {} in B_2, largest component {}",
        g.vertex_count(), inner.vertex_count(), giant.size());

    let mut text = Vec::new();
    write_graph(&inner, &mut text).unwrap();
    print!("{}", String::from_utf8_lossy(&text));
    assert_eq!(read_graph(text.as_slice()).unwrap(), inner);
}
