//! Exact expected extinction times from every infected set, and the
//! absorption system written out for an external solver.
//!
//! `cargo run --release --example absorption_system`

use metastab::contact::{dump_absorption_system, exact_extinction_times, ExactMethod};
use metastab::graph::Graph;

fn main() {
    let g = Graph::path(3);
    let sol = exact_extinction_times(&g, 1.0, ExactMethod::Auto).unwrap();
    println!("P3, lambda = 1, backward error {:.1e}", sol.residual);
    for (set, h) in sol.values.iter().enumerate().skip(1) {
        let members: Vec<usize> = (0..3).filter(|v| set >> v & 1 == 1).collect();
        println!("  from {members:?}: {h:.6}");
    }

    // Direct and iterative solves agree on a larger chain.
    let cycle = Graph::cycle(10);
    let direct = exact_extinction_times(&cycle, 2.0, ExactMethod::Direct).unwrap().from_full();
    let iterative = exact_extinction_times(&cycle, 2.0, ExactMethod::Iterative).unwrap().from_full();
    println!("C10, lambda = 2: direct {direct:.8}, iterative {iterative:.8}");

    let mut text = Vec::new();
    dump_absorption_system(&Graph::path(2), 2.0, &mut text).unwrap();
    print!("{}", String::from_utf8(text).unwrap());
}
