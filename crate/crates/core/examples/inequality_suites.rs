//! The exponential upper bound, the tail bound and the supermultiplicative
//! defect on small graphs.
//!
//! `cargo run --release --example inequality_suites`

use metastab::estimators::{supermult_check, supermult_exact, tail_bound_check, upper_bound_check};
use metastab::graph::Graph;

fn main() {
    for (name, g) in [("P5", Graph::path(5)), ("C4", Graph::cycle(4)), ("K4", Graph::complete(4))] {
        for lambda in [0.5, 2.0, 4.0] {
            let r = upper_bound_check(&g, lambda).unwrap();
            println!("{name} lambda={lambda}: log E = {:.3} <= {:.3}: {}", r.log_mean, r.log_bound, r.holds);
        }
    }

    let tail = tail_bound_check(&Graph::star(4), 2.0, 50_000, None, 3).unwrap();
    println!("S4 tail bound, E = {:.4}", tail.exact_mean);
    for p in &tail.points {
        println!("  t = {:7.3}: P(tau <= t) = {:.4} (se {:.4}) vs t/E = {:.4}", p.t, p.empirical_cdf, p.se, p.bound);
    }
    println!("  violations: {:?}", tail.violations);

    let parts: Vec<Vec<usize>> = (0..3).map(|i| vec![2 * i, 2 * i + 1]).collect();
    let exact = supermult_exact(&Graph::path(6), &parts, 2.0).unwrap();
    println!(
        "P6 vs 3 x P2, exact: D = {:.4}, correction {:.3}, D + correction = {:.3}",
        exact.defect, exact.correction, exact.adjusted_defect
    );
    let mc = supermult_check(&Graph::path(6), &parts, 2.0, 20_000, 4, None).unwrap();
    println!(
        "P6 vs 3 x P2, coupled: D = {:.4}, max part dominated {}, pathwise violations {}",
        mc.defect, mc.dominates_max_part, mc.pathwise_violations
    );
}
