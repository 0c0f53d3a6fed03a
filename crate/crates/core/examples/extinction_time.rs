//! Monte Carlo extinction times against the exact absorbing-chain solution.
//!
//! `cargo run --release --example extinction_time`

use metastab::contact::{estimate_mean_extinction, exact_expected_extinction, ContactConfig};
use metastab::estimators::{ks_statistic, KS_CRITICAL_1PCT};
use metastab::graph::Graph;

fn main() {
    let graphs = [("P3", Graph::path(3)), ("C4", Graph::cycle(4)), ("S4", Graph::star(4)), ("K5", Graph::complete(5))];
    println!("{:<4} {:>6} {:>12} {:>12} {:>8} {:>6}", "G", "lambda", "exact", "monte carlo", "se", "z");
    for (name, g) in &graphs {
        for lambda in [0.5, 1.0, 2.0] {
            let exact = exact_expected_extinction(g, lambda).unwrap();
            let cfg = ContactConfig::new(lambda).with_time_cap(None);
            let est = estimate_mean_extinction(g, &cfg, 20_000, 1).unwrap();
            let z = (est.mean - exact) / est.std_error;
            println!("{name:<4} {lambda:>6} {exact:>12.5} {:>12.5} {:>8.4} {z:>6.2}", est.mean, est.std_error);
        }
    }

    // A lone vertex dies at rate 1, so τ ~ Exp(1).
    let est = estimate_mean_extinction(&Graph::path(1), &ContactConfig::new(2.0), 10_000, 2).unwrap();
    let d = ks_statistic(&est.samples, |t| 1.0 - (-t).exp());
    let scaled = d * (est.samples.len() as f64).sqrt();
    println!("single vertex: sqrt(n)·KS = {scaled:.3} (1% critical value {KS_CRITICAL_1PCT})");
}
