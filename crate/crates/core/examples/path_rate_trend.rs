//! `log E[τ_{P_n}] / n` from the exact solver, with the per-scale trend.
//!
//! `cargo run --release --example path_rate_trend`

use metastab::estimators::{gamma_trend, Family, ScaleValue};
use metastab::harness::validation::path_rate;

fn main() {
    let values: Vec<ScaleValue> = (2..=12).map(|n| ScaleValue { n, value: path_rate(n).unwrap() }).collect();
    for v in &values {
        println!("n = {:>2}: log E / n = {:.6}", v.n, v.value);
    }
    let even: Vec<ScaleValue> = values.iter().copied().filter(|v| v.n % 2 == 0).collect();
    let trend = gamma_trend(&even, Family::Plain).unwrap();
    println!("even scales, relative increments {:?}", trend.relative_increments);
    println!("plateau estimate {:.5} ({:.5}, {:.5})", trend.gamma, trend.gamma_tilde_ci.0, trend.gamma_tilde_ci.1);
}
