//! A full sweep over scales and seeds, resumed once, with the rate summary.
//!
//! `cargo run --release --example run_experiment [OUT_DIR]`

use metastab::harness::{run_experiment, ExperimentConfig};

const CONFIG: &str = r#"
lambda = 2.0
n_list = [1, 2, 3]
seeds = 6
trials = 100
time_cap = 1e4
master_seed = 2024

[model]
model = "bond"
d = 2
p = 0.45
"#;

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "target/example-run".into());
    let mut cfg = ExperimentConfig::from_toml(CONFIG).unwrap();
    let report = run_experiment(&cfg, out.as_ref(), 4).unwrap();
    println!("{} units computed in {out}", report.computed);
    cfg.resume = true;
    let again = run_experiment(&cfg, out.as_ref(), 4).unwrap();
    println!("resume: {} computed, {} reused", again.computed, again.reused);
    let s = &again.summary;
    match (&s.rate, &s.rate_error) {
        (Some(rate), _) => {
            for p in &rate.per_n {
                println!("n = {}: mean X_box {:.4} ± {:.4} over {} graphs", p.n, p.mean, p.se, p.count);
            }
            println!("theta {:?}, gamma = {:.4}, increments {:?}", rate.theta, rate.gamma, rate.relative_increments);
        }
        (None, err) => println!("no rate estimate: {err:?}"),
    }
}
