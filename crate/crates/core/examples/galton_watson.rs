//! Galton-Watson trees: generation sizes, the offspring-mean regression
//! and the tree normalisation of extinction times.
//!
//! `cargo run --release --example galton_watson`

use metastab::contact::{estimate_mean_extinction, ContactConfig};
use metastab::estimators::{compute_record, offspring_mean_regression, Record};
use metastab::generators::{gen_gw_tree, Conditioning, Normalizer, OffspringLaw};

fn main() {
    let law: OffspringLaw = "0:0.25,1:0.25,2:0.5".parse().unwrap();
    let m = law.mean();
    let trees: Vec<_> = (0..2000).map(|s| gen_gw_tree(&law, 8, Conditioning::None, s).unwrap()).collect();
    let (slope, se) = offspring_mean_regression(&trees).unwrap();
    println!("m = {m}, regression slope {slope:.4} ± {se:.4}");

    let rec = gen_gw_tree(&law, 6, Conditioning::SurvivalToN, 3).unwrap();
    println!(
        "conditioned tree: generations {:?}, |G| = {}, W proxy {:.3}, attempts {}",
        rec.generations,
        rec.size(),
        rec.w_proxy(),
        rec.attempts
    );
    let est = estimate_mean_extinction(&rec.tree, &ContactConfig::new(1.0), 500, 4).unwrap();
    let norm = Normalizer::GaltonWatson { n: 6, m, v_n: rec.v_n, z_n: rec.z_n(), conditioning: rec.conditioning };
    if let Record::Gw(r) = compute_record(&rec.tree, &est, &norm, 4).unwrap() {
        println!("lambda = 1: mean tau {:.3}, Y = {:.5}, X = {:.5}", r.mean_tau, r.y, r.x);
    }
}
