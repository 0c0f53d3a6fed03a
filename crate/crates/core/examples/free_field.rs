//! Free-field samples from the killed Green's function and their level-set
//! graphs.
//!
//! `cargo run --release --example free_field`

use metastab::estimators::mean_variance;
use metastab::generators::GffSampler;
use metastab::graph::{maximal_component, BoxSpec};

fn main() {
    let bx = BoxSpec::lattice(3, 3);
    let sampler = GffSampler::new(&bx, 4).unwrap();
    let origin = bx.site_index(&[0, 0, 0]).unwrap();
    let corner = bx.site_index(&[-3, -3, -3]).unwrap();
    let samples: Vec<Vec<f64>> = (0..2000).map(|s| sampler.sample_field(s)).collect();
    for (name, site) in [("origin", origin), ("corner", corner)] {
        let xs: Vec<f64> = samples.iter().map(|f| f[site]).collect();
        let (_, var) = mean_variance(&xs);
        let se = var * (2.0 / (xs.len() - 1) as f64).sqrt();
        println!("{name}: sample variance {var:.4} ± {se:.4}, g = {:.4}", sampler.covariance(site, site));
    }
    for h in [-0.5, 0.0, 0.5, 1.0] {
        let g = sampler.excursion(h, 11);
        let giant = maximal_component(&g).map_or(0, |c| c.size());
        println!("h = {h:>4}: {} sites above level, largest component {giant}", g.vertex_count());
    }
}
