//! Component census, annulus crossings, uniqueness and density of bond
//! percolation in a box.
//!
//! `cargo run --release --example percolation_census`

use metastab::generators::{gen_bond_percolation, ModelSpec};
use metastab::graph::BoxSpec;
use metastab::structure::{
    annulus_crossing_components, census_over_seeds, component_census, density_series, uniqueness_event,
    AnnulusSpec,
};

fn main() {
    let n = 32;
    let g = gen_bond_percolation(&BoxSpec::lattice(n, 2), 0.7, 1).unwrap();
    let census = component_census(&g, n, 0.5).unwrap();
    println!(
        "n = {n}: {} components, giant threshold {:.1}, small threshold {:.2}, shell {}",
        census.rows.len(),
        census.giant_threshold,
        census.small_threshold,
        census.shell_thickness
    );
    for row in census.rows.iter().take(5) {
        println!("  #{}: size {}, diameter {}, in shell {}", row.rank, row.size, row.diameter, row.in_boundary_shell);
    }
    println!("  unique giant {}, others small or in shell {}", census.verdict_unique_giant, census.verdict_others);

    let annulus = AnnulusSpec::new(vec![0, 0], 16).unwrap();
    println!("components crossing the annulus at scale 16: {}", annulus_crossing_components(&g, &annulus).unwrap());

    let spec = ModelSpec::Bond { d: 2, p: 0.7 };
    let reports = census_over_seeds(&spec, 24, 0.5, 40, 9).unwrap();
    let passes = reports.iter().filter(|(_, r)| r.passes()).count();
    println!("census verdicts at n = 24: {passes}/40");
    let unique = (0..40).filter(|&s| uniqueness_event(&spec, 16, s).unwrap()).count();
    println!("uniqueness event at n = 16: {unique}/40");
    for p in density_series(&spec, &[8, 16, 32], 40, 9).unwrap() {
        println!("density n = {:>2}: mean {:.4}, variance {:.2e}", p.n, p.mean, p.variance);
    }
}
