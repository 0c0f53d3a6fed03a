//! Random interlacements seen from a box: occupation frequency against the
//! capacity formula, and monotonicity in the intensity.
//!
//! `cargo run --release --example interlacements`

use metastab::generators::green::killed_green;
use metastab::generators::InterlacementSampler;
use metastab::graph::BoxSpec;

fn main() {
    let bx = BoxSpec::lattice(4, 3);
    let sampler = InterlacementSampler::new(&bx, 16, 2000, 1).unwrap();
    println!("capacity of B_4 ≈ {:.3}", sampler.capacity());
    let g00 = killed_green(&bx.rescaled(16), &[0, 0, 0], &[0, 0, 0]).unwrap();
    let origin = bx.site_index(&[0, 0, 0]).unwrap();
    for u in [0.25, 0.5, 1.0, 2.0] {
        let hits = (0..1000).filter(|&s| sampler.sample(u, s).unwrap().occupied[origin]).count();
        println!("u = {u}: P(0 occupied) ≈ {:.3}, 1 - exp(-u/g) = {:.3}", hits as f64 / 1000.0, 1.0 - (-u / g00).exp());
    }
    let lo = sampler.sample(0.5, 42).unwrap();
    let hi = sampler.sample(1.5, 42).unwrap();
    let occupied = |s: &[bool]| s.iter().filter(|&&x| x).count();
    let nested = lo.occupied.iter().zip(&hi.occupied).all(|(a, b)| !a || *b);
    println!(
        "same seed: {} sites at u = 0.5, {} at u = 1.5, nested: {nested}",
        occupied(&lo.occupied),
        occupied(&hi.occupied)
    );
}
