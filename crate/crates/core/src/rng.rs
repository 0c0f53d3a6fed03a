//! Counter-keyed random streams.
//!
//! Every random quantity in the crate is drawn from a stream identified by
//! `(master_seed, index, role)`. Streams are independent ChaCha8 generators
//! whose 256-bit keys are derived by SplitMix64 mixing of the triple, so a
//! trial's randomness never depends on which thread ran it or in which order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The generator type behind every stream.
pub type StreamRng = ChaCha8Rng;

/// What a stream is used for. Distinct roles keyed by the same
/// `(master, index)` pair yield unrelated streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamRole {
    Graph = 1,
    Contact = 2,
    Bootstrap = 3,
    EquilibriumMeasure = 4,
    Trajectory = 5,
    Arrivals = 6,
    GaltonWatson = 7,
    Field = 8,
    SampleSeed = 9,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix three words into one; used for derived seeds.
pub fn mix_seed(master: u64, index: u64, role: StreamRole) -> u64 {
    let a = splitmix64(master);
    let b = splitmix64(a ^ index.rotate_left(17));
    splitmix64(b ^ (role as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Seed of the `index`-th graph sampled at scale `n`.
pub fn unit_seed(master: u64, n: u64, index: u64) -> u64 {
    mix_seed(mix_seed(master, n, StreamRole::SampleSeed), index, StreamRole::SampleSeed)
}

/// Open the stream keyed by `(master, index, role)`.
pub fn stream(master: u64, index: u64, role: StreamRole) -> StreamRng {
    let mut key = [0u8; 32];
    let mut s = mix_seed(master, index, role);
    for chunk in key.chunks_exact_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Exponential variate with the given rate (mean `1/rate`).
#[inline]
pub fn exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    // 1 - U lies in (0, 1], so the log is finite.
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}

/// `ln(k!)`; exact summation for small `k`, Stirling series beyond.
pub fn ln_factorial(k: u64) -> f64 {
    if k < 64 {
        return (2..=k).map(|i| (i as f64).ln()).sum();
    }
    let x = k as f64 + 1.0;
    // ln Γ(x) for x ≥ 65, error far below f64 resolution.
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// Poisson variate with mean `mu`.
///
/// Inversion by sequential search for `mu < 30`; Hörmann's PTRS
/// (transformed rejection with squeeze) otherwise.
pub fn poisson<R: Rng + ?Sized>(rng: &mut R, mu: f64) -> u64 {
    assert!(mu >= 0.0 && mu.is_finite(), "poisson mean must be finite and non-negative");
    if mu == 0.0 {
        return 0;
    }
    if mu < 30.0 {
        let u: f64 = rng.random();
        let mut p = (-mu).exp();
        let mut cdf = p;
        let mut k = 0u64;
        while u > cdf {
            k += 1;
            p *= mu / k as f64;
            cdf += p;
            // Guard against round-off stalling the tail.
            if p < f64::MIN_POSITIVE && cdf < u {
                break;
            }
        }
        return k;
    }
    let smu = mu.sqrt();
    let b = 0.931 + 2.53 * smu;
    let a = -0.059 + 0.024_83 * b;
    let inv_alpha = 1.123_9 + 1.132_8 / (b - 3.4);
    let vr = 0.927_7 - 3.622_4 / (b - 2.0);
    let ln_mu = mu.ln();
    loop {
        let u: f64 = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mu + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -mu + k * ln_mu - ln_factorial(k as u64);
        if lhs <= rhs {
            return k as u64;
        }
    }
}
