//! Per-scale trend of a normalised statistic and the derived rate.

use serde::{Deserialize, Serialize};

use super::{mean_variance, EstimateError, EstimateRecord, GwEstimateRecord, Record, MAX_CENSORED_FRACTION, Z95};

pub const MIN_SCALES: usize = 3;

/// One observation of the statistic whose plateau is `γ̃`.
pub trait TrendPoint {
    fn scale(&self) -> u32;
    fn statistic(&self) -> f64;
    fn censored_fraction(&self) -> f64 {
        0.0
    }
}

impl TrendPoint for EstimateRecord {
    fn scale(&self) -> u32 {
        self.n
    }
    fn statistic(&self) -> f64 {
        self.x_box
    }
    fn censored_fraction(&self) -> f64 {
        self.censored_frac
    }
}

impl TrendPoint for GwEstimateRecord {
    fn scale(&self) -> u32 {
        self.n
    }
    fn statistic(&self) -> f64 {
        self.y
    }
    fn censored_fraction(&self) -> f64 {
        self.censored_frac
    }
}

impl TrendPoint for Record {
    fn scale(&self) -> u32 {
        self.n()
    }
    fn statistic(&self) -> f64 {
        match self {
            Record::Box(r) => r.statistic(),
            Record::Gw(r) => r.statistic(),
        }
    }
    fn censored_fraction(&self) -> f64 {
        match self {
            Record::Box(r) => r.censored_frac,
            Record::Gw(r) => r.censored_frac,
        }
    }
}

/// A bare `(n, value)` pair, e.g. an exact per-scale value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaleValue {
    pub n: u32,
    pub value: f64,
}

impl TrendPoint for ScaleValue {
    fn scale(&self) -> u32 {
        self.n
    }
    fn statistic(&self) -> f64 {
        self.value
    }
}

/// How `γ` follows from `γ̃`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    /// `γ = γ̃ / θ`.
    Lattice { theta: f64 },
    /// `γ = (m − 1)/m · γ̃`.
    GaltonWatson { m: f64 },
    /// `γ = γ̃`.
    Plain,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalePoint {
    pub n: u32,
    pub mean: f64,
    pub se: f64,
    pub count: usize,
    pub censored_frac: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub gamma_tilde: f64,
    pub gamma_tilde_ci: (f64, f64),
    pub theta: Option<f64>,
    pub m: Option<f64>,
    pub gamma: f64,
    pub per_n: Vec<ScalePoint>,
    /// `|X̄(n_{i+1}) − X̄(n_i)| / X̄(n_i)` for consecutive scales.
    pub relative_increments: Vec<f64>,
    /// Always true: finite scales cannot certify the limit.
    pub asymptote_not_reached: bool,
}

fn relative_increment(prev: f64, next: f64) -> f64 {
    let diff = (next - prev).abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / prev.abs()
    }
}

/// Plateau estimate from the largest scale, with the per-scale trend.
pub fn gamma_trend<T: TrendPoint>(points: &[T], family: Family) -> Result<RateEstimate, EstimateError> {
    let mut scales: Vec<u32> = points.iter().map(|p| p.scale()).collect();
    scales.sort_unstable();
    scales.dedup();
    if scales.len() < MIN_SCALES {
        return Err(EstimateError::TooFewScales { needed: MIN_SCALES, got: scales.len() });
    }
    let mut per_n = Vec::with_capacity(scales.len());
    for n in scales {
        let at: Vec<&T> = points.iter().filter(|p| p.scale() == n).collect();
        let censored_frac = at.iter().map(|p| p.censored_fraction()).sum::<f64>() / at.len() as f64;
        if censored_frac >= MAX_CENSORED_FRACTION {
            return Err(EstimateError::CensoringTooHigh { n, fraction: censored_frac });
        }
        let values: Vec<f64> = at.iter().map(|p| p.statistic()).collect();
        let (mean, var) = mean_variance(&values);
        per_n.push(ScalePoint { n, mean, se: (var / values.len() as f64).sqrt(), count: values.len(), censored_frac });
    }
    let relative_increments = per_n.windows(2).map(|w| relative_increment(w[0].mean, w[1].mean)).collect();
    let last = per_n.last().expect("at least three scales");
    let gamma_tilde = last.mean;
    let (theta, m, gamma) = match family {
        Family::Lattice { theta } => (Some(theta), None, gamma_tilde / theta),
        Family::GaltonWatson { m } => (None, Some(m), (m - 1.0) / m * gamma_tilde),
        Family::Plain => (None, None, gamma_tilde),
    };
    Ok(RateEstimate {
        gamma_tilde,
        gamma_tilde_ci: (gamma_tilde - Z95 * last.se, gamma_tilde + Z95 * last.se),
        theta,
        m,
        gamma,
        per_n,
        relative_increments,
        asymptote_not_reached: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::exact_expected_extinction;
    use crate::graph::Graph;

    fn values(ns: &[u32], f: impl Fn(u32) -> f64) -> Vec<ScaleValue> {
        ns.iter().map(|&n| ScaleValue { n, value: f(n) }).collect()
    }

    #[test]
    fn constant_statistic_has_zero_increments() {
        let r = gamma_trend(&values(&[2, 4, 8], |_| 0.7), Family::Lattice { theta: 1.0 }).unwrap();
        assert_eq!(r.gamma_tilde, 0.7);
        assert_eq!(r.gamma, 0.7);
        assert!(r.relative_increments.iter().all(|&i| i == 0.0));
        assert!(r.asymptote_not_reached);
    }

    #[test]
    fn family_rules() {
        let pts = values(&[2, 4, 8], |_| 0.6);
        assert_eq!(gamma_trend(&pts, Family::Lattice { theta: 0.5 }).unwrap().gamma, 0.6 / 0.5);
        assert_eq!(gamma_trend(&pts, Family::GaltonWatson { m: 1.5 }).unwrap().gamma, 0.5 / 1.5 * 0.6);
    }

    #[test]
    fn guards() {
        assert_eq!(
            gamma_trend(&values(&[2, 4], |_| 1.0), Family::Plain),
            Err(EstimateError::TooFewScales { needed: 3, got: 2 })
        );
        struct Censored(u32);
        impl TrendPoint for Censored {
            fn scale(&self) -> u32 {
                self.0
            }
            fn statistic(&self) -> f64 {
                1.0
            }
            fn censored_fraction(&self) -> f64 {
                if self.0 == 4 { 0.6 } else { 0.0 }
            }
        }
        assert_eq!(
            gamma_trend(&[Censored(2), Censored(4), Censored(8)], Family::Plain),
            Err(EstimateError::CensoringTooHigh { n: 4, fraction: 0.6 })
        );
    }

    #[test]
    fn exact_path_increments_shrink_on_even_grid() {
        let pts = values(&[4, 6, 8, 10, 12], |n| {
            exact_expected_extinction(&Graph::path(n as usize), 2.0).unwrap().ln() / n as f64
        });
        let r = gamma_trend(&pts, Family::Plain).unwrap();
        assert!(r.relative_increments.windows(2).all(|w| w[1] < w[0]), "{:?}", r.relative_increments);
        assert!(*r.relative_increments.last().unwrap() < 0.15);
    }
}
