//! Significance machinery: block bootstrap of liquidity-provision ratios,
//! sign-reshuffle noise floors, pairwise equal-means tests and power-law fits.
//!
//! Every randomized procedure derives one independent RNG stream per
//! replicate from the master seed, so results do not depend on how rayon
//! schedules the work.

mod bootstrap;
mod powerlaw;
mod reshuffle;
mod ttest;

use serde::{Deserialize, Serialize};

pub use bootstrap::{block_bootstrap_f, price_changing_indicators, BootstrapResult};
pub use powerlaw::{fit_power_law, PowerLawFit, Trend};
pub use reshuffle::{reshuffle_noise_floor, NoiseFloor};
pub use ttest::{equal_means_matrix, t_test, EqualMeansMatrix, TTestKind, TestReport};

/// Self-describing JSON wrapper written for each test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport<T> {
    pub method: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub results: T,
}

/// SplitMix64 finalizer; turns (seed, stream) into a well-mixed RNG seed.
pub(crate) fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Linear-interpolation quantile of sorted data (`q` in `[0, 1]`).
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Sample standard deviation (denominator `n - 1`).
pub(crate) fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&xs, 0.0), 1.0);
        assert_eq!(quantile_sorted(&xs, 1.0), 5.0);
        assert_eq!(quantile_sorted(&xs, 0.5), 3.0);
        assert!((quantile_sorted(&xs, 0.99) - 4.96).abs() < 1e-12);
    }

    #[test]
    fn derived_seeds_differ() {
        let a: Vec<u64> = (0..100).map(|i| derive_seed(7, i)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(a.len(), b.len());
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }
}
