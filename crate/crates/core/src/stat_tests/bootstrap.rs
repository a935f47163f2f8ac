use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, sample_std};
use crate::event_model::{BrokerId, EventSeries, EventType};

/// Bootstrap spread of `f` for one broker-month.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub month_id: u32,
    pub broker: BrokerId,
    pub n_orders: usize,
    pub f: f64,
    pub f_std: f64,
}

/// Per broker-month, the sequence of its price-changing orders in event
/// order: `true` for `MO′`, `false` for `LO′`.
pub fn price_changing_indicators(series: &EventSeries) -> BTreeMap<(u32, BrokerId), Vec<bool>> {
    let mut out: BTreeMap<(u32, BrokerId), Vec<bool>> = BTreeMap::new();
    for e in series.events() {
        let flag = match e.etype {
            EventType::MO_PRIME => true,
            EventType::LO_PRIME => false,
            _ => continue,
        };
        out.entry((e.month_id, e.broker)).or_default().push(flag);
    }
    out
}

/// Circular block bootstrap of the mean of each indicator series.
///
/// Series shorter than `block_len` are skipped with a warning. The result
/// for the `k`-th series (in key order) uses its own RNG stream, so it does
/// not depend on the other series or on thread scheduling.
pub fn block_bootstrap_f(
    indicators: &BTreeMap<(u32, BrokerId), Vec<bool>>,
    block_len: usize,
    n_reps: usize,
    seed: u64,
) -> Vec<BootstrapResult> {
    let block_len = block_len.max(1);
    let keyed: Vec<(usize, (u32, BrokerId), &Vec<bool>)> = indicators
        .iter()
        .enumerate()
        .filter_map(|(k, (key, xs))| {
            if xs.len() < block_len {
                log::warn!(
                    "broker {} month {}: {} orders is shorter than block length {block_len}, skipped",
                    key.1,
                    key.0,
                    xs.len()
                );
                None
            } else {
                Some((k, *key, xs))
            }
        })
        .collect();
    keyed
        .par_iter()
        .map(|&(k, (month_id, broker), xs)| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, k as u64));
            let n = xs.len();
            let reps: Vec<f64> = (0..n_reps)
                .map(|_| circular_resample_mean(xs, block_len, &mut rng))
                .collect();
            BootstrapResult {
                month_id,
                broker,
                n_orders: n,
                f: xs.iter().filter(|x| **x).count() as f64 / n as f64,
                f_std: sample_std(&reps),
            }
        })
        .collect()
}

fn circular_resample_mean(xs: &[bool], block_len: usize, rng: &mut ChaCha8Rng) -> f64 {
    let n = xs.len();
    let mut hits = 0usize;
    let mut taken = 0usize;
    while taken < n {
        let start = rng.gen_range(0..n);
        let take = block_len.min(n - taken);
        hits += (0..take).filter(|j| xs[(start + j) % n]).count();
        taken += take;
    }
    hits as f64 / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(xs: Vec<bool>) -> BTreeMap<(u32, BrokerId), Vec<bool>> {
        BTreeMap::from([((1, 1), xs)])
    }

    #[test]
    fn constant_series_has_zero_spread() {
        let r = block_bootstrap_f(&single(vec![true; 50]), 10, 200, 3);
        assert_eq!(r[0].f, 1.0);
        assert_eq!(r[0].f_std, 0.0);
    }

    #[test]
    fn short_series_skipped() {
        let r = block_bootstrap_f(&single(vec![true; 5]), 10, 10, 3);
        assert!(r.is_empty());
    }

    #[test]
    fn iid_matches_binomial_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000;
        let xs: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        let r = block_bootstrap_f(&single(xs), 10, 2_000, 4);
        let se = (0.25 / n as f64).sqrt();
        assert!(
            (r[0].f_std / se - 1.0).abs() < 0.25,
            "{} vs {se}",
            r[0].f_std
        );
    }

    #[test]
    fn reproducible_and_order_independent() {
        let mut m = single((0..100).map(|i| i % 3 == 0).collect());
        let a = block_bootstrap_f(&m, 10, 100, 9);
        assert_eq!(a, block_bootstrap_f(&m, 10, 100, 9));
        m.insert((2, 5), vec![false; 40]);
        let b = block_bootstrap_f(&m, 10, 100, 9);
        assert_eq!(a[0], b[0]);
    }
}
