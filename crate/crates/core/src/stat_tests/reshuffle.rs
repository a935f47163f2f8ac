use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, quantile_sorted};
use crate::error::{Error, Result};
use crate::estimators::correlation::PreparedPair;
use crate::estimators::LagGrid;
use crate::event_model::{EventClass, EventSeries};

/// Distribution of `|C|` under randomly permuted signs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseFloor {
    pub mean_abs: f64,
    pub q99: f64,
    pub n_reps: usize,
    /// Number of (replicate, lag) values pooled.
    pub n_values: usize,
    /// Per-replicate curves, aligned with `lags`; `None` where no pair matched.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curves: Option<Vec<Vec<Option<f64>>>>,
    pub lags: Vec<usize>,
}

/// Permute all signs uniformly (types, brokers and prices stay put) and
/// recompute the total correlation `n_reps` times.
pub fn reshuffle_noise_floor(
    series: &EventSeries,
    pi1: impl Into<EventClass>,
    pi2: impl Into<EventClass>,
    lags: &LagGrid,
    n_reps: usize,
    seed: u64,
    keep_curves: bool,
) -> Result<NoiseFloor> {
    if n_reps == 0 {
        return Err(Error::Config("n_reps must be at least 1".into()));
    }
    let prepared = PreparedPair::new(series, pi1.into(), pi2.into(), lags)?;
    let curves: Vec<Vec<Option<f64>>> = (0..n_reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, rep as u64));
            let mut signs = prepared.signs().to_vec();
            signs.shuffle(&mut rng);
            prepared.total_with_signs(&signs)
        })
        .collect();
    let mut abs: Vec<f64> = curves.iter().flatten().flatten().map(|c| c.abs()).collect();
    if abs.is_empty() {
        return Err(Error::InsufficientData("no pairs at any lag".into()));
    }
    abs.sort_by(f64::total_cmp);
    Ok(NoiseFloor {
        mean_abs: abs.iter().sum::<f64>() / abs.len() as f64,
        q99: quantile_sorted(&abs, 0.99),
        n_reps,
        n_values: abs.len(),
        curves: keep_curves.then_some(curves),
        lags: prepared.lags().to_vec(),
    })
}
