//! Response and sign-correlation functions with same/other-broker splits.
//!
//! All numerators are accumulated as exact `i64` sums of half-ticks times
//! signs (responses) or sign products (correlations). Floating point only
//! appears in the final division, so the indexed and direct paths can be
//! compared bit for bit.
//!
//! A pair `(t, t + ℓ)` or window `[t, t + ℓ)` is only used when both ends
//! fall inside the same trading day. Days belong to a single month, so
//! same-broker matching never crosses a monthly broker-code reshuffle.

mod columns;
pub(crate) mod correlation;
mod direct;
mod response;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use correlation::{
    correlation_sums, excess_probability, excess_probability_from, sign_correlation,
    sign_correlation_with, CorrelationMatrix, CorrelationSums,
};
pub use response::{
    response, response_by_type, response_decomposed, response_decomposed_by_type, response_sums,
    response_with, ResponseSums, TypeSplitSums,
};

/// Which code path evaluates the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Per-broker prefix sums with binary-searched window ends.
    #[default]
    Indexed,
    /// Term-by-term evaluation of every window and pair.
    Direct,
}

/// Strictly increasing lags, all `≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LagGrid(Vec<usize>);

impl LagGrid {
    /// Sorts and deduplicates; rejects empty grids and zero lags.
    pub fn new(mut lags: Vec<usize>) -> Result<Self> {
        lags.sort_unstable();
        lags.dedup();
        if lags.is_empty() {
            return Err(Error::InvalidLags("empty lag grid".into()));
        }
        if lags[0] == 0 {
            return Err(Error::InvalidLags("lags must be >= 1".into()));
        }
        Ok(LagGrid(lags))
    }

    pub fn range(lo: usize, hi: usize) -> Result<Self> {
        LagGrid::new((lo..=hi).collect())
    }

    /// Every integer up to `dense_until`, then `n_log` log-spaced points up to `max`.
    pub fn log_spaced(dense_until: usize, max: usize, n_log: usize) -> Result<Self> {
        let mut lags: Vec<usize> = (1..=dense_until.min(max)).collect();
        if max > dense_until && n_log > 0 {
            let lo = (dense_until.max(1)) as f64;
            let ratio = (max as f64 / lo).ln();
            for k in 1..=n_log {
                let x = lo * (ratio * k as f64 / n_log as f64).exp();
                lags.push(x.round() as usize);
            }
        }
        LagGrid::new(lags)
    }

    /// 1–20 densely, then 30 log-spaced lags to 1000.
    pub fn default_grid() -> Self {
        LagGrid::log_spaced(20, 1000, 30).expect("static grid is valid")
    }

    pub fn lags(&self) -> &[usize] {
        &self.0
    }

    pub fn max(&self) -> usize {
        *self.0.last().expect("non-empty")
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Lags inside `[lo, hi]`.
    pub fn window(&self, lo: usize, hi: usize) -> Result<Self> {
        LagGrid::new(
            self.0
                .iter()
                .copied()
                .filter(|l| (lo..=hi).contains(l))
                .collect(),
        )
    }
}

impl Default for LagGrid {
    fn default() -> Self {
        LagGrid::default_grid()
    }
}

/// Estimate indexed by lag. Lags with no samples are not reported.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LagCurve {
    pub lags: Vec<usize>,
    pub values: Vec<f64>,
    pub counts: Vec<u64>,
}

impl LagCurve {
    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }

    pub fn value_at(&self, lag: usize) -> Option<f64> {
        self.lags.binary_search(&lag).ok().map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64, u64)> + '_ {
        self.lags
            .iter()
            .zip(&self.values)
            .zip(&self.counts)
            .map(|((l, v), c)| (*l, *v, *c))
    }

    pub fn scaled(&self, factor: f64) -> LagCurve {
        LagCurve {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    /// Restrict to lags inside `[lo, hi]`.
    pub fn window(&self, lo: usize, hi: usize) -> LagCurve {
        let mut out = LagCurve::default();
        for (l, v, c) in self.iter().filter(|(l, _, _)| (lo..=hi).contains(l)) {
            out.lags.push(l);
            out.values.push(v);
            out.counts.push(c);
        }
        out
    }
}

/// A curve split into same-broker and other-broker contributions.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DecomposedCurve {
    pub total: LagCurve,
    pub same: LagCurve,
    pub diff: LagCurve,
}

impl DecomposedCurve {
    /// Largest relative violation of `same + diff = total` over all lags.
    pub fn identity_residual(&self) -> f64 {
        self.total
            .values
            .iter()
            .zip(&self.same.values)
            .zip(&self.diff.values)
            .map(|((t, s), d)| {
                let scale = t.abs().max(s.abs()).max(d.abs()).max(f64::MIN_POSITIVE);
                (s + d - t).abs() / scale
            })
            .fold(0.0, f64::max)
    }
}

/// Equal-weight average of per-stock curves. Each lag averages the stocks
/// that report it; counts are summed.
pub fn average_curves(curves: &[LagCurve]) -> LagCurve {
    let mut acc: std::collections::BTreeMap<usize, (f64, usize, u64)> = Default::default();
    for c in curves {
        for (l, v, n) in c.iter() {
            let e = acc.entry(l).or_insert((0.0, 0, 0));
            e.0 += v;
            e.1 += 1;
            e.2 += n;
        }
    }
    let mut out = LagCurve::default();
    for (l, (sum, k, n)) in acc {
        out.lags.push(l);
        out.values.push(sum / k as f64);
        out.counts.push(n);
    }
    out
}

pub fn average_decomposed(curves: &[DecomposedCurve]) -> DecomposedCurve {
    let pick = |f: fn(&DecomposedCurve) -> &LagCurve| -> Vec<LagCurve> {
        curves.iter().map(|c| f(c).clone()).collect()
    };
    DecomposedCurve {
        total: average_curves(&pick(|c| &c.total)),
        same: average_curves(&pick(|c| &c.same)),
        diff: average_curves(&pick(|c| &c.diff)),
    }
}
