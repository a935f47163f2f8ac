use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::columns::Columns;
use super::direct;
use super::{DecomposedCurve, LagCurve, LagGrid, Method};
use crate::error::{Error, Result};
use crate::event_model::{EventClass, EventSeries, EventType};

const CHUNK: usize = 16_384;

/// Exact numerators of the sign-correlation family for one `(π₁, π₂)` pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrelationSums {
    pub lags: Vec<usize>,
    /// `Σ I(π_t=π₁) ε_t I(π_{t+ℓ}=π₂) ε_{t+ℓ}`.
    pub total: Vec<i64>,
    /// Same, restricted to `b_{t+ℓ} = b_t`.
    pub same: Vec<i64>,
    /// Pairs with `π_t = π₁` and `π_{t+ℓ} = π₂`.
    pub counts: Vec<u64>,
    /// All in-day pairs at this lag: the sample the expectation runs over.
    pub pairs: Vec<u64>,
}

impl CorrelationSums {
    pub(crate) fn zeros(lags: &LagGrid) -> Self {
        let n = lags.len();
        CorrelationSums {
            lags: lags.lags().to_vec(),
            total: vec![0; n],
            same: vec![0; n],
            counts: vec![0; n],
            pairs: vec![0; n],
        }
    }

    pub fn diff(&self) -> Vec<i64> {
        self.total
            .iter()
            .zip(&self.same)
            .map(|(t, s)| t - s)
            .collect()
    }

    /// `⟨…⟩ / (P(π₁) P(π₂))`; lags without matching pairs are dropped.
    pub fn to_curves(&self, p1: f64, p2: f64) -> DecomposedCurve {
        let norm = p1 * p2;
        let diff = self.diff();
        let mut out = DecomposedCurve::default();
        for i in 0..self.lags.len() {
            if self.counts[i] == 0 {
                continue;
            }
            let pairs = self.pairs[i] as f64;
            for (curve, num) in [
                (&mut out.total, self.total[i]),
                (&mut out.same, self.same[i]),
                (&mut out.diff, diff[i]),
            ] {
                curve.lags.push(self.lags[i]);
                curve.values.push(num as f64 / pairs / norm);
                curve.counts.push(self.counts[i]);
            }
        }
        out
    }
}

/// Numerators for all 36 type pairs, filled in one pass over the series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub lags: Vec<usize>,
    /// Flattened `[lag][π₁][π₂]`.
    total: Vec<i64>,
    same: Vec<i64>,
    counts: Vec<u64>,
    pairs: Vec<u64>,
    type_freq: [f64; 6],
}

impl CorrelationMatrix {
    fn zeros(n_lags: usize) -> (Vec<i64>, Vec<i64>, Vec<u64>) {
        (
            vec![0; n_lags * 36],
            vec![0; n_lags * 36],
            vec![0; n_lags * 36],
        )
    }

    pub fn compute(series: &EventSeries, lags: &LagGrid) -> Self {
        let cols = Columns::new(series);
        let lag_list = lags.lags();
        let nl = lag_list.len();
        let starts: Vec<usize> = (0..cols.len()).step_by(CHUNK).collect();

        let (total, same, counts) = starts
            .par_iter()
            .map(|&lo| {
                let hi = (lo + CHUNK).min(cols.len());
                let (mut total, mut same, mut counts) = Self::zeros(nl);
                for t in lo..hi {
                    let a = cols.types[t] as usize;
                    let eps = cols.signs[t];
                    let b = cols.brokers[t];
                    let day_end = cols.day_end[t];
                    for (i, &l) in lag_list.iter().enumerate() {
                        let end = t + l;
                        if end >= day_end {
                            break;
                        }
                        let cell = i * 36 + a * 6 + cols.types[end] as usize;
                        let prod = eps * cols.signs[end];
                        total[cell] += prod;
                        counts[cell] += 1;
                        if cols.brokers[end] == b {
                            same[cell] += prod;
                        }
                    }
                }
                (total, same, counts)
            })
            .reduce(
                || Self::zeros(nl),
                |mut x, y| {
                    for j in 0..x.0.len() {
                        x.0[j] += y.0[j];
                        x.1[j] += y.1[j];
                        x.2[j] += y.2[j];
                    }
                    x
                },
            );

        CorrelationMatrix {
            lags: lag_list.to_vec(),
            total,
            same,
            counts,
            pairs: lag_list.iter().map(|&l| cols.pairs_at(l)).collect(),
            type_freq: *series.type_freqs(),
        }
    }

    /// Numerators for a pair of classes, summing member types.
    pub fn sums(&self, pi1: EventClass, pi2: EventClass) -> CorrelationSums {
        let n = self.lags.len();
        let mut out = CorrelationSums {
            lags: self.lags.clone(),
            total: vec![0; n],
            same: vec![0; n],
            counts: vec![0; n],
            pairs: self.pairs.clone(),
        };
        for i in 0..n {
            for a in EventType::ALL.iter().filter(|t| pi1.contains(**t)) {
                for b in EventType::ALL.iter().filter(|t| pi2.contains(**t)) {
                    let cell = i * 36 + a.index() * 6 + b.index();
                    out.total[i] += self.total[cell];
                    out.same[i] += self.same[cell];
                    out.counts[i] += self.counts[cell];
                }
            }
        }
        out
    }

    pub fn class_freq(&self, class: EventClass) -> f64 {
        EventType::ALL
            .iter()
            .filter(|t| class.contains(**t))
            .map(|t| self.type_freq[t.index()])
            .sum()
    }

    pub fn curve(&self, pi1: EventClass, pi2: EventClass) -> Result<DecomposedCurve> {
        let (p1, p2) = (self.class_freq(pi1), self.class_freq(pi2));
        check_freq(pi1, p1)?;
        check_freq(pi2, p2)?;
        Ok(self.sums(pi1, pi2).to_curves(p1, p2))
    }
}

fn check_freq(class: EventClass, p: f64) -> Result<()> {
    if p > 0.0 {
        Ok(())
    } else {
        Err(Error::NoSuchEvents(class.code().to_string()))
    }
}

pub(crate) fn class_freq(series: &EventSeries, class: EventClass) -> f64 {
    let n: u64 = EventType::ALL
        .iter()
        .filter(|t| class.contains(**t))
        .map(|t| series.count(*t))
        .sum();
    n as f64 / series.n_events() as f64
}

pub fn correlation_sums(
    series: &EventSeries,
    pi1: impl Into<EventClass>,
    pi2: impl Into<EventClass>,
    lags: &LagGrid,
    method: Method,
) -> CorrelationSums {
    let (pi1, pi2) = (pi1.into(), pi2.into());
    match method {
        Method::Direct => direct::correlation_sums(&Columns::new(series), pi1, pi2, lags),
        Method::Indexed => CorrelationMatrix::compute(series, lags).sums(pi1, pi2),
    }
}

pub fn sign_correlation_with(
    series: &EventSeries,
    pi1: impl Into<EventClass>,
    pi2: impl Into<EventClass>,
    lags: &LagGrid,
    method: Method,
) -> Result<DecomposedCurve> {
    let (pi1, pi2) = (pi1.into(), pi2.into());
    let (p1, p2) = (class_freq(series, pi1), class_freq(series, pi2));
    check_freq(pi1, p1)?;
    check_freq(pi2, p2)?;
    Ok(correlation_sums(series, pi1, pi2, lags, method).to_curves(p1, p2))
}

/// C, C^same and C^diff for `(π₁, π₂)`. Not bounded to `[-1, 1]`.
pub fn sign_correlation(
    series: &EventSeries,
    pi1: impl Into<EventClass>,
    pi2: impl Into<EventClass>,
    lags: &LagGrid,
) -> Result<DecomposedCurve> {
    sign_correlation_with(series, pi1, pi2, lags, Method::Indexed)
}

/// `P(π₂) · C^same_{π₁,π₂}(ℓ)`.
pub fn excess_probability_from(curve: &DecomposedCurve, p2: f64) -> LagCurve {
    curve.same.scaled(p2)
}

pub fn excess_probability(
    series: &EventSeries,
    pi1: impl Into<EventClass>,
    pi2: impl Into<EventClass>,
    lags: &LagGrid,
) -> Result<LagCurve> {
    let pi2 = pi2.into();
    let curve = sign_correlation(series, pi1, pi2, lags)?;
    Ok(excess_probability_from(&curve, class_freq(series, pi2)))
}

/// Positions of the conditioning class and everything needed to recompute
/// the total correlation under a different sign vector.
pub(crate) struct PreparedPair {
    cols: Columns,
    starts: Vec<usize>,
    mask2: u8,
    lags: Vec<usize>,
    pairs: Vec<u64>,
    norm: f64,
}

impl PreparedPair {
    pub fn new(
        series: &EventSeries,
        pi1: EventClass,
        pi2: EventClass,
        lags: &LagGrid,
    ) -> Result<Self> {
        let (p1, p2) = (class_freq(series, pi1), class_freq(series, pi2));
        check_freq(pi1, p1)?;
        check_freq(pi2, p2)?;
        let cols = Columns::new(series);
        let mask1 = pi1.mask();
        let starts = (0..cols.len())
            .filter(|&t| mask1 & (1 << cols.types[t]) != 0)
            .collect();
        let pairs = lags.lags().iter().map(|&l| cols.pairs_at(l)).collect();
        Ok(PreparedPair {
            cols,
            starts,
            mask2: pi2.mask(),
            lags: lags.lags().to_vec(),
            pairs,
            norm: p1 * p2,
        })
    }

    pub fn signs(&self) -> &[i64] {
        &self.cols.signs
    }

    pub fn lags(&self) -> &[usize] {
        &self.lags
    }

    /// Total correlation values per lag under `signs`; `None` where no pair matched.
    pub fn total_with_signs(&self, signs: &[i64]) -> Vec<Option<f64>> {
        let nl = self.lags.len();
        let mut num = vec![0i64; nl];
        let mut cnt = vec![0u64; nl];
        for &t in &self.starts {
            let eps = signs[t];
            let day_end = self.cols.day_end[t];
            for (i, &l) in self.lags.iter().enumerate() {
                let end = t + l;
                if end >= day_end {
                    break;
                }
                if self.mask2 & (1 << self.cols.types[end]) != 0 {
                    num[i] += eps * signs[end];
                    cnt[i] += 1;
                }
            }
        }
        (0..nl)
            .map(|i| (cnt[i] > 0).then(|| num[i] as f64 / self.pairs[i] as f64 / self.norm))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_model::{build_series, ClassifiedEvent, OrderKind, Sign};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn constant_series(n: usize) -> EventSeries {
        build_series(
            (0..n)
                .map(|i| ClassifiedEvent {
                    day_id: 1,
                    month_id: 1,
                    timestamp_ms: i as i64,
                    broker: 3,
                    etype: EventType::MO0,
                    sign: Sign::Buy,
                    mid_before: 100,
                })
                .collect(),
        )
        .unwrap()
    }

    fn random_series(seed: u64, n: usize) -> EventSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        build_series(
            (0..n)
                .map(|i| ClassifiedEvent {
                    day_id: (i / 97) as u32,
                    month_id: 0,
                    timestamp_ms: i as i64,
                    broker: rng.gen_range(0..4),
                    etype: EventType::ALL[rng.gen_range(0..6)],
                    sign: if rng.gen_bool(0.5) {
                        Sign::Buy
                    } else {
                        Sign::Sell
                    },
                    mid_before: 1000 + rng.gen_range(0..5),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn constant_sign_single_broker() {
        let s = constant_series(50);
        let lags = LagGrid::range(1, 10).unwrap();
        let c = sign_correlation(&s, EventType::MO0, EventType::MO0, &lags).unwrap();
        assert!(c.same.values.iter().all(|v| *v == 1.0));
        assert!(c.diff.values.iter().all(|v| *v == 0.0));
        let ex = excess_probability(&s, EventType::MO0, EventType::MO0, &lags).unwrap();
        assert!(ex.values.iter().all(|v| *v == 1.0));
    }

    #[test]
    fn missing_type_is_an_error() {
        let s = constant_series(5);
        let lags = LagGrid::range(1, 2).unwrap();
        assert!(matches!(
            sign_correlation(&s, EventType::MO0, EventType::LO0, &lags),
            Err(Error::NoSuchEvents(_))
        ));
    }

    #[test]
    fn global_sign_flip_leaves_curves_unchanged() {
        let s = random_series(3, 600);
        let f = s.sign_flipped();
        let lags = LagGrid::range(1, 12).unwrap();
        for a in EventType::ALL {
            for b in EventType::ALL {
                assert_eq!(
                    sign_correlation(&s, a, b, &lags).unwrap(),
                    sign_correlation(&f, a, b, &lags).unwrap()
                );
            }
        }
    }

    #[test]
    fn matrix_matches_direct_for_classes() {
        let s = random_series(9, 700);
        let lags = LagGrid::new(vec![1, 2, 5, 30, 96, 120]).unwrap();
        let m = CorrelationMatrix::compute(&s, &lags);
        let classes = [
            EventClass::Kind(OrderKind::Market),
            EventClass::Type(EventType::LO_PRIME),
            EventClass::Kind(OrderKind::Cancel),
        ];
        for a in classes {
            for b in classes {
                let direct = correlation_sums(&s, a, b, &lags, Method::Direct);
                assert_eq!(m.sums(a, b), direct);
            }
        }
    }

    #[test]
    fn excess_probability_is_scaled_same_curve() {
        let s = random_series(4, 500);
        let lags = LagGrid::range(1, 8).unwrap();
        let c = sign_correlation(&s, EventType::LO0, EventType::LO_PRIME, &lags).unwrap();
        let ex = excess_probability(&s, EventType::LO0, EventType::LO_PRIME, &lags).unwrap();
        let p2 = s.type_freq(EventType::LO_PRIME);
        for (e, c) in ex.values.iter().zip(&c.same.values) {
            assert!((e - p2 * c).abs() <= 1e-12 * e.abs().max(1.0));
        }
    }

    #[test]
    fn prepared_pair_reproduces_total() {
        let s = random_series(5, 400);
        let lags = LagGrid::range(1, 6).unwrap();
        let pi1 = EventClass::Type(EventType::MO0);
        let pi2 = EventClass::Kind(OrderKind::Limit);
        let prep = PreparedPair::new(&s, pi1, pi2, &lags).unwrap();
        let recomputed: Vec<f64> = prep
            .total_with_signs(prep.signs())
            .into_iter()
            .flatten()
            .collect();
        let c = sign_correlation(&s, pi1, pi2, &lags).unwrap();
        assert_eq!(recomputed, c.total.values);
    }
}
