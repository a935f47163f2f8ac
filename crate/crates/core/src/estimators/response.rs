use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::columns::{global_cum_by_type, BrokerIndex, Columns};
use super::direct;
use super::{DecomposedCurve, LagCurve, LagGrid, Method};
use crate::event_model::{EventClass, EventSeries, EventType};

const CHUNK: usize = 4096;

/// Exact numerators of the response family.
///
/// `total[i]` is `Σ (p_{t+ℓ} − p_t)·ε_t` and `same[i]` the part of it caused
/// by steps of the conditioning broker, both over the `counts[i]` qualifying
/// events at lag `lags[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseSums {
    pub lags: Vec<usize>,
    pub total: Vec<i64>,
    pub same: Vec<i64>,
    pub counts: Vec<u64>,
}

impl ResponseSums {
    pub(crate) fn zeros(lags: &LagGrid) -> Self {
        let n = lags.len();
        ResponseSums {
            lags: lags.lags().to_vec(),
            total: vec![0; n],
            same: vec![0; n],
            counts: vec![0; n],
        }
    }

    pub fn diff(&self) -> Vec<i64> {
        self.total
            .iter()
            .zip(&self.same)
            .map(|(t, s)| t - s)
            .collect()
    }

    fn add(mut self, other: &ResponseSums) -> Self {
        for i in 0..self.lags.len() {
            self.total[i] += other.total[i];
            self.same[i] += other.same[i];
            self.counts[i] += other.counts[i];
        }
        self
    }

    /// Conditional averages in half-ticks; empty lags are dropped.
    pub fn to_curves(&self) -> DecomposedCurve {
        let diff = self.diff();
        let mut out = DecomposedCurve::default();
        for i in 0..self.lags.len() {
            let n = self.counts[i];
            if n == 0 {
                continue;
            }
            for (curve, num) in [
                (&mut out.total, self.total[i]),
                (&mut out.same, self.same[i]),
                (&mut out.diff, diff[i]),
            ] {
                curve.lags.push(self.lags[i]);
                curve.values.push(num as f64 / n as f64);
                curve.counts.push(n);
            }
        }
        out
    }
}

/// Same/other-broker numerators split by the type of the event that moved the price.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeSplitSums {
    pub lags: Vec<usize>,
    /// Indexed by `EventType::index()` of the moving event.
    pub same: [Vec<i64>; 6],
    pub diff: [Vec<i64>; 6],
    pub counts: Vec<u64>,
}

impl TypeSplitSums {
    pub(crate) fn zeros(lags: &LagGrid) -> Self {
        let n = lags.len();
        TypeSplitSums {
            lags: lags.lags().to_vec(),
            same: std::array::from_fn(|_| vec![0; n]),
            diff: std::array::from_fn(|_| vec![0; n]),
            counts: vec![0; n],
        }
    }

    fn add(mut self, other: &TypeSplitSums) -> Self {
        for i in 0..self.lags.len() {
            for k in 0..6 {
                self.same[k][i] += other.same[k][i];
                self.diff[k][i] += other.diff[k][i];
            }
            self.counts[i] += other.counts[i];
        }
        self
    }

    /// `(same, diff)` curves for moving-event type `pi2`.
    pub fn curves(&self, pi2: EventType) -> (LagCurve, LagCurve) {
        let k = pi2.index();
        let mut same = LagCurve::default();
        let mut diff = LagCurve::default();
        for i in 0..self.lags.len() {
            let n = self.counts[i];
            if n == 0 {
                continue;
            }
            for (curve, num) in [(&mut same, self.same[k][i]), (&mut diff, self.diff[k][i])] {
                curve.lags.push(self.lags[i]);
                curve.values.push(num as f64 / n as f64);
                curve.counts.push(n);
            }
        }
        (same, diff)
    }
}

fn qualifying(cols: &Columns, class: EventClass) -> Vec<usize> {
    let mask = class.mask();
    (0..cols.len())
        .filter(|&t| mask & (1 << cols.types[t]) != 0)
        .collect()
}

/// Exact numerators of R, R^same and R^diff conditioned on `class`.
pub fn response_sums(
    series: &EventSeries,
    class: impl Into<EventClass>,
    lags: &LagGrid,
    method: Method,
) -> ResponseSums {
    let cols = Columns::new(series);
    let class = class.into();
    match method {
        Method::Direct => direct::response_sums(&cols, class, lags),
        Method::Indexed => indexed_response(&cols, class, lags),
    }
}

fn indexed_response(cols: &Columns, class: EventClass, lags: &LagGrid) -> ResponseSums {
    let steps = cols.price_steps();
    let index = BrokerIndex::new(cols, &steps, false);
    let ts = qualifying(cols, class);
    let lag_list = lags.lags();

    ts.par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = ResponseSums::zeros(lags);
            for &t in chunk {
                let eps = cols.signs[t];
                let b = cols.brokers[t] as usize;
                let r = index.rank[t];
                let pos = index.broker_positions(b);
                let base = index.cum_base(b);
                let mut hi = r + 1;
                for (i, &l) in lag_list.iter().enumerate() {
                    let end = t + l;
                    if end >= cols.day_end[t] {
                        break;
                    }
                    hi += pos[hi..].partition_point(|&p| p < end);
                    acc.total[i] += (cols.mids[end] - cols.mids[t]) * eps;
                    acc.same[i] += (index.cum[base + hi] - index.cum[base + r]) * eps;
                    acc.counts[i] += 1;
                }
            }
            acc
        })
        .reduce(|| ResponseSums::zeros(lags), |a, b| a.add(&b))
}

/// Total response R_π₁(ℓ) in half-ticks.
pub fn response(series: &EventSeries, class: impl Into<EventClass>, lags: &LagGrid) -> LagCurve {
    response_sums(series, class, lags, Method::Indexed)
        .to_curves()
        .total
}

pub fn response_with(
    series: &EventSeries,
    class: impl Into<EventClass>,
    lags: &LagGrid,
    method: Method,
) -> DecomposedCurve {
    response_sums(series, class, lags, method).to_curves()
}

/// R, R^same and R^diff conditioned on `class`.
pub fn response_decomposed(
    series: &EventSeries,
    class: impl Into<EventClass>,
    lags: &LagGrid,
) -> DecomposedCurve {
    response_with(series, class, lags, Method::Indexed)
}

/// Same/other-broker response split over all six types of the moving event.
pub fn response_by_type(
    series: &EventSeries,
    class: impl Into<EventClass>,
    lags: &LagGrid,
    method: Method,
) -> TypeSplitSums {
    let cols = Columns::new(series);
    let class = class.into();
    match method {
        Method::Direct => direct::type_split_sums(&cols, class, lags),
        Method::Indexed => indexed_type_split(&cols, class, lags),
    }
}

fn indexed_type_split(cols: &Columns, class: EventClass, lags: &LagGrid) -> TypeSplitSums {
    let steps = cols.price_steps();
    let index = BrokerIndex::new(cols, &steps, true);
    let by_type = index.cum_by_type.as_ref().expect("built with by_type");
    let global = global_cum_by_type(cols, &steps);
    let ts = qualifying(cols, class);
    let lag_list = lags.lags();

    ts.par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = TypeSplitSums::zeros(lags);
            for &t in chunk {
                let eps = cols.signs[t];
                let b = cols.brokers[t] as usize;
                let r = index.rank[t];
                let pos = index.broker_positions(b);
                let base = index.cum_base(b);
                let mut hi = r + 1;
                for (i, &l) in lag_list.iter().enumerate() {
                    let end = t + l;
                    if end >= cols.day_end[t] {
                        break;
                    }
                    hi += pos[hi..].partition_point(|&p| p < end);
                    for k in 0..6 {
                        let same = (by_type[k][base + hi] - by_type[k][base + r]) * eps;
                        let total = (global[k][end] - global[k][t]) * eps;
                        acc.same[k][i] += same;
                        acc.diff[k][i] += total - same;
                    }
                    acc.counts[i] += 1;
                }
            }
            acc
        })
        .reduce(|| TypeSplitSums::zeros(lags), |a, b| a.add(&b))
}

/// `(R^same_{π₁,π₂}, R^diff_{π₁,π₂})`.
pub fn response_decomposed_by_type(
    series: &EventSeries,
    pi1: impl Into<EventClass>,
    pi2: EventType,
    lags: &LagGrid,
) -> (LagCurve, LagCurve) {
    response_by_type(series, pi1, lags, Method::Indexed).curves(pi2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_model::{build_series, ClassifiedEvent, OrderKind, Sign};

    fn series(rows: &[(EventType, Sign, i64, u32)]) -> EventSeries {
        build_series(
            rows.iter()
                .enumerate()
                .map(|(i, &(etype, sign, mid, broker))| ClassifiedEvent {
                    day_id: 1,
                    month_id: 1,
                    timestamp_ms: i as i64,
                    broker,
                    etype,
                    sign,
                    mid_before: mid,
                })
                .collect(),
        )
        .unwrap()
    }

    fn lags12() -> LagGrid {
        LagGrid::new(vec![1, 2]).unwrap()
    }

    #[test]
    fn three_event_hand_example() {
        let s = series(&[
            (EventType::MO_PRIME, Sign::Buy, 100, 1),
            (EventType::LO0, Sign::Buy, 102, 1),
            (EventType::MO0, Sign::Sell, 102, 1),
        ]);
        for method in [Method::Indexed, Method::Direct] {
            let c = response_with(&s, EventType::MO_PRIME, &lags12(), method);
            assert_eq!(c.total.values, vec![2.0, 2.0]);
            assert_eq!(c.same.values, vec![2.0, 2.0]);
            assert_eq!(c.diff.values, vec![0.0, 0.0]);
        }
    }

    #[test]
    fn other_broker_takes_the_move() {
        let s = series(&[
            (EventType::MO_PRIME, Sign::Buy, 100, 1),
            (EventType::LO0, Sign::Buy, 102, 2),
            (EventType::MO0, Sign::Sell, 102, 1),
        ]);
        // t=0 is the only MO′; its own step 100→102 is the first window step,
        // so the same broker owns the whole move.
        let c = response_decomposed(&s, EventType::MO_PRIME, &lags12());
        assert_eq!(c.same.value_at(2), Some(2.0));
        assert_eq!(c.diff.value_at(2), Some(0.0));

        // shift the move so it happens on broker 2's event
        let s = series(&[
            (EventType::MO_PRIME, Sign::Buy, 100, 1),
            (EventType::LO_PRIME, Sign::Buy, 100, 2),
            (EventType::MO0, Sign::Sell, 102, 1),
        ]);
        let c = response_decomposed(&s, EventType::MO_PRIME, &lags12());
        assert_eq!(c.same.value_at(2), Some(0.0));
        assert_eq!(c.diff.value_at(2), Some(2.0));
    }

    #[test]
    fn absent_type_gives_empty_curve() {
        let s = series(&[
            (EventType::MO0, Sign::Buy, 100, 1),
            (EventType::MO0, Sign::Buy, 100, 1),
        ]);
        assert!(response(&s, EventType::CA_PRIME, &lags12()).is_empty());
        // lag 2 has no window inside the day and is dropped
        assert_eq!(response(&s, EventType::MO0, &lags12()).lags, vec![1]);
    }

    #[test]
    fn type_split_sums_to_decomposition() {
        let s = series(&[
            (EventType::MO_PRIME, Sign::Buy, 100, 1),
            (EventType::LO_PRIME, Sign::Sell, 101, 2),
            (EventType::CA_PRIME, Sign::Buy, 100, 3),
            (EventType::MO0, Sign::Sell, 101, 1),
            (EventType::MO_PRIME, Sign::Sell, 101, 2),
            (EventType::LO0, Sign::Buy, 100, 1),
        ]);
        let lags = LagGrid::range(1, 4).unwrap();
        let class = EventClass::Kind(OrderKind::Market);
        let d = response_sums(&s, class, &lags, Method::Indexed);
        let split = response_by_type(&s, class, &lags, Method::Indexed);
        for i in 0..lags.len() {
            let same: i64 = (0..6).map(|k| split.same[k][i]).sum();
            let diff: i64 = (0..6).map(|k| split.diff[k][i]).sum();
            assert_eq!(same, d.same[i]);
            assert_eq!(diff, d.total[i] - d.same[i]);
        }
        for t in [EventType::MO0, EventType::LO0, EventType::CA0] {
            let (same, diff) = split.curves(t);
            assert!(same.values.iter().chain(&diff.values).all(|v| *v == 0.0));
        }
        assert_eq!(split, response_by_type(&s, class, &lags, Method::Direct));
    }
}
