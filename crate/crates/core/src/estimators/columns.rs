use std::collections::HashMap;

use crate::event_model::{EventSeries, Sign};

/// Struct-of-arrays view of a series used by the indexed estimators.
pub(crate) struct Columns {
    pub types: Vec<u8>,
    pub signs: Vec<i64>,
    pub mids: Vec<i64>,
    /// Dense broker index per event.
    pub brokers: Vec<u32>,
    pub n_brokers: usize,
    /// Exclusive end of the event's day.
    pub day_end: Vec<usize>,
    pub day_lengths: Vec<usize>,
}

impl Columns {
    pub fn new(series: &EventSeries) -> Self {
        Columns::with_signs(series, None)
    }

    pub fn with_signs(series: &EventSeries, signs: Option<&[Sign]>) -> Self {
        let events = series.events();
        let n = events.len();
        let mut dense: HashMap<u32, u32> = HashMap::new();
        let mut brokers = Vec::with_capacity(n);
        for e in events {
            let next = dense.len() as u32;
            brokers.push(*dense.entry(e.broker).or_insert(next));
        }
        let mut day_end = vec![0usize; n];
        let mut day_lengths = Vec::with_capacity(series.day_boundaries().len());
        for r in series.day_boundaries() {
            day_end[r.clone()].fill(r.end);
            day_lengths.push(r.len());
        }
        let signs = match signs {
            Some(s) => s.iter().map(|s| s.value()).collect(),
            None => events.iter().map(|e| e.sign.value()).collect(),
        };
        Columns {
            types: events.iter().map(|e| e.etype.index() as u8).collect(),
            signs,
            mids: events.iter().map(|e| e.mid_before).collect(),
            brokers,
            n_brokers: dense.len(),
            day_end,
            day_lengths,
        }
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    /// One-step midpoint change after event `t`; zero on the last event of a day.
    pub fn price_steps(&self) -> Vec<i64> {
        (0..self.len())
            .map(|t| {
                if t + 1 < self.day_end[t] {
                    self.mids[t + 1] - self.mids[t]
                } else {
                    0
                }
            })
            .collect()
    }

    /// Number of `(t, t + lag)` pairs inside a single day.
    pub fn pairs_at(&self, lag: usize) -> u64 {
        self.day_lengths
            .iter()
            .map(|&len| len.saturating_sub(lag) as u64)
            .sum()
    }
}

/// Per-broker event positions with prefix sums of price steps.
///
/// Broker `b` owns `positions[starts[b]..starts[b + 1]]`; its prefix sums
/// live at `cum[starts[b] + b ..= starts[b + 1] + b]`.
pub(crate) struct BrokerIndex {
    pub starts: Vec<usize>,
    pub positions: Vec<usize>,
    /// Rank of each event within its broker's position list.
    pub rank: Vec<usize>,
    pub cum: Vec<i64>,
    /// Same layout as `cum`, restricted to steps caused by events of each type.
    pub cum_by_type: Option<[Vec<i64>; 6]>,
}

impl BrokerIndex {
    pub fn new(cols: &Columns, steps: &[i64], by_type: bool) -> Self {
        let n = cols.len();
        let nb = cols.n_brokers;
        let mut starts = vec![0usize; nb + 1];
        for &b in &cols.brokers {
            starts[b as usize + 1] += 1;
        }
        for b in 0..nb {
            starts[b + 1] += starts[b];
        }
        let mut fill = starts.clone();
        let mut positions = vec![0usize; n];
        let mut rank = vec![0usize; n];
        for t in 0..n {
            let b = cols.brokers[t] as usize;
            positions[fill[b]] = t;
            rank[t] = fill[b] - starts[b];
            fill[b] += 1;
        }

        let prefix = |weight: &dyn Fn(usize) -> i64| -> Vec<i64> {
            let mut cum = vec![0i64; n + nb];
            for b in 0..nb {
                let base = starts[b] + b;
                let mut acc = 0i64;
                for (k, &t) in positions[starts[b]..starts[b + 1]].iter().enumerate() {
                    acc += weight(t);
                    cum[base + k + 1] = acc;
                }
            }
            cum
        };

        let cum = prefix(&|t| steps[t]);
        let cum_by_type = by_type.then(|| {
            std::array::from_fn(|k| {
                prefix(&|t| {
                    if cols.types[t] as usize == k {
                        steps[t]
                    } else {
                        0
                    }
                })
            })
        });
        BrokerIndex {
            starts,
            positions,
            rank,
            cum,
            cum_by_type,
        }
    }

    #[inline]
    pub fn broker_positions(&self, b: usize) -> &[usize] {
        &self.positions[self.starts[b]..self.starts[b + 1]]
    }

    #[inline]
    pub fn cum_base(&self, b: usize) -> usize {
        self.starts[b] + b
    }
}

/// Global prefix sums of price steps per event type (length `n + 1` each).
pub(crate) fn global_cum_by_type(cols: &Columns, steps: &[i64]) -> [Vec<i64>; 6] {
    std::array::from_fn(|k| {
        let mut cum = Vec::with_capacity(cols.len() + 1);
        cum.push(0i64);
        let mut acc = 0;
        for t in 0..cols.len() {
            if cols.types[t] as usize == k {
                acc += steps[t];
            }
            cum.push(acc);
        }
        cum
    })
}
