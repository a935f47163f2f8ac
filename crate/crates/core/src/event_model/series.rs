use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{BrokerId, EventType, OrderBookEvent, Sign};
use crate::error::{Error, Result};

/// A classified event before event-time indices are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedEvent {
    pub day_id: u32,
    pub month_id: u32,
    pub timestamp_ms: i64,
    pub broker: BrokerId,
    pub etype: EventType,
    pub sign: Sign,
    pub mid_before: i64,
}

/// Immutable, day-segmented event stream.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSeries {
    events: Vec<OrderBookEvent>,
    counts: [u64; 6],
    type_freq: [f64; 6],
    day_boundaries: Vec<Range<usize>>,
}

/// Assign dense per-day `seq` and validate ordering.
///
/// Events must be grouped by day in non-decreasing `day_id`; within a day
/// timestamps must not decrease. Ties keep input order.
pub fn build_series(events: Vec<ClassifiedEvent>) -> Result<EventSeries> {
    let mut out = Vec::with_capacity(events.len());
    let mut seq = 0u64;
    for (index, e) in events.into_iter().enumerate() {
        if let Some(prev) = out.last() {
            let prev: &OrderBookEvent = prev;
            if e.day_id < prev.day_id {
                return Err(Error::DayOrder {
                    index,
                    day_id: e.day_id,
                });
            }
            if e.day_id == prev.day_id {
                if e.timestamp_ms < prev.timestamp_ms {
                    return Err(Error::OutOfOrder {
                        index,
                        day_id: e.day_id,
                    });
                }
                seq += 1;
            } else {
                seq = 0;
            }
        }
        out.push(OrderBookEvent {
            day_id: e.day_id,
            month_id: e.month_id,
            seq,
            timestamp_ms: e.timestamp_ms,
            broker: e.broker,
            etype: e.etype,
            sign: e.sign,
            mid_before: e.mid_before,
        });
    }
    EventSeries::new(out)
}

impl EventSeries {
    /// Validate already-sequenced events (e.g. read back from CSV).
    pub fn new(events: Vec<OrderBookEvent>) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::EmptySeries);
        }
        let mut counts = [0u64; 6];
        let mut day_boundaries = Vec::new();
        let mut day_start = 0;
        for (index, e) in events.iter().enumerate() {
            if e.mid_before <= 0 {
                return Err(Error::InvalidRecord {
                    index,
                    detail: format!("non-positive midpoint {}", e.mid_before),
                });
            }
            counts[e.etype.index()] += 1;
            if index == 0 {
                continue;
            }
            let prev = &events[index - 1];
            if e.day_id == prev.day_id {
                if e.seq <= prev.seq || e.timestamp_ms < prev.timestamp_ms {
                    return Err(Error::OutOfOrder {
                        index,
                        day_id: e.day_id,
                    });
                }
                if e.month_id != prev.month_id {
                    return Err(Error::InvalidRecord {
                        index,
                        detail: format!("day {} spans two months", e.day_id),
                    });
                }
            } else if e.day_id < prev.day_id {
                return Err(Error::DayOrder {
                    index,
                    day_id: e.day_id,
                });
            } else {
                day_boundaries.push(day_start..index);
                day_start = index;
            }
        }
        day_boundaries.push(day_start..events.len());

        let n = events.len() as f64;
        let type_freq = counts.map(|c| c as f64 / n);
        Ok(EventSeries {
            events,
            counts,
            type_freq,
            day_boundaries,
        })
    }

    pub fn events(&self) -> &[OrderBookEvent] {
        &self.events
    }

    pub fn n_events(&self) -> usize {
        self.events.len()
    }

    pub fn day_boundaries(&self) -> &[Range<usize>] {
        &self.day_boundaries
    }

    /// Unconditional frequency P(π).
    pub fn type_freq(&self, t: EventType) -> f64 {
        self.type_freq[t.index()]
    }

    pub fn type_freqs(&self) -> &[f64; 6] {
        &self.type_freq
    }

    pub fn count(&self, t: EventType) -> u64 {
        self.counts[t.index()]
    }

    pub fn counts(&self) -> &[u64; 6] {
        &self.counts
    }

    /// Copy of the series with every sign replaced.
    pub fn with_signs(&self, signs: &[Sign]) -> EventSeries {
        assert_eq!(signs.len(), self.events.len());
        let events = self
            .events
            .iter()
            .zip(signs)
            .map(|(e, s)| OrderBookEvent { sign: *s, ..*e })
            .collect();
        EventSeries {
            events,
            ..self.clone()
        }
    }

    /// Copy of the series with every sign reversed.
    pub fn sign_flipped(&self) -> EventSeries {
        let signs: Vec<Sign> = self.events.iter().map(|e| e.sign.flipped()).collect();
        self.with_signs(&signs)
    }

    /// Copy in which each month is a single segment, so lag pairs may span
    /// days but never a monthly broker-code change.
    pub fn merged_by_month(&self) -> EventSeries {
        let mut events = self.events.clone();
        let mut seg = (u32::MAX, 0u32, 0u64);
        for e in &mut events {
            if e.month_id != seg.0 {
                seg = (e.month_id, e.day_id, 0);
            }
            e.day_id = seg.1;
            e.seq = seg.2;
            seg.2 += 1;
        }
        EventSeries::new(events).expect("merging days keeps the series valid")
    }

    /// Events for which `keep` holds, re-validated as a new series.
    pub fn filter<F>(&self, mut keep: F) -> Result<EventSeries>
    where
        F: FnMut(&OrderBookEvent) -> bool,
    {
        EventSeries::new(self.events.iter().filter(|e| keep(e)).copied().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ev(day: u32, ts: i64, etype: EventType) -> ClassifiedEvent {
        ClassifiedEvent {
            day_id: day,
            month_id: 5,
            timestamp_ms: ts,
            broker: 1,
            etype,
            sign: Sign::Buy,
            mid_before: 200,
        }
    }

    #[test]
    fn four_types_each_quarter() {
        let s = build_series(vec![
            ev(1, 0, EventType::MO0),
            ev(1, 1, EventType::MO_PRIME),
            ev(1, 1, EventType::LO0),
            ev(1, 2, EventType::LO_PRIME),
        ])
        .unwrap();
        for t in [
            EventType::MO0,
            EventType::MO_PRIME,
            EventType::LO0,
            EventType::LO_PRIME,
        ] {
            assert_eq!(s.type_freq(t), 0.25);
        }
        assert_eq!(s.type_freq(EventType::CA0), 0.0);
        let seqs: Vec<u64> = s.events().iter().map(|e| e.seq).collect();
        assert_eq!(seqs, vec![0, 1, 2, 3]);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(build_series(vec![]), Err(Error::EmptySeries)));
    }

    #[test]
    fn out_of_order_timestamp_reports_index() {
        let err =
            build_series(vec![ev(1, 5, EventType::MO0), ev(1, 4, EventType::MO0)]).unwrap_err();
        assert!(matches!(
            err,
            Error::OutOfOrder {
                index: 1,
                day_id: 1
            }
        ));
        let err =
            build_series(vec![ev(2, 5, EventType::MO0), ev(1, 6, EventType::MO0)]).unwrap_err();
        assert!(matches!(err, Error::DayOrder { index: 1, .. }));
    }

    #[test]
    fn day_boundaries_and_seq_reset() {
        let s = build_series(vec![
            ev(1, 0, EventType::MO0),
            ev(1, 3, EventType::MO0),
            ev(2, 1, EventType::CA0),
            ev(4, 0, EventType::LO0),
            ev(4, 0, EventType::LO0),
        ])
        .unwrap();
        assert_eq!(s.day_boundaries(), &[0..2, 2..3, 3..5]);
        let seqs: Vec<u64> = s.events().iter().map(|e| e.seq).collect();
        assert_eq!(seqs, vec![0, 1, 0, 0, 1]);
    }

    #[test]
    fn frequencies_match_independent_histogram() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let raw: Vec<ClassifiedEvent> = (0..10)
                .map(|i| ev(1, i, EventType::ALL[rng.gen_range(0..6)]))
                .collect();
            let mut hist = std::collections::HashMap::new();
            for e in &raw {
                *hist.entry(e.etype.code()).or_insert(0usize) += 1;
            }
            let s = build_series(raw).unwrap();
            let total: f64 = s.type_freqs().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            for t in EventType::ALL {
                let expect = *hist.get(t.code()).unwrap_or(&0) as f64 / 10.0;
                assert_eq!(s.type_freq(t), expect);
            }
        }
    }
}
