//! Shared helpers: a literal, loop-by-loop evaluation of every estimator
//! and small random series to feed it.
#![allow(dead_code)]

use brokerflow::event_model::{EventClass, EventSeries, EventType};
use brokerflow::synthgen::{generate, SynthConfig};

/// Integer numerators straight from the definitions.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct OracleResponse {
    pub total: Vec<i64>,
    pub same: Vec<i64>,
    pub counts: Vec<u64>,
    /// `[type][lag]`, steps caused by events of that type.
    pub same_by_type: [Vec<i64>; 6],
    pub diff_by_type: [Vec<i64>; 6],
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct OracleCorrelation {
    pub total: Vec<i64>,
    pub same: Vec<i64>,
    pub counts: Vec<u64>,
    pub pairs: Vec<u64>,
}

fn day_of_each(series: &EventSeries) -> Vec<u32> {
    series.events().iter().map(|e| e.day_id).collect()
}

/// Response numerators: the price change from just before `t` to just
/// before `t + ℓ`, with the same-broker part summed one event at a time.
pub fn response(series: &EventSeries, class: EventClass, lags: &[usize]) -> OracleResponse {
    let ev = series.events();
    let day = day_of_each(series);
    let n = ev.len();
    let mut out = OracleResponse {
        total: vec![0; lags.len()],
        same: vec![0; lags.len()],
        counts: vec![0; lags.len()],
        same_by_type: std::array::from_fn(|_| vec![0; lags.len()]),
        diff_by_type: std::array::from_fn(|_| vec![0; lags.len()]),
    };
    for t in 0..n {
        if !class.contains(ev[t].etype) {
            continue;
        }
        let eps = ev[t].sign.value();
        for (i, &l) in lags.iter().enumerate() {
            let end = t + l;
            if end >= n || day[end] != day[t] {
                continue;
            }
            out.counts[i] += 1;
            out.total[i] += eps * (ev[end].mid_before - ev[t].mid_before);
            for s in t..end {
                let step = ev[s + 1].mid_before - ev[s].mid_before;
                let k = ev[s].etype.index();
                if ev[s].broker == ev[t].broker {
                    out.same[i] += eps * step;
                    out.same_by_type[k][i] += eps * step;
                } else {
                    out.diff_by_type[k][i] += eps * step;
                }
            }
        }
    }
    out
}

/// Correlation numerators: sign products over in-day pairs `(t, t + ℓ)`.
pub fn correlation(
    series: &EventSeries,
    pi1: EventClass,
    pi2: EventClass,
    lags: &[usize],
) -> OracleCorrelation {
    let ev = series.events();
    let day = day_of_each(series);
    let n = ev.len();
    let mut out = OracleCorrelation {
        total: vec![0; lags.len()],
        same: vec![0; lags.len()],
        counts: vec![0; lags.len()],
        pairs: vec![0; lags.len()],
    };
    for (i, &l) in lags.iter().enumerate() {
        for t in 0..n {
            let u = t + l;
            if u >= n || day[u] != day[t] {
                continue;
            }
            out.pairs[i] += 1;
            if !(pi1.contains(ev[t].etype) && pi2.contains(ev[u].etype)) {
                continue;
            }
            let prod = ev[t].sign.value() * ev[u].sign.value();
            out.counts[i] += 1;
            out.total[i] += prod;
            if ev[t].broker == ev[u].broker {
                out.same[i] += prod;
            }
        }
    }
    out
}

/// Unconditional frequency of a class.
pub fn freq(series: &EventSeries, class: EventClass) -> f64 {
    let n = series
        .events()
        .iter()
        .filter(|e| class.contains(e.etype))
        .count();
    n as f64 / series.n_events() as f64
}

/// All single types plus the three kinds.
pub fn all_classes() -> Vec<EventClass> {
    let mut v: Vec<EventClass> = EventType::ALL
        .iter()
        .map(|t| EventClass::Type(*t))
        .collect();
    for k in brokerflow::event_model::OrderKind::ALL {
        v.push(EventClass::Kind(k));
    }
    v
}

/// A small generated series with several short days and every role present.
pub fn small_series(seed: u64, n_events: usize, events_per_day: usize) -> EventSeries {
    let cfg = SynthConfig {
        n_events,
        events_per_day,
        n_splitters: 1 + (seed % 3) as usize,
        n_providers: 1 + (seed % 4) as usize,
        n_followers: (seed % 2) as usize,
        provider_strength: (seed % 5) as f64 * 0.4,
        p_primed_mo: 0.5,
        min_counter_delay: 2,
        max_counter_delay: 40,
        seed,
        ..SynthConfig::default()
    };
    generate(&cfg).expect("valid config").0
}

pub fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
