//! Term-by-term evaluation used to cross-check the indexed estimators.

use super::columns::Columns;
use super::correlation::CorrelationSums;
use super::response::{ResponseSums, TypeSplitSums};
use super::LagGrid;
use crate::event_model::EventClass;

pub(super) fn response_sums(cols: &Columns, class: EventClass, lags: &LagGrid) -> ResponseSums {
    let mut acc = ResponseSums::zeros(lags);
    for t in 0..cols.len() {
        if !class.contains(type_of(cols, t)) {
            continue;
        }
        let eps = cols.signs[t];
        for (i, &l) in lags.lags().iter().enumerate() {
            let end = t + l;
            if end >= cols.day_end[t] {
                continue;
            }
            acc.total[i] += (cols.mids[end] - cols.mids[t]) * eps;
            for tp in t..end {
                if cols.brokers[tp] == cols.brokers[t] {
                    acc.same[i] += (cols.mids[tp + 1] - cols.mids[tp]) * eps;
                }
            }
            acc.counts[i] += 1;
        }
    }
    acc
}

pub(super) fn type_split_sums(cols: &Columns, class: EventClass, lags: &LagGrid) -> TypeSplitSums {
    let mut acc = TypeSplitSums::zeros(lags);
    for t in 0..cols.len() {
        if !class.contains(type_of(cols, t)) {
            continue;
        }
        let eps = cols.signs[t];
        for (i, &l) in lags.lags().iter().enumerate() {
            let end = t + l;
            if end >= cols.day_end[t] {
                continue;
            }
            for tp in t..end {
                let k = cols.types[tp] as usize;
                let step = (cols.mids[tp + 1] - cols.mids[tp]) * eps;
                if cols.brokers[tp] == cols.brokers[t] {
                    acc.same[k][i] += step;
                } else {
                    acc.diff[k][i] += step;
                }
            }
            acc.counts[i] += 1;
        }
    }
    acc
}

pub(super) fn correlation_sums(
    cols: &Columns,
    pi1: EventClass,
    pi2: EventClass,
    lags: &LagGrid,
) -> CorrelationSums {
    let mut acc = CorrelationSums::zeros(lags);
    for (i, &l) in lags.lags().iter().enumerate() {
        acc.pairs[i] = cols.pairs_at(l);
        for t in 0..cols.len() {
            let end = t + l;
            if end >= cols.day_end[t] {
                continue;
            }
            if !pi1.contains(type_of(cols, t)) || !pi2.contains(type_of(cols, end)) {
                continue;
            }
            let prod = cols.signs[t] * cols.signs[end];
            acc.total[i] += prod;
            if cols.brokers[t] == cols.brokers[end] {
                acc.same[i] += prod;
            }
            acc.counts[i] += 1;
        }
    }
    acc
}

fn type_of(cols: &Columns, t: usize) -> crate::event_model::EventType {
    crate::event_model::EventType::from_index(cols.types[t] as usize).expect("valid type index")
}
