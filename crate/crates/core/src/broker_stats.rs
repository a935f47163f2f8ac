//! Broker heterogeneity: activity shares, liquidity-provision ratios,
//! concentration, and immediate impact binned by provision ratio.
//!
//! Broker codes are only stable within a month, so every statistic here is
//! keyed by `(month_id, broker)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event_model::{BrokerId, EventSeries, EventType, OrderKind};

/// Default activity threshold: 1% of the month's market orders.
pub const ACTIVE_THRESHOLD: f64 = 0.01;
pub const F_HIST_BIN_WIDTH: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrokerProfile {
    pub month_id: u32,
    pub broker: BrokerId,
    /// Market orders placed (both `MO⁰` and `MO′`).
    pub n_trades_initiated: u64,
    /// Share of the month's market orders, `α`.
    pub activity_fraction: f64,
    pub n_mo_prime: u64,
    pub n_lo_prime: u64,
    /// `#MO′ / (#MO′ + #LO′)`; `None` without price-changing orders.
    pub f_mo_prime: Option<f64>,
    /// Orders of any type, the size proxy.
    pub n_orders: u64,
}

#[derive(Default)]
struct Tally {
    mo: u64,
    mo_prime: u64,
    lo_prime: u64,
    all: u64,
}

/// One profile per broker active in each month, sorted by `(month, broker)`.
pub fn broker_profiles(series: &EventSeries) -> Vec<BrokerProfile> {
    let mut tallies: BTreeMap<(u32, BrokerId), Tally> = BTreeMap::new();
    let mut month_mo: BTreeMap<u32, u64> = BTreeMap::new();
    for e in series.events() {
        let t = tallies.entry((e.month_id, e.broker)).or_default();
        t.all += 1;
        if e.etype.kind == OrderKind::Market {
            t.mo += 1;
            *month_mo.entry(e.month_id).or_default() += 1;
        }
        match e.etype {
            EventType::MO_PRIME => t.mo_prime += 1,
            EventType::LO_PRIME => t.lo_prime += 1,
            _ => {}
        }
    }
    tallies
        .into_iter()
        .map(|((month_id, broker), t)| {
            let total = month_mo.get(&month_id).copied().unwrap_or(0);
            let priced = t.mo_prime + t.lo_prime;
            BrokerProfile {
                month_id,
                broker,
                n_trades_initiated: t.mo,
                activity_fraction: if total > 0 {
                    t.mo as f64 / total as f64
                } else {
                    0.0
                },
                n_mo_prime: t.mo_prime,
                n_lo_prime: t.lo_prime,
                f_mo_prime: (priced > 0).then(|| t.mo_prime as f64 / priced as f64),
                n_orders: t.all,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationStats {
    pub gini: f64,
    /// Over active brokers only.
    pub std_log10_alpha: f64,
    pub n_active: usize,
    pub n_brokers: usize,
}

/// Gini coefficient of non-negative values via the sorted-rank formula.
pub fn gini(values: &[f64]) -> f64 {
    let n = values.len();
    let total: f64 = values.iter().sum();
    if n == 0 || total <= 0.0 {
        return 0.0;
    }
    let mut x = values.to_vec();
    x.sort_by(f64::total_cmp);
    let weighted: f64 = x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v).sum();
    let nf = n as f64;
    (2.0 * weighted / (nf * total) - (nf + 1.0) / nf).clamp(0.0, 1.0)
}

/// Gini over all activity fractions; log-spread over those above `active_threshold`.
pub fn concentration(alphas: &[f64], active_threshold: f64) -> Result<ConcentrationStats> {
    if alphas.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "concentration needs at least two brokers, got {}",
            alphas.len()
        )));
    }
    let logs: Vec<f64> = alphas
        .iter()
        .filter(|a| **a > active_threshold)
        .map(|a| a.log10())
        .collect();
    let std = if logs.len() > 1 {
        let m = logs.iter().sum::<f64>() / logs.len() as f64;
        (logs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (logs.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(ConcentrationStats {
        gini: gini(alphas),
        std_log10_alpha: std,
        n_active: logs.len(),
        n_brokers: alphas.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlyConcentration {
    pub month_id: u32,
    #[serde(flatten)]
    pub stats: ConcentrationStats,
}

/// Concentration per month; months with fewer than two brokers are skipped.
pub fn monthly_concentration(
    profiles: &[BrokerProfile],
    active_threshold: f64,
) -> Vec<MonthlyConcentration> {
    let mut by_month: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for p in profiles {
        by_month
            .entry(p.month_id)
            .or_default()
            .push(p.activity_fraction);
    }
    by_month
        .into_iter()
        .filter_map(|(month_id, alphas)| {
            concentration(&alphas, active_threshold)
                .ok()
                .map(|stats| MonthlyConcentration { month_id, stats })
        })
        .collect()
}

/// Active broker-months with a defined provision ratio, ordered by
/// `(f, month, broker)`.
pub fn eligible_profiles(profiles: &[BrokerProfile], active_threshold: f64) -> Vec<&BrokerProfile> {
    let mut out: Vec<&BrokerProfile> = profiles
        .iter()
        .filter(|p| p.f_mo_prime.is_some() && p.activity_fraction >= active_threshold)
        .collect();
    out.sort_by(|a, b| {
        a.f_mo_prime
            .unwrap()
            .total_cmp(&b.f_mo_prime.unwrap())
            .then(a.month_id.cmp(&b.month_id))
            .then(a.broker.cmp(&b.broker))
    });
    out
}

/// Immediate impact of one broker-month's price-changing orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrokerImpact {
    pub month_id: u32,
    pub broker: BrokerId,
    pub f_mo_prime: f64,
    /// Mean `(p_{t+1} - p_t) ε_t` over the broker's `LO′`, in half-ticks.
    pub r_lo_prime: Option<f64>,
    pub r_mo_prime: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactBin {
    pub bin: usize,
    pub members: Vec<BrokerImpact>,
    pub mean_f: f64,
    /// Pooled over all the bin's `LO′` events.
    pub r_lo_prime: Option<f64>,
    pub r_mo_prime: Option<f64>,
    pub n_lo_prime: u64,
    pub n_mo_prime: u64,
}

#[derive(Default, Clone, Copy)]
struct ImpactSum {
    lo: (i64, u64),
    mo: (i64, u64),
}

fn ratio((s, n): (i64, u64)) -> Option<f64> {
    (n > 0).then(|| s as f64 / n as f64)
}

fn impact_sums(series: &EventSeries) -> BTreeMap<(u32, BrokerId), ImpactSum> {
    let ev = series.events();
    let mut out: BTreeMap<(u32, BrokerId), ImpactSum> = BTreeMap::new();
    for day in series.day_boundaries() {
        for t in day.start..day.end.saturating_sub(1) {
            let e = &ev[t];
            let slot = match e.etype {
                EventType::LO_PRIME => 0,
                EventType::MO_PRIME => 1,
                _ => continue,
            };
            let r = (ev[t + 1].mid_before - e.mid_before) * e.sign.value();
            let acc = out.entry((e.month_id, e.broker)).or_default();
            let cell = if slot == 0 { &mut acc.lo } else { &mut acc.mo };
            cell.0 += r;
            cell.1 += 1;
        }
    }
    out
}

/// Equal-count bins of broker-months by provision ratio, with the one-event
/// response of `LO′` and `MO′` in each.
///
/// Bin sizes differ by at most one; earlier bins take the remainder.
pub fn binned_immediate_impact(
    series: &EventSeries,
    profiles: &[BrokerProfile],
    n_bins: usize,
    active_threshold: f64,
) -> Result<Vec<ImpactBin>> {
    let eligible = eligible_profiles(profiles, active_threshold);
    if n_bins == 0 || eligible.len() < n_bins {
        return Err(Error::InsufficientData(format!(
            "{} eligible broker-months for {n_bins} bins",
            eligible.len()
        )));
    }
    let sums = impact_sums(series);
    let base = eligible.len() / n_bins;
    let extra = eligible.len() % n_bins;
    let mut bins = Vec::with_capacity(n_bins);
    let mut it = eligible.into_iter();
    for bin in 0..n_bins {
        let size = base + usize::from(bin < extra);
        let mut pooled = ImpactSum::default();
        let mut members = Vec::with_capacity(size);
        for p in it.by_ref().take(size) {
            let s = sums
                .get(&(p.month_id, p.broker))
                .copied()
                .unwrap_or_default();
            pooled.lo.0 += s.lo.0;
            pooled.lo.1 += s.lo.1;
            pooled.mo.0 += s.mo.0;
            pooled.mo.1 += s.mo.1;
            members.push(BrokerImpact {
                month_id: p.month_id,
                broker: p.broker,
                f_mo_prime: p.f_mo_prime.expect("eligible"),
                r_lo_prime: ratio(s.lo),
                r_mo_prime: ratio(s.mo),
            });
        }
        bins.push(ImpactBin {
            bin,
            mean_f: members.iter().map(|m| m.f_mo_prime).sum::<f64>() / members.len() as f64,
            members,
            r_lo_prime: ratio(pooled.lo),
            r_mo_prime: ratio(pooled.mo),
            n_lo_prime: pooled.lo.1,
            n_mo_prime: pooled.mo.1,
        });
    }
    Ok(bins)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FHistogram {
    pub bin_width: f64,
    /// Lower bin edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Active broker-months with no price-changing orders.
    pub n_undefined: u64,
}

/// Histogram of provision ratios over active broker-months; `f = 1` falls in
/// the last bin.
pub fn f_histogram(profiles: &[BrokerProfile], active_threshold: f64) -> FHistogram {
    let n = (1.0 / F_HIST_BIN_WIDTH).round() as usize;
    let mut counts = vec![0u64; n];
    let mut n_undefined = 0;
    for p in profiles
        .iter()
        .filter(|p| p.activity_fraction >= active_threshold)
    {
        match p.f_mo_prime {
            Some(f) => counts[((f / F_HIST_BIN_WIDTH) as usize).min(n - 1)] += 1,
            None => n_undefined += 1,
        }
    }
    FHistogram {
        bin_width: F_HIST_BIN_WIDTH,
        edges: (0..n).map(|i| i as f64 * F_HIST_BIN_WIDTH).collect(),
        counts,
        n_undefined,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizePoint {
    pub month_id: u32,
    pub broker: BrokerId,
    pub n_orders: u64,
    pub f_mo_prime: f64,
}

/// Broker size against provision ratio, to check `f` does not track size.
pub fn size_scatter(profiles: &[BrokerProfile], active_threshold: f64) -> Vec<SizePoint> {
    eligible_profiles(profiles, active_threshold)
        .into_iter()
        .map(|p| SizePoint {
            month_id: p.month_id,
            broker: p.broker,
            n_orders: p.n_orders,
            f_mo_prime: p.f_mo_prime.expect("eligible"),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_model::{build_series, ClassifiedEvent, Sign};
    use proptest::prelude::*;

    fn ev(day: u32, broker: BrokerId, etype: EventType, sign: Sign, mid: i64) -> ClassifiedEvent {
        ClassifiedEvent {
            day_id: day,
            month_id: 1,
            timestamp_ms: 0,
            broker,
            etype,
            sign,
            mid_before: mid,
        }
    }

    #[test]
    fn provision_ratio_by_hand() {
        use EventType as T;
        let b = Sign::Buy;
        let s = build_series(vec![
            ev(1, 1, T::MO_PRIME, b, 100),
            ev(1, 1, T::MO_PRIME, b, 101),
            ev(1, 1, T::MO_PRIME, b, 102),
            ev(1, 1, T::LO_PRIME, b, 103),
            ev(1, 2, T::MO0, b, 104),
            ev(1, 2, T::LO0, b, 104),
        ])
        .unwrap();
        let p = broker_profiles(&s);
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].f_mo_prime, Some(0.75));
        assert_eq!(p[1].f_mo_prime, None);
        assert_eq!(p[0].activity_fraction + p[1].activity_fraction, 1.0);
        assert_eq!(p[0].activity_fraction, 0.75);
        assert_eq!(p[1].n_orders, 2);
    }

    #[test]
    fn gini_analytic_cases() {
        assert_eq!(gini(&[0.25; 4]), 0.0);
        assert!((gini(&[1.0, 0.0, 0.0, 0.0]) - 0.75).abs() < 1e-15);
        let c = concentration(&[0.5, 0.5], 0.01).unwrap();
        assert_eq!(c.gini, 0.0);
        assert_eq!(c.n_active, 2);
        assert!(concentration(&[1.0], 0.01).is_err());
    }

    #[test]
    fn immediate_impact_bins() {
        use EventType as T;
        let (b, s) = (Sign::Buy, Sign::Sell);
        // broker 1 only takes (f = 1), broker 2 only provides (f = 0)
        let series = build_series(vec![
            ev(1, 1, T::MO_PRIME, b, 100),
            ev(1, 2, T::LO_PRIME, s, 102),
            ev(1, 1, T::MO_PRIME, s, 101),
            ev(1, 2, T::LO_PRIME, b, 99),
            ev(1, 1, T::MO0, b, 100),
        ])
        .unwrap();
        let profiles = broker_profiles(&series);
        let bins = binned_immediate_impact(&series, &profiles, 2, 0.0).unwrap();
        assert_eq!(bins[0].mean_f, 0.0);
        assert_eq!(bins[0].r_lo_prime, Some(1.0));
        assert_eq!(bins[0].r_mo_prime, None);
        assert_eq!(bins[1].r_mo_prime, Some(2.0));
        assert!(binned_immediate_impact(&series, &profiles, 3, 0.0).is_err());
    }

    #[test]
    fn histogram_edges() {
        let mk = |f: Option<f64>| BrokerProfile {
            month_id: 1,
            broker: 1,
            n_trades_initiated: 1,
            activity_fraction: 0.5,
            n_mo_prime: 0,
            n_lo_prime: 0,
            f_mo_prime: f,
            n_orders: 1,
        };
        let h = f_histogram(
            &[mk(Some(0.0)), mk(Some(1.0)), mk(Some(0.05)), mk(None)],
            0.01,
        );
        assert_eq!(h.counts.len(), 20);
        assert_eq!(h.counts[0], 1);
        assert_eq!(h.counts[1], 1);
        assert_eq!(h.counts[19], 1);
        assert_eq!(h.n_undefined, 1);
    }

    proptest! {
        #[test]
        fn gini_invariances(xs in proptest::collection::vec(0.0f64..10.0, 2..40), k in 0.01f64..100.0) {
            prop_assume!(xs.iter().sum::<f64>() > 0.0);
            let g = gini(&xs);
            prop_assert!((0.0..=1.0).contains(&g));
            let scaled: Vec<f64> = xs.iter().map(|x| x * k).collect();
            prop_assert!((gini(&scaled) - g).abs() < 1e-9);
            let mut rev = xs.clone();
            rev.reverse();
            prop_assert!((gini(&rev) - g).abs() < 1e-12);
        }

        #[test]
        fn bins_partition(fs in proptest::collection::vec(0.0f64..1.0, 5..60), n_bins in 1usize..6) {
            let profiles: Vec<BrokerProfile> = fs.iter().enumerate().map(|(i, f)| BrokerProfile {
                month_id: (i % 3) as u32,
                broker: i as BrokerId,
                n_trades_initiated: 1,
                activity_fraction: 0.5,
                n_mo_prime: 1,
                n_lo_prime: 1,
                f_mo_prime: Some((f * 10.0).round() / 10.0),
                n_orders: 1,
            }).collect();
            let series = build_series(vec![ev(1, 1, EventType::MO0, Sign::Buy, 10)]).unwrap();
            let bins = binned_immediate_impact(&series, &profiles, n_bins, 0.01).unwrap();
            let sizes: Vec<usize> = bins.iter().map(|b| b.members.len()).collect();
            prop_assert_eq!(sizes.iter().sum::<usize>(), fs.len());
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            let mut keys: Vec<_> = bins.iter().flat_map(|b| b.members.iter().map(|m| (m.month_id, m.broker))).collect();
            keys.sort();
            keys.dedup();
            prop_assert_eq!(keys.len(), fs.len());
        }
    }
}
