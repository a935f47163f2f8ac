mod common;

use brokerflow::estimators::{
    correlation_sums, excess_probability, response_by_type, response_sums, sign_correlation,
    CorrelationMatrix, LagGrid, Method,
};
use brokerflow::event_model::{EventClass, EventType, OrderKind};
use proptest::prelude::*;

fn check_response(seed: u64, n: usize, per_day: usize, max_lag: usize) {
    let series = common::small_series(seed, n, per_day);
    let grid = LagGrid::range(1, max_lag).unwrap();
    for class in common::all_classes() {
        let want = common::response(&series, class, grid.lags());
        for method in [Method::Indexed, Method::Direct] {
            let got = response_sums(&series, class, &grid, method);
            assert_eq!(got.total, want.total, "{class} {method:?} total");
            assert_eq!(got.same, want.same, "{class} {method:?} same");
            assert_eq!(got.counts, want.counts, "{class} {method:?} counts");
            let split = response_by_type(&series, class, &grid, method);
            assert_eq!(
                split.same, want.same_by_type,
                "{class} {method:?} same by type"
            );
            assert_eq!(
                split.diff, want.diff_by_type,
                "{class} {method:?} diff by type"
            );
        }
    }
}

fn check_correlation(seed: u64, n: usize, per_day: usize, max_lag: usize) {
    let series = common::small_series(seed, n, per_day);
    let grid = LagGrid::range(1, max_lag).unwrap();
    let matrix = CorrelationMatrix::compute(&series, &grid);
    let classes = common::all_classes();
    for &pi1 in &classes {
        for &pi2 in &classes {
            let want = common::correlation(&series, pi1, pi2, grid.lags());
            for method in [Method::Indexed, Method::Direct] {
                let got = correlation_sums(&series, pi1, pi2, &grid, method);
                assert_eq!(got.total, want.total, "{pi1}->{pi2} {method:?}");
                assert_eq!(got.same, want.same, "{pi1}->{pi2} {method:?}");
                assert_eq!(got.counts, want.counts, "{pi1}->{pi2} {method:?}");
                assert_eq!(got.pairs, want.pairs, "{pi1}->{pi2} {method:?}");
            }
            assert_eq!(matrix.sums(pi1, pi2).total, want.total);

            let (p1, p2) = (common::freq(&series, pi1), common::freq(&series, pi2));
            let Ok(curve) = sign_correlation(&series, pi1, pi2, &grid) else {
                assert!(p1 == 0.0 || p2 == 0.0);
                continue;
            };
            let excess = excess_probability(&series, pi1, pi2, &grid).unwrap();
            let mut k = 0;
            for (i, &l) in grid.lags().iter().enumerate() {
                if want.counts[i] == 0 {
                    continue;
                }
                let norm = want.pairs[i] as f64 * p1 * p2;
                assert_eq!(curve.total.lags[k], l);
                assert!(
                    common::relative_gap(curve.total.values[k], want.total[i] as f64 / norm)
                        < 1e-12
                );
                assert!(
                    common::relative_gap(curve.same.values[k], want.same[i] as f64 / norm) < 1e-12
                );
                let diff = (want.total[i] - want.same[i]) as f64 / norm;
                assert!(common::relative_gap(curve.diff.values[k], diff) < 1e-12);
                let ex = p2 * want.same[i] as f64 / norm;
                assert!(common::relative_gap(excess.values[k], ex) < 1e-12);
                k += 1;
            }
            assert_eq!(k, curve.total.len());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn response_matches_literal_sums(seed in 0u64..10_000, n in 50usize..1000, per_day in 20usize..400, max_lag in 1usize..=50) {
        check_response(seed, n, per_day, max_lag);
    }

    #[test]
    fn correlation_matches_literal_sums(seed in 0u64..10_000, n in 50usize..600, per_day in 20usize..300, max_lag in 1usize..=30) {
        check_correlation(seed, n, per_day, max_lag);
    }

    #[test]
    fn same_plus_diff_is_total(seed in 0u64..10_000, n in 100usize..2000) {
        let series = common::small_series(seed, n, 500);
        let grid = LagGrid::log_spaced(10, 200, 10).unwrap();
        for class in common::all_classes() {
            let r = brokerflow::estimators::response_decomposed(&series, class, &grid);
            prop_assert!(r.identity_residual() <= 1e-9);
            if let Ok(c) = sign_correlation(&series, class, EventClass::Kind(OrderKind::Market), &grid) {
                prop_assert!(c.identity_residual() <= 1e-9);
            }
        }
    }
}

#[test]
fn one_step_response_is_the_configured_move() {
    // every primed event moves the mid by exactly ε half-ticks
    let series = common::small_series(7, 5000, 1000);
    let grid = LagGrid::new(vec![1]).unwrap();
    for t in EventType::ALL {
        let r = brokerflow::estimators::response(&series, t, &grid);
        if r.is_empty() {
            continue;
        }
        let want = if t.primed { 1.0 } else { 0.0 };
        assert_eq!(r.values[0], want, "{t}");
    }
}
