use std::path::Path;

use brokerflow::broker_stats::broker_profiles;
use brokerflow::cli_io::load_synth_config;
use brokerflow::event_model::{EventType, OrderKind};
use brokerflow::synthgen::{generate, Role, SynthConfig};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn splitter_events_carry_metaorder_ids(seed in 0u64..1000, ns in 1usize..5, np in 0usize..4, nf in 0usize..3) {
        let cfg = SynthConfig { n_events: 5000, n_splitters: ns, n_providers: np, n_followers: nf, provider_strength: 1.0, seed, ..Default::default() };
        let (series, truth) = generate(&cfg).unwrap();
        prop_assert_eq!(series.n_events(), 5000);
        prop_assert_eq!(truth.metaorder_ids.len(), 5000);
        prop_assert_eq!(truth.roles.len(), ns + np + nf);
        for (e, id) in series.events().iter().zip(&truth.metaorder_ids) {
            prop_assert_eq!(truth.roles[&e.broker] == Role::Splitter, id.is_some());
        }
        // metaorder signs are constant
        let mut sign_of = std::collections::HashMap::new();
        for (e, id) in series.events().iter().zip(&truth.metaorder_ids) {
            if let Some(id) = id {
                prop_assert_eq!(*sign_of.entry(*id).or_insert(e.sign), e.sign);
            }
        }
    }

    #[test]
    fn providers_take_less_than_splitters(seed in 0u64..1000, pmo in 0.1f64..1.0) {
        let cfg = SynthConfig { n_events: 20_000, p_primed_mo: pmo, provider_strength: 1.5, seed, ..Default::default() };
        let (series, truth) = generate(&cfg).unwrap();
        let profiles = broker_profiles(&series);
        let f_of = |role| -> Vec<f64> {
            profiles.iter().filter(|p| truth.roles[&p.broker] == role).filter_map(|p| p.f_mo_prime).collect()
        };
        let providers = f_of(Role::Provider);
        let splitters = f_of(Role::Splitter);
        prop_assume!(!providers.is_empty() && !splitters.is_empty());
        let max_p = providers.iter().cloned().fold(f64::MIN, f64::max);
        let min_s = splitters.iter().cloned().fold(f64::MAX, f64::min);
        prop_assert!(max_p < min_s, "providers {providers:?} splitters {splitters:?}");
    }
}

#[test]
fn unprimed_splitters_leave_f_undefined() {
    let (series, _) = generate(&SynthConfig::splitters_only(20_000, 3, 1.5, 4)).unwrap();
    assert!(series
        .events()
        .iter()
        .all(|e| e.etype == EventType::new(OrderKind::Market, false)));
    assert!(broker_profiles(&series)
        .iter()
        .all(|p| p.f_mo_prime.is_none()));
}

#[test]
fn truth_reports_gamma_and_echoes_config() {
    let cfg = SynthConfig {
        metaorder_tail_exponent: 1.7,
        n_events: 1000,
        ..Default::default()
    };
    let (_, truth) = generate(&cfg).unwrap();
    assert!((truth.gamma - 0.7).abs() < 1e-12);
    assert_eq!(truth.config, cfg);
    let back: brokerflow::synthgen::SynthTruth =
        serde_json::from_str(&serde_json::to_string(&truth).unwrap()).unwrap();
    assert_eq!(back, truth);
}

#[test]
fn demo_config_is_valid() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/demo_synth.toml");
    let cfg = load_synth_config(&path).unwrap();
    assert_eq!(cfg.n_events, 1_000_000);
    assert!(cfg.provider_strength > 0.0);
}
