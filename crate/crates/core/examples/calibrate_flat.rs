//! Tune how strongly liquidity providers counter price moves until the
//! total market-order response is flat, while its two parts are not.
//!
//! `cargo run --release --example calibrate_flat [config.toml]`

use brokerflow::cli_io::load_synth_config;
use brokerflow::estimators::{response_decomposed, LagGrid};
use brokerflow::event_model::OrderKind;
use brokerflow::synthgen::{calibrate_flat_response, generate, SynthConfig};

fn main() -> brokerflow::Result<()> {
    let base = match std::env::args().nth(1) {
        Some(path) => load_synth_config(path.as_ref())?,
        None => SynthConfig {
            n_events: 1_000_000,
            p_primed_mo: 0.5,
            ..Default::default()
        },
    };
    let cfg = SynthConfig {
        provider_strength: 0.0,
        ..base
    };
    let cal = calibrate_flat_response(&cfg, (100, 1000))?;
    println!(
        "phi* = {:.4}, flatness {:.3}, converged {} after {} evaluations",
        cal.phi,
        cal.flatness,
        cal.converged,
        cal.trajectory.len()
    );

    let (series, _) = generate(&SynthConfig {
        provider_strength: cal.phi,
        ..cfg
    })?;
    let lags = LagGrid::new(vec![1, 10, 20, 50, 100, 200, 500, 1000])?;
    let r = response_decomposed(&series, OrderKind::Market, &lags);
    println!("{:>6} {:>9} {:>9} {:>9}", "lag", "total", "same", "diff");
    for i in 0..r.total.len() {
        println!(
            "{:>6} {:>9.3} {:>9.3} {:>9.3}",
            r.total.lags[i], r.total.values[i], r.same.values[i], r.diff.values[i]
        );
    }
    Ok(())
}
