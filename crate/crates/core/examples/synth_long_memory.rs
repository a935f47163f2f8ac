//! Metaorder splitting alone produces long memory in order signs: with
//! lengths tailed as L^-β the sign autocorrelation decays as l^-(β-1).

use brokerflow::estimators::{sign_correlation, LagGrid};
use brokerflow::event_model::{EventType, OrderKind};
use brokerflow::stat_tests::{fit_power_law, Trend};
use brokerflow::synthgen::{generate, SynthConfig};

fn main() -> brokerflow::Result<()> {
    let mo0 = EventType::new(OrderKind::Market, false);
    let lags = LagGrid::log_spaced(20, 1000, 30)?;
    for beta in [1.3, 1.5, 1.7] {
        let (series, truth) = generate(&SynthConfig::splitters_only(1_000_000, 4, beta, 1))?;
        let c = sign_correlation(&series, mo0, mo0, &lags)?;
        let fit = fit_power_law(&c.same, (10, 500), Trend::Decay)?;
        println!(
            "beta {beta}: fitted gamma {:.3}, expected {:.3}, C_diff(1) = {:.4}",
            fit.exponent, truth.gamma, c.diff.values[0]
        );
    }
    Ok(())
}
