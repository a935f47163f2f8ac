//! Sign correlations between order types, decomposed by broker identity,
//! and the excess probability that a broker repeats itself.

use brokerflow::estimators::{excess_probability, sign_correlation, CorrelationMatrix, LagGrid};
use brokerflow::event_model::{EventType, OrderKind};
use brokerflow::synthgen::{generate, SynthConfig};

fn main() -> brokerflow::Result<()> {
    let (series, _) = generate(&SynthConfig {
        n_events: 300_000,
        provider_strength: 1.5,
        ..Default::default()
    })?;
    let lags = LagGrid::log_spaced(10, 1000, 12)?;

    let mo = OrderKind::Market;
    let c = sign_correlation(&series, mo, mo, &lags)?;
    let excess = excess_probability(&series, mo, mo, &lags)?;
    println!(
        "{:>6} {:>10} {:>10} {:>10} {:>10}",
        "lag", "C", "C_same", "C_diff", "excess"
    );
    for i in 0..c.total.len() {
        println!(
            "{:>6} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            c.total.lags[i],
            c.total.values[i],
            c.same.values[i],
            c.diff.values[i],
            excess.values[i]
        );
    }

    // all 36 type pairs share one pass over the data
    let matrix = CorrelationMatrix::compute(&series, &lags);
    let mo0 = EventType::new(OrderKind::Market, false);
    let lop = EventType::new(OrderKind::Limit, true);
    let cross = matrix.curve(mo0.into(), lop.into())?;
    println!(
        "\nC_diff(MO0 -> LOp) at lag {}: {:.4}",
        cross.diff.lags[0], cross.diff.values[0]
    );
    Ok(())
}
