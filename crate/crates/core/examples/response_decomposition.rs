//! Response of the price to market orders, split into the part moved by the
//! broker who sent the order and the part moved by everyone else.

use brokerflow::estimators::{response_decomposed, response_decomposed_by_type, LagGrid};
use brokerflow::event_model::{EventType, OrderKind};
use brokerflow::synthgen::{generate, SynthConfig};

fn main() -> brokerflow::Result<()> {
    let cfg = SynthConfig {
        n_events: 300_000,
        p_primed_mo: 0.5,
        provider_strength: 2.0,
        ..Default::default()
    };
    let (series, _) = generate(&cfg)?;
    let lags = LagGrid::new(vec![1, 2, 5, 10, 20, 50, 100, 200, 500, 1000])?;

    let r = response_decomposed(&series, OrderKind::Market, &lags);
    println!(
        "R_MO in half-ticks (identity residual {:.1e})",
        r.identity_residual()
    );
    println!("{:>6} {:>10} {:>10} {:>10}", "lag", "total", "same", "diff");
    for i in 0..r.total.len() {
        println!(
            "{:>6} {:>10.4} {:>10.4} {:>10.4}",
            r.total.lags[i], r.total.values[i], r.same.values[i], r.diff.values[i]
        );
    }

    // who undoes the impact: other brokers' price-changing limit orders
    let lop = EventType::new(OrderKind::Limit, true);
    let (_, diff) = response_decomposed_by_type(&series, OrderKind::Market, lop, &lags);
    println!("\nR^diff from other brokers' LOp events:");
    for (l, v, _) in diff.iter() {
        println!("{l:>6} {v:>10.4}");
    }
    Ok(())
}
