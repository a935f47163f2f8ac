//! Error bars and significance: block bootstrap of f, the sign-reshuffle
//! noise floor, a t-test matrix and a power-law fit.

use brokerflow::estimators::{sign_correlation, LagGrid};
use brokerflow::event_model::OrderKind;
use brokerflow::stat_tests::{
    block_bootstrap_f, equal_means_matrix, fit_power_law, price_changing_indicators,
    reshuffle_noise_floor, TTestKind, Trend,
};
use brokerflow::synthgen::{generate, SynthConfig};

fn main() -> brokerflow::Result<()> {
    let (series, _) = generate(&SynthConfig {
        n_events: 500_000,
        provider_strength: 2.0,
        ..Default::default()
    })?;
    let mo = OrderKind::Market;
    let lags = LagGrid::log_spaced(20, 1000, 20)?;

    for b in block_bootstrap_f(&price_changing_indicators(&series), 10, 200, 1)
        .iter()
        .take(6)
    {
        println!(
            "month {} broker {:>2}: f = {:.3} +- {:.4} over {} orders",
            b.month_id, b.broker, b.f, b.f_std, b.n_orders
        );
    }

    let floor = reshuffle_noise_floor(&series, mo, mo, &lags, 20, 2, false)?;
    println!(
        "\nnoise floor of C_MO,MO: mean |C| {:.2e}, 99% quantile {:.2e}",
        floor.mean_abs, floor.q99
    );

    let c = sign_correlation(&series, mo, mo, &lags)?;
    let fit = fit_power_law(&c.same, (10, 500), Trend::Decay)?;
    println!(
        "C_same ~ {:.3} l^-{:.3} over [{}, {}], R^2 = {:.3}",
        fit.amplitude, fit.exponent, fit.fit_window.0, fit.fit_window.1, fit.r_squared
    );

    let groups: Vec<(String, Vec<f64>)> = (0..4)
        .map(|g| {
            (
                format!("g{g}"),
                (0..30)
                    .map(|i| ((i * 7 + g * 3) % 11) as f64 + g as f64 * 0.8)
                    .collect(),
            )
        })
        .collect();
    let m = equal_means_matrix(&groups, TTestKind::Welch);
    print!("\n{}", m.to_csv());
    println!(
        "{} of {} pairs differ at 5%",
        m.n_rejected(0.05),
        groups.len() * (groups.len() - 1) / 2
    );
    Ok(())
}
