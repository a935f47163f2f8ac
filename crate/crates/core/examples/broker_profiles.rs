//! Who provides and who takes liquidity: per-broker ratios, their histogram,
//! activity concentration and the binned immediate impact.

use brokerflow::broker_stats::{
    binned_immediate_impact, broker_profiles, f_histogram, monthly_concentration, ACTIVE_THRESHOLD,
};
use brokerflow::synthgen::{generate, Role, SynthConfig};

fn main() -> brokerflow::Result<()> {
    let (series, truth) = generate(&SynthConfig {
        n_events: 400_000,
        provider_strength: 2.0,
        ..Default::default()
    })?;
    let profiles = broker_profiles(&series);

    println!("month  broker  role       alpha   f(MO')");
    for p in profiles
        .iter()
        .filter(|p| p.month_id == profiles[0].month_id)
    {
        let f = p.f_mo_prime.map_or("-".to_string(), |f| format!("{f:.3}"));
        let role = format!("{:?}", truth.roles[&p.broker]);
        println!(
            "{:>5} {:>7}  {role:<9} {:>6.3}  {f}",
            p.month_id, p.broker, p.activity_fraction
        );
    }
    let providers = truth.brokers_with(Role::Provider).len();
    println!("\n{providers} providers; their f should sit well below the splitters'");

    let hist = f_histogram(&profiles, ACTIVE_THRESHOLD);
    let filled: Vec<String> = hist
        .edges
        .iter()
        .zip(&hist.counts)
        .filter(|(_, c)| **c > 0)
        .map(|(e, c)| format!("[{e:.2}, {:.2}): {c}", e + hist.bin_width))
        .collect();
    println!("f histogram: {}", filled.join("  "));

    for m in monthly_concentration(&profiles, ACTIVE_THRESHOLD) {
        println!(
            "month {}: Gini {:.3}, std log10 alpha {:.3}, {} of {} brokers active",
            m.month_id, m.stats.gini, m.stats.std_log10_alpha, m.stats.n_active, m.stats.n_brokers
        );
    }

    for b in binned_immediate_impact(&series, &profiles, 3, ACTIVE_THRESHOLD)? {
        println!(
            "bin {}: mean f {:.3}, R(1) of LO' {:?}, of MO' {:?} half-ticks",
            b.bin + 1,
            b.mean_f,
            b.r_lo_prime,
            b.r_mo_prime
        );
    }
    Ok(())
}
