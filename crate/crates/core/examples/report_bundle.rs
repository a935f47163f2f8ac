//! Write a full report bundle for a synthetic stock: the 72-curve
//! correlation grid, responses, broker tables and significance reports.

use std::fs::File;
use std::io::BufWriter;

use brokerflow::cli_io::{cmd_report, RunConfig};
use brokerflow::event_model::write_classified_csv;
use brokerflow::synthgen::{generate, SynthConfig};

fn main() -> brokerflow::Result<()> {
    let dir = std::env::temp_dir().join("brokerflow_report_example");
    std::fs::create_dir_all(&dir).map_err(|e| brokerflow::Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let input = dir.join("synth.csv");
    let (series, _) = generate(&SynthConfig {
        n_events: 200_000,
        provider_strength: 2.0,
        ..Default::default()
    })?;
    let file = File::create(&input).map_err(|e| brokerflow::Error::Io {
        path: input.clone(),
        source: e,
    })?;
    write_classified_csv(BufWriter::new(file), series.events())?;

    let cfg = RunConfig {
        inputs: vec![input],
        output_dir: dir.join("report"),
        bootstrap_reps: 100,
        reshuffle_reps: 10,
        ..Default::default()
    };
    let outcome = cmd_report(&cfg)?;
    println!("{}", outcome.summary);
    for f in outcome.failures {
        println!("failed: {f}");
    }
    Ok(())
}
