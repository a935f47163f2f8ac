use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use super::output::{write_curve_csv, write_decomposed, write_json};
use super::report::{brokers_section, response_grid, tests_section, Recorder};
use super::{CommandOutcome, CurveMeta, Part, RunConfig};
use crate::error::{Error, Result};
use crate::estimators::{
    average_curves, average_decomposed, excess_probability_from, response_decomposed_by_type,
    response_with, sign_correlation_with, DecomposedCurve,
};
use crate::event_model::{
    build_series, classify_all, read_raw_csv, write_classified_csv, write_raw_csv, EventClass,
    EventType, OrderKind, SessionFilter,
};
use crate::synthgen::{calibrate_flat_response, generate, to_raw_messages, SynthConfig};

/// Data rows start on line 2 of a CSV with a header.
fn with_line(e: Error) -> Error {
    match e {
        Error::MalformedQuotes { index, detail } => Error::MalformedQuotes {
            index,
            detail: format!("{detail}; line {}", index + 2),
        },
        Error::InvalidRecord { index, detail } => Error::InvalidRecord {
            index,
            detail: format!("{detail}; line {}", index + 2),
        },
        other => other,
    }
}

/// Classify a raw level-1 CSV into the classified event CSV.
pub fn cmd_classify(
    input: &Path,
    output: &Path,
    session: &SessionFilter,
) -> Result<CommandOutcome> {
    let raw = read_raw_csv(input).map_err(with_line)?;
    let outcome = classify_all(&raw, session).map_err(with_line)?;
    let summary = outcome.summary();
    let series = build_series(outcome.events).map_err(with_line)?;
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = File::create(output).map_err(|e| Error::io(output, e))?;
    write_classified_csv(BufWriter::new(file), series.events())?;
    Ok(CommandOutcome {
        files: vec![output.to_path_buf()],
        summary,
        failures: Vec::new(),
    })
}

fn stock_dir(cfg: &RunConfig, name: &str, n_inputs: usize) -> std::path::PathBuf {
    if n_inputs == 1 {
        cfg.output_dir.clone()
    } else {
        cfg.output_dir.join("stocks").join(name)
    }
}

/// Broker profiles, f histogram, binned impact, size scatter, concentration.
pub fn cmd_brokers(cfg: &RunConfig) -> Result<CommandOutcome> {
    cfg.validate()?;
    let inputs = cfg.load_inputs()?;
    let mut rec = Recorder::new(&cfg.output_dir);
    for (name, series) in &inputs {
        let stock = (inputs.len() > 1).then_some(name.as_str());
        brokers_section(
            &stock_dir(cfg, name, inputs.len()),
            series,
            cfg,
            &mut rec,
            stock,
        );
    }
    let summary = format!("brokers: {} files", rec.files.len());
    Ok(rec.into_outcome(summary))
}

/// Decomposed sign correlation and excess probability for one pair.
pub fn cmd_corr(cfg: &RunConfig, pi1: EventClass, pi2: EventClass) -> Result<CommandOutcome> {
    cfg.validate()?;
    let lags = cfg.lag_grid()?;
    let inputs = cfg.load_inputs()?;
    let mut rec = Recorder::new(&cfg.output_dir);
    let mut curves = Vec::new();
    let mut excess = Vec::new();
    for (name, series) in &inputs {
        let stock = (inputs.len() > 1).then_some(name.as_str());
        let r = sign_correlation_with(series, pi1, pi2, &lags, cfg.method);
        let Some(c) = rec.attempt(&format!("correlation {pi1}->{pi2}"), stock, r) else {
            continue;
        };
        let p2: f64 = EventType::ALL
            .iter()
            .filter(|t| pi2.contains(**t))
            .map(|t| series.type_freq(*t))
            .sum();
        let ex = excess_probability_from(&c, p2);
        if inputs.len() > 1 {
            write_corr_files(
                &stock_dir(cfg, name, inputs.len()),
                pi1,
                pi2,
                &c,
                &ex,
                &mut rec,
                stock,
            );
        }
        curves.push(c);
        excess.push(ex);
    }
    if !curves.is_empty() {
        let c = average_decomposed(&curves);
        let ex = average_curves(&excess);
        write_corr_files(&cfg.output_dir, pi1, pi2, &c, &ex, &mut rec, None);
    }
    let summary = format!("corr {pi1}->{pi2}: {} files", rec.files.len());
    Ok(rec.into_outcome(summary))
}

fn write_corr_files(
    dir: &Path,
    pi1: EventClass,
    pi2: EventClass,
    c: &DecomposedCurve,
    ex: &crate::estimators::LagCurve,
    rec: &mut Recorder,
    stock: Option<&str>,
) {
    let meta = CurveMeta {
        stock: stock.map(str::to_owned),
        ..CurveMeta::correlation(pi1.code(), pi2.code(), Part::Total)
    };
    let r = write_decomposed(dir, &meta, c, &[Part::Total, Part::Same, Part::Diff]);
    if let Some(files) = rec.attempt("write correlation", stock, r) {
        rec.files(files, "correlation", stock);
    }
    let r = write_curve_csv(dir, &meta.with_part(Part::Excess), ex);
    if let Some(p) = rec.attempt("write excess probability", stock, r) {
        rec.file(p, "excess_probability", stock);
    }
}

/// Decomposed response for one class, with the same/diff split by the
/// type of the moving event.
pub fn cmd_resp(cfg: &RunConfig, class: EventClass) -> Result<CommandOutcome> {
    cfg.validate()?;
    let lags = cfg.lag_grid()?;
    let inputs = cfg.load_inputs()?;
    let mut rec = Recorder::new(&cfg.output_dir);
    let mut curves = Vec::new();
    for (name, series) in &inputs {
        let stock = (inputs.len() > 1).then_some(name.as_str());
        let dir = stock_dir(cfg, name, inputs.len());
        let c = response_with(series, class, &lags, cfg.method);
        if c.total.is_empty() {
            rec.fail(
                format!("response {class}"),
                stock,
                format!("no {class} events with a full window"),
            );
            continue;
        }
        if inputs.len() > 1 {
            write_resp_files(&dir, class, &c, &mut rec, stock);
        }
        for pi2 in EventType::ALL {
            let (same, diff) = response_decomposed_by_type(series, class, pi2, &lags);
            for (part, curve) in [(Part::Same, same), (Part::Diff, diff)] {
                let meta = CurveMeta {
                    pi2: Some(pi2.code().into()),
                    stock: stock.map(str::to_owned),
                    ..CurveMeta::response(class.code(), part)
                };
                let path = dir.join("by_type").join(format!(
                    "R_{}_by_{}_{}.csv",
                    class.code(),
                    pi2.code(),
                    part.code()
                ));
                let r = super::output::write_text(&path, &super::output::curve_csv(&meta, &curve));
                if let Some(p) = rec.attempt("write response by type", stock, r) {
                    rec.file(p, "response_by_type", stock);
                }
            }
        }
        curves.push(c);
    }
    if !curves.is_empty() {
        write_resp_files(
            &cfg.output_dir,
            class,
            &average_decomposed(&curves),
            &mut rec,
            None,
        );
    }
    let summary = format!("resp {class}: {} files", rec.files.len());
    Ok(rec.into_outcome(summary))
}

fn write_resp_files(
    dir: &Path,
    class: EventClass,
    c: &DecomposedCurve,
    rec: &mut Recorder,
    stock: Option<&str>,
) {
    let meta = CurveMeta {
        stock: stock.map(str::to_owned),
        ..CurveMeta::response(class.code(), Part::Total)
    };
    let r = write_decomposed(dir, &meta, c, &[Part::Total, Part::Same, Part::Diff]);
    if let Some(files) = rec.attempt("write response", stock, r) {
        rec.files(files, "response", stock);
    }
}

/// Bootstrap, noise floors, t-test matrix and power-law fits.
pub fn cmd_tests(cfg: &RunConfig) -> Result<CommandOutcome> {
    cfg.validate()?;
    let lags = cfg.lag_grid()?;
    let inputs = cfg.load_inputs()?;
    let mut rec = Recorder::new(&cfg.output_dir);
    let mo = EventClass::Kind(OrderKind::Market);
    for (name, series) in &inputs {
        let stock = (inputs.len() > 1).then_some(name.as_str());
        let dir = stock_dir(cfg, name, inputs.len());
        let corr_mo = rec.attempt(
            "correlation MO->MO",
            stock,
            sign_correlation_with(series, mo, mo, &lags, cfg.method),
        );
        let resp = response_grid(series, &lags, cfg.method, &mut rec, stock);
        tests_section(
            &dir,
            series,
            cfg,
            &lags,
            corr_mo.as_ref(),
            resp.get("MO"),
            &mut rec,
            stock,
        );
    }
    let summary = format!("tests: {} files", rec.files.len());
    Ok(rec.into_outcome(summary))
}

pub fn load_synth_config(path: &Path) -> Result<SynthConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cfg: SynthConfig =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Generate a synthetic stream: `events.csv`, `truth.json` and, if asked,
/// the equivalent raw messages in `raw.csv`.
pub fn cmd_synth(cfg: &SynthConfig, out_dir: &Path, with_raw: bool) -> Result<CommandOutcome> {
    let (series, truth) = generate(cfg)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let events_path = out_dir.join("events.csv");
    let file = File::create(&events_path).map_err(|e| Error::io(&events_path, e))?;
    write_classified_csv(BufWriter::new(file), series.events())?;
    let mut files = vec![
        events_path,
        write_json(&out_dir.join("truth.json"), &truth)?,
    ];
    if with_raw {
        let raw_path = out_dir.join("raw.csv");
        let file = File::create(&raw_path).map_err(|e| Error::io(&raw_path, e))?;
        write_raw_csv(BufWriter::new(file), &to_raw_messages(&series, cfg))?;
        files.push(raw_path);
    }
    let counts: Vec<String> = EventType::ALL
        .iter()
        .map(|t| format!("{t}={}", series.count(*t)))
        .collect();
    Ok(CommandOutcome {
        files,
        summary: format!("synth: {} events ({})", series.n_events(), counts.join(" ")),
        failures: Vec::new(),
    })
}

/// Tune provider strength for a flat market-order response over `window`.
///
/// Not reaching the flatness target is reported as a partial failure.
pub fn cmd_calibrate(
    cfg: &SynthConfig,
    window: (usize, usize),
    output: &Path,
) -> Result<CommandOutcome> {
    let cal = calibrate_flat_response(cfg, window)?;
    let path = write_json(output, &cal)?;
    let mut failures = Vec::new();
    if !cal.converged {
        failures.push(format!(
            "flatness {:.3} did not reach {}",
            cal.flatness,
            crate::synthgen::FLATNESS_TARGET
        ));
    }
    Ok(CommandOutcome {
        files: vec![path],
        summary: format!(
            "calibrate: phi* = {:.4}, flatness = {:.4} after {} evaluations",
            cal.phi,
            cal.flatness,
            cal.trajectory.len()
        ),
        failures,
    })
}
