//! Configuration, CSV/JSON output and the command surface.
//!
//! Every command is a plain function returning a [`CommandOutcome`]; the
//! binary only parses flags and maps outcomes to exit codes.

mod commands;
mod output;
mod report;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{LagGrid, Method};
use crate::event_model::{read_classified_csv, EventSeries, SessionFilter};
use crate::stat_tests::TTestKind;

pub use commands::{
    cmd_brokers, cmd_calibrate, cmd_classify, cmd_corr, cmd_resp, cmd_synth, cmd_tests,
    load_synth_config,
};
pub use output::{
    curve_csv, fmt_f64, write_curve_csv, write_decomposed, write_json, CurveMeta, Part,
};
pub use report::{cmd_report, Failure, FileEntry, ReportIndex, REPORT_SCHEMA_VERSION};

/// Which lag pairs and windows are admissible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DayBoundary {
    /// Pairs and windows stay inside one trading day.
    #[default]
    Exclude,
    /// Pairs may span days within a month, overnight moves included.
    WithinMonth,
}

/// Run configuration, read from flat TOML. See `configs/run.toml` for the
/// documented defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Classified event CSVs, one per stock.
    pub inputs: Vec<PathBuf>,
    pub output_dir: PathBuf,
    /// Lags 1..=dense_until are all used (events).
    pub dense_until: usize,
    /// Largest lag (events).
    pub max_lag: usize,
    /// Log-spaced lags between dense_until and max_lag.
    pub n_log_lags: usize,
    pub day_boundary: DayBoundary,
    pub method: Method,
    /// Share of a month's market orders that makes a broker active.
    pub active_threshold: f64,
    pub n_bins: usize,
    pub fit_min_lag: usize,
    pub fit_max_lag: usize,
    pub seed: u64,
    pub bootstrap_reps: usize,
    /// Orders per bootstrap block.
    pub block_len: usize,
    pub reshuffle_reps: usize,
    /// Pairs for the noise floor, as `PI1:PI2` with type or kind codes.
    pub reshuffle_pairs: Vec<String>,
    pub ttest: TTestKind,
    /// Intraday window applied by `classify`, `HH:MM-HH:MM` UTC.
    pub session: String,
    pub session_filter: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inputs: Vec::new(),
            output_dir: PathBuf::from("report"),
            dense_until: 20,
            max_lag: 1000,
            n_log_lags: 30,
            day_boundary: DayBoundary::Exclude,
            method: Method::Indexed,
            active_threshold: crate::broker_stats::ACTIVE_THRESHOLD,
            n_bins: 5,
            fit_min_lag: 10,
            fit_max_lag: 500,
            seed: 42,
            bootstrap_reps: 200,
            block_len: 10,
            reshuffle_reps: 50,
            reshuffle_pairs: vec!["MO:MO".into()],
            ttest: TTestKind::Welch,
            session: "08:00-16:30".into(),
            session_filter: true,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.lag_grid()?;
        if self.fit_min_lag == 0 || self.fit_min_lag >= self.fit_max_lag {
            return Err(Error::Config(
                "fit_min_lag must be in [1, fit_max_lag)".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.active_threshold) {
            return Err(Error::Config("active_threshold must be in [0, 1)".into()));
        }
        if self.n_bins == 0 || self.block_len == 0 {
            return Err(Error::Config(
                "n_bins and block_len must be positive".into(),
            ));
        }
        self.session_filter()?;
        for p in &self.reshuffle_pairs {
            parse_pair(p)?;
        }
        Ok(())
    }

    pub fn lag_grid(&self) -> Result<LagGrid> {
        if self.max_lag == 0 {
            return Err(Error::Config("max_lag must be positive".into()));
        }
        LagGrid::log_spaced(self.dense_until, self.max_lag, self.n_log_lags)
    }

    pub fn session_filter(&self) -> Result<SessionFilter> {
        if self.session_filter {
            SessionFilter::parse(&self.session)
        } else {
            Ok(SessionFilter::disabled())
        }
    }

    /// Apply the day-boundary policy to a loaded series.
    pub fn prepare(&self, series: EventSeries) -> EventSeries {
        match self.day_boundary {
            DayBoundary::Exclude => series,
            DayBoundary::WithinMonth => series.merged_by_month(),
        }
    }

    /// Load every input with the day-boundary policy applied.
    pub fn load_inputs(&self) -> Result<Vec<(String, EventSeries)>> {
        if self.inputs.is_empty() {
            return Err(Error::Config("no input files given".into()));
        }
        self.inputs
            .iter()
            .map(|p| Ok((stock_name(p), self.prepare(read_classified_csv(p)?))))
            .collect()
    }
}

/// File stem used to label a stock.
pub fn stock_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "stock".into())
}

pub(crate) fn parse_pair(
    s: &str,
) -> Result<(
    crate::event_model::EventClass,
    crate::event_model::EventClass,
)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("pair `{s}` must look like MO:MO")))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

/// What a command produced, and whether any part of it failed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommandOutcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
    pub failures: Vec<String>,
}

impl CommandOutcome {
    /// 0 on full success, 2 when some computations failed.
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            2
        }
    }
}

/// Exit code for an error that aborted a command.
pub fn error_exit_code(e: &Error) -> i32 {
    if e.is_input_error() {
        1
    } else {
        2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = RunConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
        cfg.validate().unwrap();
    }

    #[test]
    fn partial_toml_keeps_defaults() {
        let cfg: RunConfig =
            toml::from_str("max_lag = 50\nday_boundary = \"within_month\"\n").unwrap();
        assert_eq!(cfg.max_lag, 50);
        assert_eq!(cfg.day_boundary, DayBoundary::WithinMonth);
        assert_eq!(cfg.n_bins, 5);
        assert!(toml::from_str::<RunConfig>("nonsense = 1").is_err());
    }

    #[test]
    fn bad_values_rejected() {
        let mut cfg = RunConfig {
            fit_min_lag: 600,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        cfg = RunConfig {
            reshuffle_pairs: vec!["MO".into()],
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        cfg = RunConfig {
            session: "9-5".into(),
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
