use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::output::{fmt_f64, fmt_opt, write_decomposed, write_json, write_table, write_text};
use super::{parse_pair, CommandOutcome, CurveMeta, Part, RunConfig};
use crate::broker_stats::{
    binned_immediate_impact, broker_profiles, f_histogram, monthly_concentration, size_scatter,
    BrokerProfile,
};
use crate::error::Result;
use crate::estimators::{
    average_decomposed, response_with, sign_correlation_with, CorrelationMatrix, DecomposedCurve,
    LagGrid, Method,
};
use crate::event_model::{EventClass, EventSeries, EventType, OrderKind};
use crate::stat_tests::{
    block_bootstrap_f, equal_means_matrix, fit_power_law, price_changing_indicators,
    reshuffle_noise_floor, JsonReport, Trend,
};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StockEntry {
    pub name: String,
    pub input: PathBuf,
    pub n_events: usize,
    pub n_days: usize,
    pub type_counts: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileEntry {
    /// Relative to the report directory, `/`-separated.
    pub path: String,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stock: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Failure {
    pub step: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stock: Option<String>,
    pub error: String,
}

/// Contents of `index.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportIndex {
    pub schema_version: u32,
    pub stocks: Vec<StockEntry>,
    pub lags: Vec<usize>,
    pub config: RunConfig,
    pub files: Vec<FileEntry>,
    pub failures: Vec<Failure>,
}

/// Collects files and failures while sections are written.
pub(crate) struct Recorder<'a> {
    root: &'a Path,
    pub files: Vec<FileEntry>,
    pub failures: Vec<Failure>,
}

impl<'a> Recorder<'a> {
    pub fn new(root: &'a Path) -> Self {
        Recorder {
            root,
            files: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn file(&mut self, path: PathBuf, kind: &str, stock: Option<&str>) {
        let rel = path.strip_prefix(self.root).unwrap_or(&path);
        let rel = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect::<Vec<_>>()
            .join("/");
        self.files.push(FileEntry {
            path: rel,
            kind: kind.into(),
            stock: stock.map(str::to_owned),
        });
    }

    pub fn files(&mut self, paths: Vec<PathBuf>, kind: &str, stock: Option<&str>) {
        for p in paths {
            self.file(p, kind, stock);
        }
    }

    pub fn fail(&mut self, step: impl Into<String>, stock: Option<&str>, error: impl ToString) {
        let f = Failure {
            step: step.into(),
            stock: stock.map(str::to_owned),
            error: error.to_string(),
        };
        log::warn!("{}: {}", f.step, f.error);
        self.failures.push(f);
    }

    /// Run a fallible section; an error becomes a recorded failure.
    pub fn attempt<T>(&mut self, step: &str, stock: Option<&str>, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.fail(step, stock, e);
                None
            }
        }
    }

    pub fn into_outcome(self, summary: String) -> CommandOutcome {
        CommandOutcome {
            files: self.files.iter().map(|f| self.root.join(&f.path)).collect(),
            summary,
            failures: self
                .failures
                .iter()
                .map(|f| format!("{}: {}", f.step, f.error))
                .collect(),
        }
    }
}

pub(crate) type CorrCurves = BTreeMap<(EventType, EventType), DecomposedCurve>;
pub(crate) type RespCurves = BTreeMap<String, DecomposedCurve>;

/// All 36 type-pair correlations, plus the aggregate market-order curve.
/// Pairs involving an absent type are recorded as failures.
pub(crate) fn correlation_grid(
    series: &EventSeries,
    lags: &LagGrid,
    method: Method,
    rec: &mut Recorder,
    stock: Option<&str>,
) -> (CorrCurves, Option<DecomposedCurve>) {
    let matrix = (method == Method::Indexed).then(|| CorrelationMatrix::compute(series, lags));
    let mo = EventClass::Kind(OrderKind::Market);
    let r = match &matrix {
        Some(m) => m.curve(mo, mo),
        None => sign_correlation_with(series, mo, mo, lags, Method::Direct),
    };
    let corr_mo = rec.attempt("correlation MO->MO", stock, r);
    let mut out = BTreeMap::new();
    for a in EventType::ALL {
        for b in EventType::ALL {
            let r = match &matrix {
                Some(m) => m.curve(a.into(), b.into()),
                None => sign_correlation_with(series, a, b, lags, Method::Direct),
            };
            if let Some(c) = rec.attempt(&format!("correlation {a}->{b}"), stock, r) {
                out.insert((a, b), c);
            }
        }
    }
    (out, corr_mo)
}

pub(crate) fn response_classes() -> Vec<EventClass> {
    let mut v: Vec<EventClass> = EventType::ALL.iter().map(|t| (*t).into()).collect();
    v.push(OrderKind::Market.into());
    v
}

pub(crate) fn response_grid(
    series: &EventSeries,
    lags: &LagGrid,
    method: Method,
    rec: &mut Recorder,
    stock: Option<&str>,
) -> RespCurves {
    let mut out = BTreeMap::new();
    for class in response_classes() {
        let curve = response_with(series, class, lags, method);
        if curve.total.is_empty() {
            rec.fail(
                format!("response {class}"),
                stock,
                format!("no {class} events with a full window"),
            );
            continue;
        }
        out.insert(class.code().to_string(), curve);
    }
    out
}

pub(crate) fn write_corr_grid(
    dir: &Path,
    curves: &CorrCurves,
    rec: &mut Recorder,
    stock: Option<&str>,
) {
    for ((a, b), c) in curves {
        let meta = CurveMeta {
            stock: stock.map(str::to_owned),
            ..CurveMeta::correlation(a.code(), b.code(), Part::Same)
        };
        let r = write_decomposed(&dir.join("corr"), &meta, c, &[Part::Same, Part::Diff]);
        if let Some(files) = rec.attempt("write correlation", stock, r) {
            rec.files(files, "correlation", stock);
        }
    }
}

pub(crate) fn write_resp_grid(
    dir: &Path,
    curves: &RespCurves,
    rec: &mut Recorder,
    stock: Option<&str>,
) {
    for (code, c) in curves {
        let meta = CurveMeta {
            stock: stock.map(str::to_owned),
            ..CurveMeta::response(code, Part::Total)
        };
        let r = write_decomposed(
            &dir.join("resp"),
            &meta,
            c,
            &[Part::Total, Part::Same, Part::Diff],
        );
        if let Some(files) = rec.attempt("write response", stock, r) {
            rec.files(files, "response", stock);
        }
    }
}

fn profile_rows(profiles: &[BrokerProfile]) -> Vec<Vec<String>> {
    profiles
        .iter()
        .map(|p| {
            vec![
                p.month_id.to_string(),
                p.broker.to_string(),
                p.n_trades_initiated.to_string(),
                fmt_f64(p.activity_fraction),
                p.n_mo_prime.to_string(),
                p.n_lo_prime.to_string(),
                fmt_opt(p.f_mo_prime),
                p.n_orders.to_string(),
            ]
        })
        .collect()
}

/// Profiles, f histogram, binned impact, size scatter and concentration.
pub(crate) fn brokers_section(
    dir: &Path,
    series: &EventSeries,
    cfg: &RunConfig,
    rec: &mut Recorder,
    stock: Option<&str>,
) {
    let bdir = dir.join("brokers");
    let profiles = broker_profiles(series);
    let thr = cfg.active_threshold;

    let r = write_table(
        &bdir.join("profiles.csv"),
        &[
            "month_id",
            "broker",
            "n_trades_initiated",
            "activity_fraction",
            "n_mo_prime",
            "n_lo_prime",
            "f_mo_prime",
            "n_orders",
        ],
        &profile_rows(&profiles),
    );
    if let Some(p) = rec.attempt("broker profiles", stock, r) {
        rec.file(p, "broker_profiles", stock);
    }

    let h = f_histogram(&profiles, thr);
    let rows: Vec<Vec<String>> = h
        .edges
        .iter()
        .zip(&h.counts)
        .map(|(e, c)| vec![fmt_f64(*e), fmt_f64(e + h.bin_width), c.to_string()])
        .collect();
    let r = write_table(
        &bdir.join("f_histogram.csv"),
        &["f_lo", "f_hi", "count"],
        &rows,
    );
    if let Some(p) = rec.attempt("f histogram", stock, r) {
        rec.file(p, "f_histogram", stock);
    }

    let rows: Vec<Vec<String>> = size_scatter(&profiles, thr)
        .iter()
        .map(|s| {
            vec![
                s.month_id.to_string(),
                s.broker.to_string(),
                s.n_orders.to_string(),
                fmt_f64(s.f_mo_prime),
            ]
        })
        .collect();
    let r = write_table(
        &bdir.join("size_scatter.csv"),
        &["month_id", "broker", "n_orders", "f_mo_prime"],
        &rows,
    );
    if let Some(p) = rec.attempt("size scatter", stock, r) {
        rec.file(p, "size_scatter", stock);
    }

    let bins = binned_immediate_impact(series, &profiles, cfg.n_bins, thr);
    if let Some(bins) = rec.attempt("binned impact", stock, bins) {
        let rows: Vec<Vec<String>> = bins
            .iter()
            .map(|b| {
                vec![
                    b.bin.to_string(),
                    b.members.len().to_string(),
                    fmt_f64(b.mean_f),
                    fmt_opt(b.r_lo_prime),
                    b.n_lo_prime.to_string(),
                    fmt_opt(b.r_mo_prime),
                    b.n_mo_prime.to_string(),
                ]
            })
            .collect();
        let r = write_table(
            &bdir.join("binned_impact.csv"),
            &[
                "bin",
                "n_broker_months",
                "mean_f",
                "r_lo_prime_1",
                "n_lo_prime",
                "r_mo_prime_1",
                "n_mo_prime",
            ],
            &rows,
        );
        if let Some(p) = rec.attempt("binned impact", stock, r) {
            rec.file(p, "binned_impact", stock);
        }
    }

    let monthly = monthly_concentration(&profiles, thr);
    let mut rows: Vec<Vec<String>> = monthly
        .iter()
        .map(|m| {
            vec![
                m.month_id.to_string(),
                m.stats.n_brokers.to_string(),
                m.stats.n_active.to_string(),
                fmt_f64(m.stats.gini),
                fmt_f64(m.stats.std_log10_alpha),
            ]
        })
        .collect();
    if !monthly.is_empty() {
        let k = monthly.len() as f64;
        let mean = |f: fn(&crate::broker_stats::MonthlyConcentration) -> f64| {
            monthly.iter().map(f).sum::<f64>() / k
        };
        rows.push(vec![
            "mean".into(),
            fmt_f64(mean(|m| m.stats.n_brokers as f64)),
            fmt_f64(mean(|m| m.stats.n_active as f64)),
            fmt_f64(mean(|m| m.stats.gini)),
            fmt_f64(mean(|m| m.stats.std_log10_alpha)),
        ]);
    } else {
        rec.fail("concentration", stock, "no month with at least two brokers");
    }
    let r = write_table(
        &dir.join("concentration.csv"),
        &[
            "month_id",
            "n_brokers",
            "n_active",
            "gini",
            "std_log10_alpha",
        ],
        &rows,
    );
    if let Some(p) = rec.attempt("concentration", stock, r) {
        rec.file(p, "concentration", stock);
    }
}

/// Table 2 analogue: pairwise t-tests between the bins' per-broker
/// immediate impacts, one group per (bin, order type).
pub(crate) fn ttest_section(
    dir: &Path,
    series: &EventSeries,
    cfg: &RunConfig,
    rec: &mut Recorder,
    stock: Option<&str>,
) {
    let profiles = broker_profiles(series);
    let Some(bins) = rec.attempt(
        "t-test bins",
        stock,
        binned_immediate_impact(series, &profiles, cfg.n_bins, cfg.active_threshold),
    ) else {
        return;
    };
    // Table 2 analogue: one group per (bin, order type)
    let mut groups = Vec::new();
    for b in &bins {
        groups.push((
            format!("bin{}_LOp", b.bin + 1),
            b.members
                .iter()
                .filter_map(|m| m.r_lo_prime)
                .collect::<Vec<f64>>(),
        ));
        groups.push((
            format!("bin{}_MOp", b.bin + 1),
            b.members
                .iter()
                .filter_map(|m| m.r_mo_prime)
                .collect::<Vec<f64>>(),
        ));
    }
    let m = equal_means_matrix(&groups, cfg.ttest);
    let tdir = dir.join("tests");
    if let Some(p) = rec.attempt(
        "t-test matrix",
        stock,
        write_text(&tdir.join("ttest_impact.csv"), &m.to_csv()),
    ) {
        rec.file(p, "ttest_csv", stock);
    }
    let report = JsonReport {
        method: format!("{:?} two-sample t-test", m.method).to_lowercase(),
        parameters: serde_json::json!({ "groups": m.labels, "n_bins": cfg.n_bins }),
        seed: None,
        results: &m,
    };
    if let Some(p) = rec.attempt(
        "t-test report",
        stock,
        write_json(&tdir.join("ttest_impact.json"), &report),
    ) {
        rec.file(p, "test_report", stock);
    }
}

/// Bootstrap of f, reshuffle noise floors, t-tests and power-law fits.
pub(crate) fn tests_section(
    dir: &Path,
    series: &EventSeries,
    cfg: &RunConfig,
    lags: &LagGrid,
    corr_mo: Option<&DecomposedCurve>,
    resp_mo: Option<&DecomposedCurve>,
    rec: &mut Recorder,
    stock: Option<&str>,
) {
    let tdir = dir.join("tests");
    ttest_section(dir, series, cfg, rec, stock);

    let boot = block_bootstrap_f(
        &price_changing_indicators(series),
        cfg.block_len,
        cfg.bootstrap_reps,
        cfg.seed,
    );
    let report = JsonReport {
        method: "circular block bootstrap of f".into(),
        parameters: serde_json::json!({ "block_len": cfg.block_len, "n_reps": cfg.bootstrap_reps }),
        seed: Some(cfg.seed),
        results: boot,
    };
    if let Some(p) = rec.attempt(
        "bootstrap",
        stock,
        write_json(&tdir.join("bootstrap_f.json"), &report),
    ) {
        rec.file(p, "test_report", stock);
    }

    for pair in &cfg.reshuffle_pairs {
        let step = format!("noise floor {pair}");
        let Some((a, b)) = rec.attempt(&step, stock, parse_pair(pair)) else {
            continue;
        };
        let r = reshuffle_noise_floor(series, a, b, lags, cfg.reshuffle_reps, cfg.seed, false);
        if let Some(floor) = rec.attempt(&step, stock, r) {
            let report = JsonReport {
                method: "sign reshuffle noise floor".into(),
                parameters: serde_json::json!({ "pi1": a.code(), "pi2": b.code(), "n_reps": cfg.reshuffle_reps }),
                seed: Some(cfg.seed),
                results: floor,
            };
            let name = format!("noise_floor_{}_{}.json", a.code(), b.code());
            if let Some(p) = rec.attempt(&step, stock, write_json(&tdir.join(name), &report)) {
                rec.file(p, "test_report", stock);
            }
        }
    }

    let window = (cfg.fit_min_lag, cfg.fit_max_lag);
    let mut fits = BTreeMap::new();
    if let Some(c) = corr_mo {
        if let Some(f) = rec.attempt(
            "fit C_MO_MO",
            stock,
            fit_power_law(&c.total, window, Trend::Decay),
        ) {
            fits.insert("C_MO_MO_total", f);
        }
        if let Some(f) = rec.attempt(
            "fit C_MO_MO same",
            stock,
            fit_power_law(&c.same, window, Trend::Decay),
        ) {
            fits.insert("C_MO_MO_same", f);
        }
    }
    if let Some(r) = resp_mo {
        if let Some(f) = rec.attempt(
            "fit R_MO same",
            stock,
            fit_power_law(&r.same, window, Trend::Growth),
        ) {
            fits.insert("R_MO_same", f);
        }
    }
    let report = JsonReport {
        method: "least squares on log-log".into(),
        parameters: serde_json::json!({ "fit_min_lag": window.0, "fit_max_lag": window.1 }),
        seed: None,
        results: fits,
    };
    if let Some(p) = rec.attempt(
        "power-law fits",
        stock,
        write_json(&tdir.join("power_law.json"), &report),
    ) {
        rec.file(p, "test_report", stock);
    }
}

fn stock_entry(name: &str, input: &Path, series: &EventSeries) -> StockEntry {
    StockEntry {
        name: name.into(),
        input: input.to_path_buf(),
        n_events: series.n_events(),
        n_days: series.day_boundaries().len(),
        type_counts: EventType::ALL
            .iter()
            .map(|t| (t.code().to_string(), series.count(*t)))
            .collect(),
    }
}

/// Full bundle for one stock under `dir`; returns its curves for averaging.
fn stock_bundle(
    dir: &Path,
    series: &EventSeries,
    cfg: &RunConfig,
    lags: &LagGrid,
    rec: &mut Recorder,
    stock: Option<&str>,
) -> (CorrCurves, RespCurves) {
    let (corr, corr_mo) = correlation_grid(series, lags, cfg.method, rec, stock);
    write_corr_grid(dir, &corr, rec, stock);
    let resp = response_grid(series, lags, cfg.method, rec, stock);
    write_resp_grid(dir, &resp, rec, stock);
    brokers_section(dir, series, cfg, rec, stock);
    tests_section(
        dir,
        series,
        cfg,
        lags,
        corr_mo.as_ref(),
        resp.get("MO"),
        rec,
        stock,
    );
    (corr, resp)
}

/// Batch report: correlation grid, responses, broker statistics,
/// concentration and significance tests, with `index.json` at the root.
///
/// With several inputs each stock gets a full bundle under `stocks/<name>/`
/// and the top-level `corr/` and `resp/` hold equal-weight averages.
pub fn cmd_report(cfg: &RunConfig) -> Result<CommandOutcome> {
    cfg.validate()?;
    let lags = cfg.lag_grid()?;
    let inputs = cfg.load_inputs()?;
    let root = cfg.output_dir.as_path();
    let mut rec = Recorder::new(root);
    let stocks: Vec<StockEntry> = inputs
        .iter()
        .zip(&cfg.inputs)
        .map(|((name, s), p)| stock_entry(name, p, s))
        .collect();

    if inputs.len() == 1 {
        stock_bundle(root, &inputs[0].1, cfg, &lags, &mut rec, None);
    } else {
        let mut corr_all = Vec::new();
        let mut resp_all = Vec::new();
        for (name, series) in &inputs {
            let dir = root.join("stocks").join(name);
            let (c, r) = stock_bundle(&dir, series, cfg, &lags, &mut rec, Some(name));
            corr_all.push(c);
            resp_all.push(r);
        }
        let mut corr_avg = CorrCurves::new();
        for a in EventType::ALL {
            for b in EventType::ALL {
                let cs: Vec<DecomposedCurve> = corr_all
                    .iter()
                    .filter_map(|m| m.get(&(a, b)).cloned())
                    .collect();
                if !cs.is_empty() {
                    corr_avg.insert((a, b), average_decomposed(&cs));
                }
            }
        }
        let mut resp_avg = RespCurves::new();
        for class in response_classes() {
            let cs: Vec<DecomposedCurve> = resp_all
                .iter()
                .filter_map(|m| m.get(class.code()).cloned())
                .collect();
            if !cs.is_empty() {
                resp_avg.insert(class.code().to_string(), average_decomposed(&cs));
            }
        }
        write_corr_grid(root, &corr_avg, &mut rec, None);
        write_resp_grid(root, &resp_avg, &mut rec, None);
    }

    let index = ReportIndex {
        schema_version: REPORT_SCHEMA_VERSION,
        stocks,
        lags: lags.lags().to_vec(),
        config: cfg.clone(),
        files: rec.files.clone(),
        failures: rec.failures.clone(),
    };
    let idx_path = write_json(&root.join("index.json"), &index)?;
    rec.file(idx_path, "index", None);
    let summary = format!(
        "report: {} stock(s), {} files, {} failure(s) in {}",
        inputs.len(),
        rec.files.len(),
        rec.failures.len(),
        root.display()
    );
    Ok(rec.into_outcome(summary))
}
