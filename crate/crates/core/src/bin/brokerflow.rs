use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use brokerflow::cli_io::{
    cmd_brokers, cmd_calibrate, cmd_classify, cmd_corr, cmd_report, cmd_resp, cmd_synth, cmd_tests,
    error_exit_code, load_synth_config, CommandOutcome, DayBoundary, RunConfig,
};
use brokerflow::estimators::Method;
use brokerflow::event_model::EventClass;
use brokerflow::stat_tests::TTestKind;
use brokerflow::synthgen::SynthConfig;
use brokerflow::Result;

#[derive(Parser)]
#[command(
    name = "brokerflow",
    version,
    about = "Broker-decomposed order-flow statistics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify raw level-1 messages into the six event types.
    Classify {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Intraday window, HH:MM-HH:MM UTC.
        #[arg(long, default_value = "08:00-16:30")]
        session: String,
        /// Keep messages outside the session window.
        #[arg(long)]
        no_session_filter: bool,
    },
    /// Full report bundle: correlation grid, responses, brokers, tests.
    Report(RunArgs),
    /// Broker profiles, f histogram, binned impact and concentration.
    Brokers(RunArgs),
    /// Decomposed sign correlation for one pair of classes.
    Corr {
        /// Conditioning class, e.g. MO0 or MO.
        pi1: EventClass,
        pi2: EventClass,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Decomposed response for one class.
    Resp {
        class: EventClass,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Bootstrap, noise floor, t-tests and power-law fits.
    Tests(RunArgs),
    /// Generate a synthetic classified stream with ground truth.
    Synth {
        #[command(flatten)]
        synth: SynthArgs,
        #[arg(short, long, default_value = "synth")]
        out: PathBuf,
        /// Also write the equivalent raw messages.
        #[arg(long)]
        raw: bool,
    },
    /// Tune provider strength for a flat market-order response.
    Calibrate {
        #[command(flatten)]
        synth: SynthArgs,
        #[arg(long, default_value_t = 100)]
        window_lo: usize,
        #[arg(long, default_value_t = 1000)]
        window_hi: usize,
        #[arg(short, long, default_value = "calibration.json")]
        output: PathBuf,
    },
}

/// Overrides applied on top of the config file, or the defaults.
#[derive(Args)]
struct RunArgs {
    /// Classified event CSVs, one per stock.
    inputs: Vec<PathBuf>,
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(short, long = "out")]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    dense_until: Option<usize>,
    #[arg(long)]
    max_lag: Option<usize>,
    #[arg(long)]
    n_log_lags: Option<usize>,
    #[arg(long, value_parser = parse_day_boundary)]
    day_boundary: Option<DayBoundary>,
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    #[arg(long)]
    active_threshold: Option<f64>,
    #[arg(long)]
    n_bins: Option<usize>,
    #[arg(long)]
    fit_min_lag: Option<usize>,
    #[arg(long)]
    fit_max_lag: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    bootstrap_reps: Option<usize>,
    #[arg(long)]
    block_len: Option<usize>,
    #[arg(long)]
    reshuffle_reps: Option<usize>,
    /// Noise-floor pair such as MO:MO; repeatable.
    #[arg(long = "reshuffle-pair")]
    reshuffle_pairs: Vec<String>,
    #[arg(long, value_parser = parse_ttest)]
    ttest: Option<TTestKind>,
}

#[derive(Args)]
struct SynthArgs {
    /// TOML generator config; defaults are used when absent.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_events: Option<usize>,
    /// φ; for `calibrate` this is where the search starts.
    #[arg(long)]
    provider_strength: Option<f64>,
}

fn parse_day_boundary(s: &str) -> std::result::Result<DayBoundary, String> {
    match s {
        "exclude" => Ok(DayBoundary::Exclude),
        "within_month" => Ok(DayBoundary::WithinMonth),
        _ => Err(format!("expected exclude or within_month, got `{s}`")),
    }
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    match s {
        "indexed" => Ok(Method::Indexed),
        "direct" => Ok(Method::Direct),
        _ => Err(format!("expected indexed or direct, got `{s}`")),
    }
}

fn parse_ttest(s: &str) -> std::result::Result<TTestKind, String> {
    match s {
        "welch" => Ok(TTestKind::Welch),
        "student" => Ok(TTestKind::Student),
        _ => Err(format!("expected welch or student, got `{s}`")),
    }
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if !self.inputs.is_empty() {
            cfg.inputs = self.inputs;
        }
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = self.$f { cfg.$f = v; })*};
        }
        set!(
            output_dir,
            dense_until,
            max_lag,
            n_log_lags,
            day_boundary,
            method,
            active_threshold,
            n_bins,
            fit_min_lag,
            fit_max_lag,
            seed,
            bootstrap_reps,
            block_len,
            reshuffle_reps,
            ttest
        );
        if !self.reshuffle_pairs.is_empty() {
            cfg.reshuffle_pairs = self.reshuffle_pairs;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl SynthArgs {
    fn into_config(self) -> Result<SynthConfig> {
        let mut cfg = match &self.config {
            Some(p) => load_synth_config(p)?,
            None => SynthConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.n_events {
            cfg.n_events = n;
        }
        if let Some(phi) = self.provider_strength {
            cfg.provider_strength = phi;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(command: Command) -> Result<CommandOutcome> {
    match command {
        Command::Classify {
            input,
            output,
            session,
            no_session_filter,
        } => {
            let cfg = RunConfig {
                session,
                session_filter: !no_session_filter,
                ..Default::default()
            };
            cmd_classify(&input, &output, &cfg.session_filter()?)
        }
        Command::Report(a) => cmd_report(&a.into_config()?),
        Command::Brokers(a) => cmd_brokers(&a.into_config()?),
        Command::Corr { pi1, pi2, run } => cmd_corr(&run.into_config()?, pi1, pi2),
        Command::Resp { class, run } => cmd_resp(&run.into_config()?, class),
        Command::Tests(a) => cmd_tests(&a.into_config()?),
        Command::Synth { synth, out, raw } => cmd_synth(&synth.into_config()?, &out, raw),
        Command::Calibrate {
            synth,
            window_lo,
            window_hi,
            output,
        } => cmd_calibrate(&synth.into_config()?, (window_lo, window_hi), &output),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.failures {
                eprintln!("failed: {f}");
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
