use std::path::Path;
use std::process::{Command, Output};

const HEADER: &str =
    "timestamp_ms,broker,side,action,price_ticks,size,bid_before,ask_before,bid_after,ask_after\n";

fn brokerflow(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brokerflow"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn classify_three_rows() {
    let tmp = tempfile::tempdir().unwrap();
    // 2001-01-01 09:00 UTC onwards
    let raw = format!(
        "{HEADER}\
         978339600000,1,buy,TRADE,102,5,100,102,100,102\n\
         978339600100,2,sell,ADD,101,3,100,102,100,101\n\
         978339600200,3,buy,CANCEL,100,2,100,101,99,101\n"
    );
    std::fs::write(tmp.path().join("raw.csv"), raw).unwrap();
    let o = brokerflow(&["classify", "raw.csv", "-o", "events.csv"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(tmp.path().join("events.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    let types: Vec<&str> = rows.iter().map(|r| r.split(',').nth(5).unwrap()).collect();
    assert_eq!(types, ["MO0", "LOp", "CAp"]);
    // cancelling a bid is a sell-side signal: sign reversed
    let signs: Vec<&str> = rows.iter().map(|r| r.split(',').nth(6).unwrap()).collect();
    assert_eq!(signs, ["+1", "-1", "-1"]);
    let summary = stdout(&o);
    assert!(
        summary.contains("MO0=1") && summary.contains("LOp=1") && summary.contains("CAp=1"),
        "{summary}"
    );
}

#[test]
fn crossed_quotes_fail_with_line_number() {
    let tmp = tempfile::tempdir().unwrap();
    let raw = format!(
        "{HEADER}\
         978339600000,1,buy,TRADE,102,5,100,102,100,102\n\
         978339600100,2,sell,ADD,101,3,102,102,102,102\n"
    );
    std::fs::write(tmp.path().join("raw.csv"), raw).unwrap();
    let o = brokerflow(&["classify", "raw.csv", "-o", "events.csv"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn missing_input_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = brokerflow(&["report", "nope.csv"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let o = brokerflow(&["report"], tmp.path());
    assert_eq!(o.status.code(), Some(1), "no inputs");
}

#[test]
fn synth_then_classify_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let o = brokerflow(
        &["synth", "--n-events", "5000", "--out", "s", "--raw"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let events = std::fs::read_to_string(tmp.path().join("s/events.csv")).unwrap();
    assert_eq!(events.lines().count(), 5001);
    let truth: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("s/truth.json")).unwrap())
            .unwrap();
    assert_eq!(truth["config"]["n_events"], 5000);

    let o = brokerflow(
        &[
            "classify",
            "s/raw.csv",
            "-o",
            "c.csv",
            "--no-session-filter",
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        std::fs::read_to_string(tmp.path().join("c.csv")).unwrap(),
        events
    );

    let o = brokerflow(
        &["synth", "--n-events", "5000", "--seed", "9", "--out", "t"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let other = std::fs::read_to_string(tmp.path().join("t/events.csv")).unwrap();
    assert_ne!(other, events);
    assert_eq!(other.lines().next(), events.lines().next());
}

#[test]
fn analysis_subcommands_write_their_files() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        let o = brokerflow(args, tmp.path());
        assert!(o.status.code() == Some(0), "{args:?}: {}", stderr(&o));
    };
    run(&["synth", "--n-events", "40000", "--out", "s"]);
    let common = [
        "s/events.csv",
        "--max-lag",
        "200",
        "--bootstrap-reps",
        "20",
        "--reshuffle-reps",
        "3",
    ];
    let with = |sub: &[&str], out: &str| -> Vec<String> {
        sub.iter()
            .chain(common.iter())
            .chain(["--out", out].iter())
            .map(|s| s.to_string())
            .collect()
    };
    let args = with(&["corr", "MO0", "LOp"], "c");
    run(&args.iter().map(String::as_str).collect::<Vec<_>>());
    for part in ["total", "same", "diff", "excess"] {
        assert!(
            tmp.path().join(format!("c/C_MO0_LOp_{part}.csv")).is_file(),
            "{part}"
        );
    }
    let args = with(&["resp", "MO"], "r");
    run(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(tmp.path().join("r/R_MO_same.csv").is_file());
    assert!(tmp.path().join("r/by_type/R_MO_by_LOp_diff.csv").is_file());
    let args = with(&["brokers"], "b");
    run(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(tmp.path().join("b/brokers/profiles.csv").is_file());
    let args = with(&["tests"], "t");
    run(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(tmp.path().join("t/tests/power_law.json").is_file());
    assert!(!tmp.path().join("t/brokers").exists());
}

#[test]
fn config_file_and_unknown_keys() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.toml"), "max_lags = 10\n").unwrap();
    let o = brokerflow(&["brokers", "x.csv", "--config", "bad.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("max_lags"), "{}", stderr(&o));

    let reference = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/run.toml");
    let cfg = brokerflow::cli_io::RunConfig::load(&reference).unwrap();
    assert_eq!(cfg, brokerflow::cli_io::RunConfig::default());
}

#[test]
fn calibrate_reports_phi() {
    let tmp = tempfile::tempdir().unwrap();
    let o = brokerflow(
        &[
            "calibrate",
            "--n-events",
            "30000",
            "--window-lo",
            "10",
            "--window-hi",
            "100",
            "-o",
            "cal.json",
        ],
        tmp.path(),
    );
    assert!(
        matches!(o.status.code(), Some(0) | Some(2)),
        "{}",
        stderr(&o)
    );
    let cal: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("cal.json")).unwrap())
            .unwrap();
    assert!(cal["phi"].as_f64().unwrap() >= 0.0);
    assert_eq!(
        cal["converged"].as_bool().unwrap(),
        o.status.code() == Some(0)
    );
}
