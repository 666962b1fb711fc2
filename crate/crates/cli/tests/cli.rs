use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mismo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mismo"))
        .args(args)
        .output()
        .expect("binary runs")
}

const TINY: &str = r#"
profile = "desk"
horizon = 4
holdout_len = 4
repetitions = 1
strategies = ["iterated", "mimo", "pso-mismo"]
mismo.s = [2]
pso.swarm_size = 3
pso.iterations = 1
dataset.csv = "series.csv"
fnn.max_epochs = 40
fnn.hidden = [4]
featsel.max_lag = 3
"#;

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_run_compare_trace() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("series.csv");
    let out = mismo(&["generate", "--preset", "logistic-1", "--out", s(&csv)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(fs::read_to_string(&csv).unwrap().starts_with("series_id,t,value"));

    let cfg = dir.path().join("tiny.toml");
    fs::write(&cfg, TINY).unwrap();
    let run = dir.path().join("run");
    let out = mismo(&["run", "--config", s(&cfg), "--out", s(&run), "--workers", "2", "--seed", "5", "--quiet"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("pso-mismo"), "{stdout}");
    assert!(fs::read_to_string(run.join("config.json")).unwrap().contains("\"seed\": 5"));

    let out = mismo(&["compare", "--run", s(&run)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let traces = dir.path().join("traces");
    let out = mismo(&["trace", "--run", s(&run), "--out", s(&traces)]);
    assert!(out.status.success());
    assert!(traces.join("timing_summary.csv").is_file());
    let n = fs::read_dir(&traces).unwrap().count();
    assert_eq!(n, 2, "one pso trace plus the summary");
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "pso.swarm_sise = 3\n").unwrap();
    let out = mismo(&["run", "--config", s(&cfg), "--out", s(&dir.path().join("r"))]);
    assert_eq!(out.status.code(), Some(2));

    let out = mismo(&["generate", "--preset", "nope-3", "--out", s(&dir.path().join("x.csv"))]);
    assert_eq!(out.status.code(), Some(2));

    let out = mismo(&["compare", "--run", s(&dir.path().join("missing"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tampered_tables_fail_compare() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("series.csv");
    assert!(mismo(&["generate", "--preset", "logistic-1", "--out", s(&csv)]).status.success());
    let cfg = dir.path().join("tiny.toml");
    fs::write(&cfg, TINY.replace("\"pso-mismo\"", "\"direct\"")).unwrap();
    let run = dir.path().join("run");
    assert!(mismo(&["run", "--config", s(&cfg), "--out", s(&run), "--quiet"]).status.success());
    fs::write(run.join("overall_ranks.csv"), "dataset,strategy,average_rank\nx,y,1\n").unwrap();
    let out = mismo(&["compare", "--run", s(&run)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn failed_runs_exit_with_one() {
    // A two-neuron net trained for ten epochs drifts negative on the logistic
    // map, which trips the SMAPE denominator guard for the iterated run.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("weak.toml");
    let text = TINY
        .replace("fnn.max_epochs = 40\nfnn.hidden = [4]", "fnn.max_epochs = 10\nfnn.hidden = [2]")
        .replace("dataset.csv = \"series.csv\"", "dataset.preset = \"logistic-1\"")
        .replace("\"pso-mismo\"", "\"direct\"");
    fs::write(&cfg, text).unwrap();
    let run = dir.path().join("run");
    let out = mismo(&["run", "--config", s(&cfg), "--out", s(&run), "--quiet"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
    let records = fs::read_to_string(run.join("records.jsonl")).unwrap();
    assert!(records.contains("SMAPE denominator"));
}
