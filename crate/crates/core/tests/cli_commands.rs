mod common;

use common::*;
use femto_offload::cli::{run, EXIT_BREACH, EXIT_INPUT, EXIT_OK};
use femto_offload::trace::{synthesize_trace, TraceLog};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use tempfile::TempDir;

const REFERENCE: &str = r#"
[session]
mean_seconds = 600.0

[macro]
mean_seconds = 60.0
variance_seconds2 = 60.0

[femto]
mean_seconds = 60.0
variance_seconds2 = 60000.0

[threshold]
mean_seconds = 60.0

[simulation]
replications = 100000
seed = 7
"#;

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["femto-offload"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// `name -> value` pairs of a two-column `quantity,value` CSV.
fn csv_value(text: &str, name: &str) -> f64 {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    for rec in rdr.records() {
        let rec = rec.unwrap();
        if &rec[0] == name {
            return rec[1].parse().unwrap();
        }
    }
    panic!("{name} not in\n{text}");
}

#[test]
fn analyze_reports_reference_cells() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "s.toml", REFERENCE);
    let (code, out, _) = cli(&["analyze", "--scenario", path(&s)]);
    assert_eq!(code, EXIT_OK);
    assert!(relative_error(csv_value(&out, "e_nt"), REFERENCE_ANALYTIC[0][0]) < 1e-4);
    assert!(relative_error(csv_value(&out, "theta"), REFERENCE_ANALYTIC[2][0] / 100.0) < 1e-4);

    let (code, out, _) = cli(&["analyze", "--scenario", path(&s), "--format", "structured"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v.is_object());
}

#[test]
fn invalid_scenarios_exit_2_naming_the_field() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.toml", &REFERENCE.replace("60000.0", "-5.0"));
    let (code, _, err) = cli(&["analyze", "--scenario", path(&bad)]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("femto.variance_seconds2"), "{err}");

    let broken = write(&dir, "broken.toml", "[session\nmean_seconds = 1");
    assert_eq!(cli(&["analyze", "--scenario", path(&broken)]).0, EXIT_INPUT);
    let missing = dir.path().join("absent.toml");
    assert_eq!(cli(&["analyze", "--scenario", path(&missing)]).0, EXIT_INPUT);
    assert_eq!(cli(&["sweep", "--scenario", path(&bad), "--axis", "nope", "--from", "1", "--to", "2"]).0, EXIT_INPUT);
}

#[test]
fn validate_passes_and_is_byte_identical_on_rerun() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "s.toml", REFERENCE);
    let (code, first, err) = cli(&["validate", "--scenario", path(&s), "--replications", "200000"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let (_, second, _) = cli(&["validate", "--scenario", path(&s), "--replications", "200000"]);
    assert_eq!(first, second);
    let (_, other, _) = cli(&["validate", "--scenario", path(&s), "--replications", "200000", "--seed", "8"]);
    assert_ne!(first, other);
}

#[test]
fn tiny_validation_runs_breach() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "s.toml", REFERENCE);
    let (code, out, err) = cli(&["validate", "--scenario", path(&s), "--replications", "20"]);
    assert_eq!(code, EXIT_BREACH, "{out}{err}");
    assert!(!out.is_empty());
}

#[test]
fn single_point_sweep_matches_analyze() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "s.toml", REFERENCE);
    let (_, analysis, _) = cli(&["analyze", "--scenario", path(&s)]);
    let (code, sweep, _) = cli(&[
        "sweep", "--scenario", path(&s), "--axis", "threshold_mean", "--from", "60", "--to", "60", "--points", "1",
    ]);
    assert_eq!(code, EXIT_OK);
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(sweep.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let row = rdr.records().next().unwrap().unwrap();
    let col = |name: &str| -> f64 {
        let i = headers.iter().position(|h| h == name).unwrap_or_else(|| panic!("{name} in {headers:?}"));
        row[i].parse().unwrap()
    };
    assert_eq!(col("theta"), csv_value(&analysis, "theta"));
    assert_eq!(col("lambda"), csv_value(&analysis, "lambda"));

    assert_eq!(
        cli(&["sweep", "--scenario", path(&s), "--axis", "session_mean", "--from", "10", "--to", "100", "--points", "0"]).0,
        EXIT_INPUT
    );
}

#[test]
fn optimize_writes_profile() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "s.toml", REFERENCE);
    let profile = dir.path().join("profile.csv");
    let (code, out, err) = cli(&[
        "optimize", "--scenario", path(&s), "--profile-points", "50", "--profile-output", path(&profile),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!((csv_value(&out, "expected_threshold_star") - 4.6037511).abs() < 1e-7);

    // structured output keeps full precision
    let (_, json, _) = cli(&["optimize", "--scenario", path(&s), "--format", "structured"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let value = |name: &str| {
        v["rows"].as_array().unwrap().iter().find(|r| r["quantity"] == name).unwrap()["value"]
            .as_f64()
            .unwrap()
    };
    assert_eq!(value("expected_threshold_star"), 1.0 / value("eta_o_star"));
    assert_eq!(value("objective_value"), value("theta_at") + value("lambda_at"));
    let text = fs::read_to_string(&profile).unwrap();
    let rows = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes()).records().count();
    assert_eq!(rows, 50);
}

#[test]
fn estimate_round_trip_and_empty_trace() {
    let dir = TempDir::new().unwrap();
    let trace_path = dir.path().join("trace.csv");
    let log = synthesize_trace(&reference_scenario(60.0), 2_000, 3);
    log.write_csv(fs::File::create(&trace_path).unwrap()).unwrap();
    let suggested = dir.path().join("suggested.toml");
    let (code, out, err) = cli(&[
        "estimate", "--trace", path(&trace_path), "--scenario-out", path(&suggested),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("femto"));
    // the suggested scenario is itself analyzable
    assert_eq!(cli(&["analyze", "--scenario", path(&suggested)]).0, EXIT_OK);
    assert_eq!(TraceLog::load(&trace_path).unwrap().sessions.len(), 2_000);

    let empty = write(&dir, "empty.csv", "ue_id,event,timestamp_seconds\n");
    assert_eq!(cli(&["estimate", "--trace", path(&empty)]).0, EXIT_INPUT);
    let unordered = write(
        &dir,
        "unordered.csv",
        "ue_id,event,timestamp_seconds\na,session_start,5\na,femto_enter,3\na,session_end,9\n",
    );
    let (code, _, err) = cli(&["estimate", "--trace", path(&unordered)]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn binary_exit_codes() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "s.toml", REFERENCE);
    let bin = env!("CARGO_BIN_EXE_femto-offload");
    let ok = Command::new(bin).args(["analyze", "--scenario", path(&s), "--format", "text"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    assert!(!ok.stdout.is_empty());
    let bad = Command::new(bin).args(["analyze"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_INPUT));
}
