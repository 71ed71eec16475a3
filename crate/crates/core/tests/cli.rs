use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;
use subcrit::cli::{flatten, RunConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_subcrit"))
}

fn run(args: &[&str], out: &Path) -> (i32, String) {
    let o = bin().args(args).arg("--out").arg(out).output().unwrap();
    (o.status.code().unwrap(), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn constants_command() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run(&["constants", "--dim", "3"], dir.path());
    assert_eq!(code, 0);
    let v = read_json(&dir.path().join("constants.json"));
    let omega = v["payload"]["omegaN"].as_f64().unwrap();
    assert!((omega - 2.136832).abs() < 1e-6);
    assert!(v["metadata"]["timestamp_unix"].is_u64());

    let (code, err) = run(&["constants", "--dim", "2"], dir.path());
    assert_eq!(code, 1);
    assert!(err.contains("N ≥ 3 required"), "{err}");

    let (code, _) = run(&["constants", "--dim", "4"], dir.path());
    assert_eq!(code, 0);
    let v = read_json(&dir.path().join("constants.json"));
    assert!(v["payload"]["quad_error"].as_f64().unwrap() < 1e-9);
}

#[test]
fn csv_and_json_agree() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["constants"], dir.path()).0, 0);
    assert_eq!(run(&["constants", "--format", "csv"], dir.path()).0, 0);
    let json = read_json(&dir.path().join("constants.json"));
    let expected = flatten(&json["payload"]);
    let mut rd = csv::Reader::from_path(dir.path().join("constants.csv")).unwrap();
    let rows: Vec<(String, String)> = rd
        .deserialize()
        .map(|r| r.unwrap())
        .filter(|(k, _): &(String, String)| !k.starts_with("metadata."))
        .collect();
    assert_eq!(rows, expected);
    let omega: f64 = rows.iter().find(|(k, _)| k == "omegaN").unwrap().1.parse().unwrap();
    assert_eq!(omega, json["payload"]["omegaN"].as_f64().unwrap());
}

#[test]
fn assumptions_command() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run(&["assumptions"], dir.path());
    assert_eq!(code, 0);
    let v = read_json(&dir.path().join("assumptions.json"));
    let p = &v["payload"];
    assert_eq!(p["pass"], Value::Bool(true));
    assert!(p["min_d2h"].as_f64().unwrap() > 0.0);
    assert!(p["max_monotonicity"].as_f64().unwrap() < 0.0);
    assert_eq!(run(&["assumptions", "--radius", "0"], dir.path()).0, 1);
    assert_eq!(run(&["assumptions", "--radius", "-2"], dir.path()).0, 1);
}

#[test]
fn saddle_command_with_trace() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run(&["saddle", "--trace"], dir.path());
    assert_eq!(code, 0);
    let v = read_json(&dir.path().join("saddle.json"));
    let s = &v["payload"]["saddle"];
    assert!(s["grad_norm"].as_f64().unwrap() <= 1e-8);
    let inertia: Vec<u64> = s["inertia"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert!(inertia[0] >= 1 && inertia[1] >= 1);
    assert_eq!(v["payload"]["bounds_ok"], Value::Bool(true));
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next().unwrap(), "iter,value,grad_norm,step");
    assert_eq!(lines.count() as u64, s["iterations"].as_u64().unwrap() + 1);
}

#[test]
fn saddle_divergence_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"max_iter": 2}"#).unwrap();
    let (code, err) = run(&["saddle", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code, 4);
    assert!(err.contains("last iterate"), "{err}");
}

#[test]
fn config_file_validation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"unknown_field": 1}"#).unwrap();
    assert_eq!(run(&["constants", "--config", cfg.to_str().unwrap()], dir.path()).0, 1);
    fs::write(&cfg, r#"{"eps": [0.05, 0.1]}"#).unwrap();
    assert_eq!(run(&["verify", "--config", cfg.to_str().unwrap()], dir.path()).0, 1);
    assert_eq!(run(&["saddle", "--tol", "0"], dir.path()).0, 1);
    assert_eq!(run(&["bogus"], dir.path()).0, 1);
    // Flags override the file.
    fs::write(&cfg, r#"{"dim": 2}"#).unwrap();
    assert_eq!(run(&["constants", "--config", cfg.to_str().unwrap(), "--dim", "3"], dir.path()).0, 0);
}

#[test]
fn run_config_round_trips_through_json() {
    let c = RunConfig::default();
    let text = serde_json::to_string(&c).unwrap();
    assert!(text.contains("\"penalty_M\":100.0"));
    let back: RunConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, c);
    assert!(c.validate().is_ok());
}

#[test]
fn verify_resolution_guard_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run(
        &["verify", "--eps", "0.5", "--grid-nz", "33", "--grid-nr", "17"],
        dir.path(),
    );
    assert_eq!(code, 5);
    assert!(err.contains("--grid-nz"), "{err}");
}

#[test]
fn verify_reads_saddle_report() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["saddle"], dir.path()).0, 0);
    let report = dir.path().join("saddle.json");
    let (code, err) = run(
        &["verify", "--eps", "0.1", "--saddle-report", report.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(code, 0, "{err}");
    let v = read_json(&dir.path().join("verify.json"));
    let p = &v["payload"];
    let saddle = read_json(&report);
    assert_eq!(p["saddle_config"], saddle["payload"]["saddle"]["config"]);
    let row = &p["expansion_k4"]["rows"][0];
    assert!(row["gap"].is_f64() && row["gap_refined"].is_f64());
    assert!(p["residual"]["random_over_saddle"].as_f64().unwrap() > 100.0);
}
