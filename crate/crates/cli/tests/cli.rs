//! Runs the real `unpin` binary on each documented invocation.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn unpin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unpin")).arg("--out").arg(dir).args(args).env("UNPIN_WORKERS", "1").output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = unpin(dir, args);
    assert!(out.status.success(), "{args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn pinning_table_matches_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["pinning", "--nonlinearity", "cubic", "--d-range", "0.05:0.2:4"]);
    let (header, rows) = csv_rows(&dir.path().join("pinning.csv"));
    assert_eq!(header, ["d", "a_minus", "a_plus", "provenance", "residual"]);
    assert_eq!(rows.len(), 4);
    for r in &rows {
        let (am, ap) = (num(&r[1]), num(&r[2]));
        assert!((am + ap - 1.0).abs() < 1e-12, "cubic boundary is symmetric about 1/2");
        assert_eq!(r[3], "closed_form");
    }
    let meta = json(&dir.path().join("pinning.meta.json"));
    assert_eq!(meta["command"], "pinning");
    assert_eq!(meta["parameters"]["nonlinearity"], "cubic");
    assert!(meta["artifact_version"].is_string());
}

#[test]
fn numeric_pinning_and_one_sided_family() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["pinning", "--nonlinearity", "pwl", "--d-range", "0.05:0.2:3", "--numeric"]);
    let (_, rows) = csv_rows(&dir.path().join("pinning.csv"));
    assert!(rows.iter().all(|r| r[3] == "area_balance" && num(&r[4]) < 1e-10));
    ok(dir.path(), &["pinning", "--nonlinearity", "onesided", "--d-range", "0.01:0.0625:3"]);
    let (_, rows) = csv_rows(&dir.path().join("pinning.csv"));
    assert!((num(&rows[2][1]) - 0.5).abs() < 1e-12);
}

#[test]
fn constants_report_the_universal_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["constants", "--d", "0.1"]);
    let v = json(&dir.path().join("constants.json"));
    assert!((v["omega0"].as_f64().unwrap() - 2.3381).abs() < 5e-4);
    assert!((v["c0"].as_f64().unwrap() + 2.6524).abs() < 2e-3);
    assert!((v["k1"].as_f64().unwrap() - 0.5457).abs() < 1e-3);
    for key in ["k2", "kc", "a_boundary", "exponents"] {
        assert!(!v[key].is_null(), "missing {key}");
    }
    let printed: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(printed, v);
}

#[test]
fn wave_by_newton_writes_profile_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["wave", "--kernel", "exp2", "--a", "0.3", "--d", "0.1"]);
    let (header, rows) = csv_rows(&dir.path().join("wave_profile.csv"));
    assert_eq!(header, ["x", "u"]);
    let first = num(&rows[0][1]);
    let last = num(&rows[rows.len() - 1][1]);
    assert!(first > 0.99 && last < 0.01, "front runs from 1 to 0");
    let v = json(&dir.path().join("wave.json"));
    assert_eq!(v["method"], "newton");
    assert!(v["c"].as_f64().unwrap() > 0.0 && v["residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn wave_by_shooting_agrees_with_newton() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["wave", "--kernel", "exp2", "--a", "0.3", "--d", "0.5"]);
    let newton = json(&dir.path().join("wave.json"))["c"].as_f64().unwrap();
    ok(dir.path(), &["wave", "--kernel", "exp2", "--a", "0.3", "--d", "0.5", "--method", "shoot"]);
    let v = json(&dir.path().join("wave.json"));
    let shoot = v["c"].as_f64().unwrap();
    assert!(v["method"].as_str().unwrap().starts_with("shoot"));
    assert!((newton - shoot).abs() / shoot < 1e-3, "{newton} vs {shoot}");
}

#[test]
fn simulate_tracks_the_front() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["simulate", "--kernel", "exp2", "--a", "0.3", "--d", "0.1", "--dt", "0.17", "--grid", "30:4096", "--tend", "300"]);
    let (header, rows) = csv_rows(&dir.path().join("simulate_track.csv"));
    assert_eq!(header, ["t", "x_front"]);
    assert!(rows.len() > 10);
    let v = json(&dir.path().join("simulate.json"));
    assert!(v["speed"].as_f64().unwrap() > 0.0 && v["r2"].as_f64().unwrap() > 0.99);
}

#[test]
fn unstable_time_step_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = unpin(dir.path(), &["simulate", "--kernel", "exp2", "--a", "0.3", "--d", "0.1", "--dt", "20"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scan_then_fit_recovers_the_three_halves_law() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["scan", "--kernel", "exp2", "--d", "0.1", "--mu-grid", "1e-4:3e-2:12", "--method", "newton"]);
    let scan = dir.path().join("scan.csv");
    let (header, rows) = csv_rows(&scan);
    assert_eq!(header, ["mu", "c", "method"]);
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r[2] == "newton"));
    ok(dir.path(), &["fit", "--input", scan.to_str().unwrap(), "--window", "4:8"]);
    let v = json(&dir.path().join("fit.json"));
    let gamma = v["gamma"].as_f64().unwrap();
    assert!((gamma - 1.5).abs() < 0.02, "γ = {gamma}");
    assert!(v["gamma_lo"].as_f64().unwrap() <= gamma && gamma <= v["gamma_hi"].as_f64().unwrap());
}

#[test]
fn identical_runs_give_identical_csv() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["scan", "--kernel", "exp2", "--d", "0.1", "--mu-grid", "1e-3:3e-2:5", "--method", "sim"];
    ok(a.path(), &args);
    ok(b.path(), &args);
    let read = |d: &Path| std::fs::read(d.join("scan.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn beta_scan_reports_exponents() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["beta-scan", "--betas", "2,3", "--d", "0.1", "--mu-grid", "4e-3:2e-2:8"]);
    let (header, rows) = csv_rows(&dir.path().join("beta_scan.csv"));
    assert_eq!(&header[..5], ["beta", "gamma", "gamma_lo", "gamma_hi", "k"]);
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert!((num(&r[1]) - 1.5).abs() < 0.05, "β = {}: γ = {}", r[0], r[1]);
    }
}

#[test]
fn repro_table1_lists_predicted_columns() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["repro", "table1"]);
    let (header, rows) = csv_rows(&dir.path().join("repro_table1.csv"));
    assert_eq!(header, ["row", "kernel", "d", "method", "k_p", "s_p"]);
    let labels: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(labels, ["a", "b", "c", "d", "onesided"]);
    assert!((num(&rows[0][4]) - 0.5457).abs() < 1e-3);
    assert_eq!(num(&rows[2][5]), 1.25);
    assert!(dir.path().join("repro_table1.meta.json").exists());
}

#[test]
fn repro_fig8_quick_gives_a_coarse_beta_scan() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["repro", "fig8", "--quick"]);
    let (header, rows) = csv_rows(&dir.path().join("repro_fig8.csv"));
    assert_eq!(&header[..2], ["beta", "gamma"]);
    assert_eq!(rows.len(), 4);
    let gammas: Vec<f64> = rows.iter().map(|r| num(&r[1])).collect();
    assert!(gammas.windows(2).all(|w| w[0] > w[1]), "γ falls as β grows: {gammas:?}");
}

#[test]
fn invalid_kernel_lists_the_registry() {
    let dir = tempfile::tempdir().unwrap();
    let out = unpin(dir.path(), &["wave", "--kernel", "laplace", "--a", "0.3", "--d", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for name in ["exp2", "onesided1", "fourth", "charfn", "gauss", "beta:", "discrete_pair"] {
        assert!(err.contains(name), "{name} missing from: {err}");
    }
}

#[test]
fn unsupported_requests_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = unpin(dir.path(), &["pinning", "--nonlinearity", "onesided", "--d-range", "0.01:0.1:3"]);
    assert_eq!(out.status.code(), Some(2), "one-sided pinning ends at d = 1/16");
    let out = unpin(dir.path(), &["scan", "--kernel", "gauss", "--d", "0.1", "--mu-grid", "1e-3:1e-2:4", "--method", "shoot"]);
    assert_eq!(out.status.code(), Some(2), "shooting needs a rational kernel");
}

#[test]
fn run_config_dispatches_and_echoes_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let sub = dir.path().join("artifacts");
    let text = serde_json::json!({
        "command": "pinning",
        "parameters": { "nonlinearity": "cubic", "d_range": "0.1:0.2:2", "numeric": true },
        "output_dir": sub,
    });
    std::fs::write(&cfg, text.to_string()).unwrap();
    ok(dir.path(), &["run", cfg.to_str().unwrap()]);
    let (_, rows) = csv_rows(&sub.join("pinning.csv"));
    assert_eq!(rows.len(), 2);
    let meta = json(&sub.join("pinning.meta.json"));
    assert_eq!(meta["parameters"]["numeric"], true);
    assert_eq!(meta["parameters"]["d_range"], "0.1:0.2:2");
}

#[test]
fn run_config_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"command": "constants", "parameters": {}, "seed": 3}"#).unwrap();
    let out = unpin(dir.path(), &["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));

    std::fs::write(&cfg, r#"{"command": "constants", "parameters": {"temperature": 1}}"#).unwrap();
    let out = unpin(dir.path(), &["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_numerics_exit_three_with_a_json_payload() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("pinned.csv");
    std::fs::write(&input, "mu,c,method\n1e-3,0,sim\n2e-3,1e-5,sim\n4e-3,3e-5,sim\n8e-3,8e-5,sim\n1.6e-2,2e-4,sim\n3.2e-2,6e-4,sim\n6.4e-2,2e-3,sim\n1.28e-1,6e-3,sim\n").unwrap();
    let out = unpin(dir.path(), &["fit", "--input", input.to_str().unwrap(), "--window", "1:8"]);
    assert_eq!(out.status.code(), Some(3));
    let payload: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).lines().last().unwrap()).unwrap();
    assert_eq!(payload["error"], "numerical");
    assert!(payload["kind"].is_string() && payload["message"].is_string());
    assert!(!dir.path().join("fit.meta.json").exists(), "no metadata for a failed run");
}

#[test]
fn unreadable_input_is_a_usage_error_and_unwritable_output_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let absent = dir.path().join("absent.csv");
    let out = unpin(dir.path(), &["fit", "--input", absent.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.csv"));

    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "not a directory").unwrap();
    let out = unpin(&blocker.join("out"), &["constants"]);
    assert_eq!(out.status.code(), Some(1));
}
