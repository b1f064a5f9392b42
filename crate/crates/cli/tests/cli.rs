//! Command-line contract: exit codes, error messages and output files.

use std::path::Path;
use std::process::{Command, Output};

fn magframe(args: &[&str], config: Option<&Path>, out: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_magframe"));
    cmd.args(args).env("RUST_LOG", "error");
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    cmd.arg("--out").arg(out).output().expect("binary runs")
}

fn with_config(text: &str, experiment: &str) -> (Output, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.toml");
    std::fs::write(&cfg, text).unwrap();
    let out = magframe(&[experiment], Some(&cfg), &dir.path().join("out"));
    (out, dir)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn empty_config_runs_defaults_and_writes_outputs() {
    let (o, dir) = with_config("", "gauge-covariance");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("PASS")), "{stdout}");
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["config"]["grid"]["points"], 256);
    assert!(dir.path().join("out/covariance.csv").exists());
}

#[test]
fn unknown_key_is_rejected_by_name() {
    let (o, _d) = with_config("foo = 1\n", "gauge-covariance");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("foo"), "{}", stderr(&o));
}

#[test]
fn duplicate_key_is_rejected_by_name() {
    let (o, _d) = with_config("seed = 1\nseed = 2\n", "gauge-covariance");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));
}

#[test]
fn odd_grid_names_the_invariant() {
    let (o, _d) = with_config("[grid]\npoints = 255\n", "gauge-covariance");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("must be even"), "{}", stderr(&o));
}

#[test]
fn frame_truncation_names_the_invariant() {
    let (o, _d) = with_config("[frame]\nmodulation = 200\n", "gauge-covariance");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("2K < M pi / L"), "{}", stderr(&o));
}

#[test]
fn missing_config_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = magframe(&["gauge-covariance"], Some(&dir.path().join("absent.toml")), &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("absent.toml"), "{}", stderr(&o));
}

#[test]
fn failed_assertion_exits_one_and_names_the_quantity() {
    let (o, _d) = with_config("[tolerances]\ncovariance = 1e-30\n", "gauge-covariance");
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
    assert!(stderr(&o).contains("gauge_covariance"), "{}", stderr(&o));
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_magframe"))
        .args(["gauge-covariance", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .env("MAGFRAME_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("MAGFRAME_THREADS"));
}
