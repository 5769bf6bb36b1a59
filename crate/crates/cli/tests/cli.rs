use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use plap_cli::{run_experiment, Experiment, RunConfig};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn plap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plap")).args(args).output().expect("binary runs")
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn eig_on_interval_config() {
    let out = tempfile::tempdir().unwrap();
    let cfg = configs().join("interval.toml");
    let res = plap(&["eig", "--config", cfg.to_str().unwrap(), "--out", out.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let rec = read_json(&out.path().join("eig.json"));
    let lam = rec["payload"]["lambda"].as_f64().unwrap();
    assert!((lam / std::f64::consts::PI.powi(2) - 1.0).abs() < 0.01);
    assert_eq!(rec["status"], "ok");
    assert_eq!(rec["experiment"], "eig");
    assert_eq!(rec["schema_version"], 1);
    assert_eq!(rec["config_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn bad_exponent_exits_with_config_code() {
    let out = tempfile::tempdir().unwrap();
    let cfg = configs().join("interval.toml");
    let res = plap(&["eig", "--config", cfg.to_str().unwrap(), "--p", "0.5", "--out", out.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("p > 1"));
}

#[test]
fn malformed_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "p = 2.0\nh = 0.1\n[domain]\ntype = \"interval\"\na = 0.0\nb = 1.0\nbogus = 3\n").unwrap();
    let res = plap(&["eig", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("bogus") && err.contains("line"), "{err}");
}

#[test]
fn missing_block_is_a_config_error() {
    let out = tempfile::tempdir().unwrap();
    let cfg = configs().join("interval.toml");
    let res = plap(&["gap", "--config", cfg.to_str().unwrap(), "--out", out.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn unconverged_run_exits_with_solver_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("short.toml");
    let text = "p = 3.0\nh = 0.0625\n[domain]\ntype = \"ball\"\ncenter = [0.0, 0.0]\nradius = 1.0\n[solver]\nmax_iters = 2\ntol_residual = 1e-12\n";
    std::fs::write(&path, text).unwrap();
    let res = plap(&["eig", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
    assert_eq!(read_json(&dir.path().join("eig.json"))["status"], "incomplete");
}

#[test]
fn perturb_writes_csv_with_header() {
    let out = tempfile::tempdir().unwrap();
    let cfg = configs().join("interval.toml");
    let res =
        plap(&["perturb", "--config", cfg.to_str().unwrap(), "--h", "0.015625", "--out", out.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = std::fs::read_to_string(out.path().join("perturb.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("eps,lambda,residual"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn check_command_passes() {
    let out = tempfile::tempdir().unwrap();
    let res = plap(&["check", "--out", out.path().to_str().unwrap(), "--seed", "3"]);
    assert_eq!(res.status.code(), Some(0));
    let rec = read_json(&out.path().join("check.json"));
    let items = rec["payload"]["invariants"].as_array().unwrap();
    assert!(items.iter().all(|i| i["passed"] == true));
}

#[test]
fn payload_is_deterministic() {
    let mut cfg = RunConfig::load(&configs().join("interval.toml")).unwrap();
    cfg.h = 1.0 / 64.0;
    let a = run_experiment(Experiment::Perturb, &cfg);
    let b = run_experiment(Experiment::Perturb, &cfg);
    assert_eq!(a.record.payload_json(), b.record.payload_json());
    assert_eq!(a.record.config_digest, b.record.config_digest);
    let ta: Vec<String> = a.tables.iter().map(|t| t.to_csv()).collect();
    let tb: Vec<String> = b.tables.iter().map(|t| t.to_csv()).collect();
    assert_eq!(ta, tb);
}

#[test]
fn bundled_configs_round_trip() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let cfg = RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let again = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.to_toml(), again.to_toml());
        assert_eq!(cfg.digest(), again.digest());
    }
}

#[test]
fn epinf_table_columns() {
    let mut cfg = RunConfig::load(&configs().join("strip_epinf.toml")).unwrap();
    cfg.h = 1.0 / 8.0;
    let run = run_experiment(Experiment::Epinf, &cfg);
    assert_eq!(run.exit_code, 0);
    let csv = run.tables[0].to_csv();
    assert!(csv.starts_with("R,window,lambda_ext\n"));
    assert_eq!(csv.lines().count(), 5);
}
