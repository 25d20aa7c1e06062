use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn critex(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_critex"))
        .args(args)
        .env("CRITEX_OUT", out)
        .output()
        .expect("binary runs")
}

fn run_dir(output: &Output) -> PathBuf {
    let stderr = String::from_utf8_lossy(&output.stderr);
    let line = stderr
        .lines()
        .find_map(|l| l.strip_prefix("run directory: "))
        .unwrap_or_else(|| panic!("no run directory in: {stderr}"));
    PathBuf::from(line)
}

fn json(output: &Output) -> Value {
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    serde_json::from_slice(&output.stdout).unwrap()
}

const SMALL_EVOLVE: &str = r#"{
  "dim": 1, "N": 256, "L": 64.0, "p": 2.0, "eps": 0.2, "gamma": 0.3, "s": 1.0,
  "dt": 0.1, "tend": 5.0
}"#;

#[test]
fn exponents_report() {
    let tmp = tempfile::tempdir().unwrap();
    let v = json(&critex(&["exponents", "--n", "1", "--gamma", "0.3", "--p", "5"], tmp.path()));
    assert_eq!(v["p_crit"], 3.5);
    assert_eq!(v["verdict"]["regime"], "GlobalExistence");
    assert_eq!(v["contradiction_gate"], false);
}

#[test]
fn same_config_same_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("evolve.json");
    fs::write(&config, SMALL_EVOLVE).unwrap();
    let args = ["evolve", "--config", config.to_str().unwrap()];
    let a = run_dir(&critex(&args, tmp.path()));
    let b = run_dir(&critex(&args, tmp.path()));
    assert_ne!(a, b);
    for name in ["config.json", "meta.json", "curves.csv", "initial.bin", "snapshots.bin"] {
        let (x, y) = (fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());
        assert!(!x.is_empty(), "{name} is empty");
        assert_eq!(x, y, "{name} differs between identical runs");
    }
    assert!(a.join("timing.json").exists());
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("evolve.json");
    fs::write(&config, SMALL_EVOLVE).unwrap();
    let out = critex(
        &["evolve", "--config", config.to_str().unwrap(), "--eps", "0.05", "--tend", "2"],
        tmp.path(),
    );
    let report = json(&out);
    assert_eq!(report["config"]["eps"], 0.05);
    assert_eq!(report["config"]["tend"], 2.0);
    assert_eq!(report["config"]["N"], 256);
    let echoed: Value = serde_json::from_str(&fs::read_to_string(run_dir(&out).join("config.json")).unwrap()).unwrap();
    assert_eq!(echoed["eps"], 0.05);
}

#[test]
fn out_flag_beats_environment() {
    let env_root = tempfile::tempdir().unwrap();
    let flag_root = tempfile::tempdir().unwrap();
    let out = critex(
        &["probe", "--t", "2", "--r", "0.5"],
        env_root.path(),
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').take(6).map(|x| x.parse().unwrap()).collect();
    assert!((row[3] - 2.0 * (-1.0f64).exp()).abs() < 1e-12);

    let out = critex(
        &["phase-diagram", "--n", "1", "--s", "1", "--gamma-min", "0.1", "--gamma-max", "0.4", "--gamma-steps", "4",
          "--p-min", "1.5", "--p-max", "6", "--p-steps", "10", "--out", flag_root.path().to_str().unwrap()],
        env_root.path(),
    );
    let dir = run_dir(&out);
    assert!(dir.starts_with(flag_root.path()));
    let csv = fs::read_to_string(dir.join("regions.csv")).unwrap();
    assert_eq!(csv.lines().count(), 41);
}

#[test]
fn domain_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = critex(&["probe", "--t", "-1", "--r", "1"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, r#"{"dim": 1, "p": 2, "eps": 0.1, "gamma": 0.3, "s": 1, "dt": 0.1, "tend": 1, "colour": 3}"#).unwrap();
    let out = critex(&["evolve", "--config", bad.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn testfn_on_stored_run() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("evolve.json");
    fs::write(&config, SMALL_EVOLVE).unwrap();
    let dir = run_dir(&critex(&["evolve", "--config", config.to_str().unwrap()], tmp.path()));
    let out = critex(&["testfn", "--run", dir.to_str().unwrap(), "--R", "1,1.5,2"], tmp.path());
    let report = json(&out);
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let values: Vec<f64> = rows.iter().map(|r| r["functional"].as_f64().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] > w[0]));

    let out = critex(&["testfn", "--run", dir.to_str().unwrap(), "--R", "3"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}
