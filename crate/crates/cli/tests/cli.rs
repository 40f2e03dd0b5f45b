use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_hdiscord");

fn hdiscord(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("DISCORD_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json_of(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", stderr(o));
    serde_json::from_str(&stdout(o)).unwrap()
}

const BELL: &str = r#"{"dims":[2,2],"amplitudes":[[0,0],[0.7071067811865476,0],[0.7071067811865476,0],[0,0]]}"#;

#[test]
fn every_subcommand_has_help() {
    for sub in [vec!["--help"], vec!["discord", "--help"], vec!["scan", "--help"], vec!["verify", "--help"]] {
        let o = hdiscord(&sub);
        assert!(o.status.success());
        assert!(stdout(&o).contains("Usage"));
    }
}

#[test]
fn bell_state_auto_reports_schmidt_form_and_cross_check() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bell.json", BELL);
    let v = json_of(&hdiscord(&["discord", f.to_str().unwrap()]));
    assert!((v["value"].as_f64().unwrap() - 0.292893218813).abs() < 1e-9);
    assert_eq!(v["method"], "pure-bipartite");
    assert!(v["diagnostics"]["cross_check"]["delta"].as_f64().unwrap() <= 1e-5);
    for key in ["value", "method", "basis", "probabilities", "diagnostics"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn werner_from_flag() {
    let v = json_of(&hdiscord(&["discord", "--method", "werner", "--r", "0.5"]));
    assert!((v["value"].as_f64().unwrap() - 0.0489434837).abs() < 1e-9);
}

#[test]
fn bell_diagonal_weights_from_flag() {
    let v = json_of(&hdiscord(&["discord", "--method", "bell-diagonal", "--lambdas", "0,0,1,0"]));
    assert!((v["value"].as_f64().unwrap() - 0.292893218813).abs() < 1e-9);
    let o = hdiscord(&["discord", "--method", "bell-diagonal", "--lambdas", "0.5,0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn classical_three_qubit_file_has_zero_discord() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows = Vec::new();
    let p = [0.1, 0.2, 0.05, 0.15, 0.1, 0.1, 0.2, 0.1];
    for i in 0..8 {
        let row: Vec<String> = (0..8)
            .map(|j| format!("[{},0]", if i == j { p[i] } else { 0.0 }))
            .collect();
        rows.push(format!("[{}]", row.join(",")));
    }
    let text = format!(r#"{{"dims":[2,2,2],"matrix":[{}]}}"#, rows.join(","));
    let f = write(dir.path(), "classical.json", &text);
    let v = json_of(&hdiscord(&["discord", f.to_str().unwrap()]));
    assert!(v["value"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn method_mismatch_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let w = 1.0 / 3f64.sqrt();
    let text = format!(
        r#"{{"dims":[2,2,2],"amplitudes":[[0,0],[{w},0],[{w},0],[0,0],[{w},0],[0,0],[0,0],[0,0]]}}"#
    );
    let f = write(dir.path(), "w3.json", &text);
    let o = hdiscord(&["discord", f.to_str().unwrap(), "--method", "pure-bipartite"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("does not apply"), "{}", stderr(&o));
}

#[test]
fn malformed_and_unnormalized_files_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{not json");
    let o = hdiscord(&["discord", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let unnormalized = write(dir.path(), "norm.json", r#"{"dims":[2],"amplitudes":[[1,0],[0.1,0]]}"#);
    let o = hdiscord(&["discord", unnormalized.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("squared norm"), "{}", stderr(&o));
    let o = hdiscord(&["discord", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

fn small_scan(extra: &[&str]) -> Output {
    let mut args = vec![
        "scan", "--model", "lmg-iso", "--n", "10", "--start", "0.2", "--stop", "2.0", "--points", "10",
    ];
    args.extend_from_slice(extra);
    hdiscord(&args)
}

#[test]
fn scan_writes_ordered_csv() {
    let o = small_scan(&[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("param,dh,theta,phi"));
    let params: Vec<f64> = lines
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(params.len(), 10);
    assert!(params.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn scan_output_is_byte_identical_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(small_scan(&["--workers", "1", "-o", a.to_str().unwrap()]).status.success());
    let o = Command::new(BIN)
        .args(["scan", "--model", "lmg-iso", "--n", "10", "--start", "0.2", "--stop", "2.0", "--points", "10"])
        .args(["-o", b.to_str().unwrap()])
        .env("DISCORD_WORKERS", "3")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn scan_with_every_row_failing_exits_nonzero() {
    let o = hdiscord(&[
        "scan", "--model", "lmg-aniso", "--n", "9", "--start", "0.2", "--stop", "0.4", "--points", "2",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.starts_with("param,dh,theta,phi,error\n"), "{text}");
}

#[test]
fn verify_exit_code_follows_report() {
    let o = hdiscord(&["verify", "--suite", "multilevel"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("multilevel") && stdout(&o).contains("PASS"));
    let o = hdiscord(&["verify", "--suite", "conjecture1", "--trials", "6", "--seed", "4"]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn config_precedence_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[optimizer]\nrestarts = 3\nworkers = 2\n");
    let c = cfg.to_str().unwrap();

    let dumped = stdout(&hdiscord(&["--config", c, "--dump-config"]));
    assert!(dumped.contains("restarts = 3"), "{dumped}");
    assert!(dumped.contains("workers = 2"), "{dumped}");

    let dumped = stdout(&hdiscord(&["--config", c, "--restarts", "5", "--dump-config"]));
    assert!(dumped.contains("restarts = 5"), "{dumped}");

    let o = Command::new(BIN)
        .args(["--config", c, "--dump-config"])
        .env("DISCORD_WORKERS", "6")
        .output()
        .unwrap();
    assert!(stdout(&o).contains("workers = 6"));
    let o = Command::new(BIN)
        .args(["--config", c, "--workers", "7", "--dump-config"])
        .env("DISCORD_WORKERS", "6")
        .output()
        .unwrap();
    assert!(stdout(&o).contains("workers = 7"));

    let dumped = stdout(&hdiscord(&["scan", "--model", "dicke", "--dump-config"]));
    assert!(dumped.contains("[scan]") && dumped.contains("param = \"lambda\""), "{dumped}");

    let bad = write(dir.path(), "bad.toml", "[optimizer]\nrestart = 3\n");
    let o = hdiscord(&["--config", bad.to_str().unwrap(), "--dump-config"]);
    assert_eq!(o.status.code(), Some(3));
}
