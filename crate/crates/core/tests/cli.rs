use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mild-ns")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_cfg(dir: &Path, text: &str) -> String {
    let p = dir.join("run.cfg");
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

const SMALL_SOLVE: &str = "[grid]\nhalf_width = 8.0\nn = 64\n[solver]\neta_samples = 1\n";

fn desk_cfg() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/desk.cfg").display().to_string()
}

#[test]
fn verify_on_desk_config_passes_and_writes_reports() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = run(&["verify", "--config", &desk_cfg(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("verify.json")).unwrap()).unwrap();
    assert_eq!(json["body"]["verdict"], true);
    assert_eq!(json["header"]["seed"], 0);
    let reports = json["body"]["reports"].as_array().unwrap();
    assert!(!reports.is_empty() && reports.iter().all(|r| r["verdict"].is_boolean()));

    let csv = std::fs::read_to_string(out.join("csv").join("heat_g_0_b_1.5.csv")).unwrap();
    assert!(csv.starts_with("series,t_or_r,value\n"));
}

#[test]
fn seed_flag_is_recorded_and_json_toggle_skips_csv() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = run(&["verify", "--seed", "17", "--json", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("verify.json")).unwrap()).unwrap();
    assert_eq!(json["header"]["seed"], 17);
    assert!(!out.join("csv").exists());
}

#[test]
fn missing_config_names_the_path() {
    let o = run(&["verify", "--config", "/no/such/desk.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/no/such/desk.cfg"));
}

#[test]
fn unknown_key_fails_with_schema_path() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(dir.path(), "[solver]\nslicez = 4\n");
    let out = dir.path().join("out");
    let o = run(&["verify", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("solver.slicez"));
    assert!(!out.exists(), "nothing may run before the schema check");
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(run(&["simulate"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn oversized_delta_is_refused() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(dir.path(), &format!("{SMALL_SOLVE}delta = 100.0\neta_hat = 0.2\n"));
    let out = dir.path().join("out");
    let o = run(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("smallness"), "{}", stderr(&o));
}

#[test]
fn divergent_override_run_exits_one_with_diagnostics() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(dir.path(), &format!("{SMALL_SOLVE}delta = 400.0\n"));
    let out = dir.path().join("out");
    let o = run(&["solve", "--config", &cfg, "--override-smallness", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(out.join("failed.json").exists());
}

#[test]
fn solve_then_report() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(dir.path(), SMALL_SOLVE);
    let out = dir.path().join("out");
    let o = run(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("run.json").exists() && out.join("slices.bin").exists());

    let o = run(&["report", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(matches!(o.status.code(), Some(0 | 1)), "{}", stderr(&o));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(json["body"].is_object());

    // A damaged slice file is a runtime error.
    std::fs::write(out.join("slices.bin"), b"MNSSLICE").unwrap();
    let o = run(&["report", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
