use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_d2alf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("d2alf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn fi_reports_binary_tetrahedral() {
    let v = json(&run(&["fi", "--group", "2T"]));
    assert_eq!(v["result"]["fi_dimension"], 6);
    assert_eq!(v["result"]["weyl"], "S3xS3");
    assert_eq!(v["config"]["seed"], 42);
    assert!(v["version"].is_string());
}

#[test]
fn curvature_matches_closed_form() {
    let v = json(&run(&["curvature", "--c", "0.7", "--L", "1"]));
    let r = &v["result"];
    assert!(r["relative_difference"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["grid"]["N"], 64);
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = [
        "--set",
        "n=32",
        "solve",
        "--alpha0",
        "0.3,0.1",
        "--xi0",
        "0.5,0.2,0",
        "--xil",
        "-0.4,0,0.1",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert!(v["result"]["residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn config_file_is_echoed() {
    let cfg = scratch("run.cfg");
    std::fs::write(&cfg, "# coarse grid\nn = 24\nseed = 7 # fixed\n").unwrap();
    let v = json(&run(&["--config", cfg.to_str().unwrap(), "classify", "--family", "ii"]));
    assert_eq!(v["config"]["n"], 24);
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["grid"]["N"], 24);
    assert!(v["result"]["stability"].is_string());
}

#[test]
fn bad_config_exits_with_two() {
    assert_eq!(run(&["--set", "grid=3", "fi", "--group", "Z2"]).status.code(), Some(2));
    assert_eq!(run(&["--set", "n=abc", "fi", "--group", "Z2"]).status.code(), Some(2));
    assert_eq!(run(&["fi", "--group", "Q8"]).status.code(), Some(2));
    // Family vi needs equal complex parameters at both ends.
    assert_eq!(run(&["--set", "n=16", "solve", "--family", "vi"]).status.code(), Some(2));
}

#[test]
fn non_convergence_exits_with_three() {
    let out = run(&["--set", "n=32", "--set", "duy_max_iter=1", "solve"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("residual"));
}

#[test]
fn output_key_writes_file() {
    let path = scratch("rg.json");
    let out = run(&[
        "--set",
        "n=24",
        "--set",
        &format!("output={}", path.display()),
        "rg",
        "--family",
        "iii",
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v["result"]["residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn transport_loop_reports_holonomy() {
    let path = scratch("loop.csv");
    std::fs::write(
        &path,
        "xi0_1,xi0_2,xi0_3,xiL_1,xiL_2,xiL_3\n0.8,0.3,-0.2,-0.5,0.1,0.4\n0.9,0.3,-0.2,-0.5,0.1,0.4\n0.8,0.3,-0.2,-0.5,0.1,0.4\n",
    )
    .unwrap();
    let v = json(&run(&["--set", "n=24", "transport", "--path", path.to_str().unwrap()]));
    let r = &v["result"];
    assert_eq!(r["closed"], true);
    assert!(r["max_residual"].as_f64().unwrap() < 1e-9);
    assert!(r["holonomy"]["unitary_drift"].is_number());
}

#[test]
fn chart_csv_has_one_row_per_point() {
    let csv = scratch("chart.csv");
    let out = run(&[
        "--set",
        "n=24",
        "--set",
        &format!("csv_output={}", csv.display()),
        "metric",
        "--chart",
    ]);
    let v = json(&out);
    assert_eq!(v["result"]["points"], 4);
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(rows[0].starts_with("re_alpha0,"));
    assert_eq!(rows.len(), 5);
    assert!(text.contains("# seed = 42"));
}

#[test]
fn verify_single_criterion() {
    let out = run(&["verify", "--quick", "--only", "1"]);
    assert!(out.status.success());
    let s = String::from_utf8_lossy(&out.stdout);
    assert!(s.contains("[PASS]"));
    assert!(s.contains("1 of 1 criteria passed"));
}
