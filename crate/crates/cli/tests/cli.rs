use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_projflat")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn hilbert_ball_distance() {
    let v = json(&["distance", "--metric", "hilbert_ball", "--from", "0,0", "--to", "0.5,0"]);
    let half_ln3 = 0.5 * 3f64.ln();
    assert!((v["formula"].as_f64().unwrap() - half_ln3).abs() < 1e-12);
    assert!((v["integral"].as_f64().unwrap() - half_ln3).abs() < 1e-9);
}

#[test]
fn berwald_curvature_vanishes() {
    let v = json(&["curvature", "--metric", "berwald", "--samples", "100"]);
    assert!(v["max_abs_k"].as_f64().unwrap() < 1e-5);
    assert_eq!(v["rows"].as_array().unwrap().len(), 100);
}

#[test]
fn randers_scan_splits() {
    let v = json(&["scan", "--metric", "randers_k0", "--a1", "0.9718", "--res", "400", "--threads", "2"]);
    assert_eq!(v["components"], 2);
    assert!(!v["boundary_polylines"].as_array().unwrap().is_empty());
}

#[test]
fn scan_csv_export_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    let out = run(&[
        "scan", "--metric", "randers_k0", "--a1", "0.5", "--res", "20", "--format", "csv", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x2,label,min_eig,det"));
    assert_eq!(lines.count(), 400);
}

#[test]
fn config_file_and_seed_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("metric.json");
    std::fs::write(&path, r#"{"family":"k0","psi":{"kind":"euclidean"},"phi":{"kind":"randers","a":[0.2,0.1]}}"#).unwrap();
    let p = path.to_str().unwrap();
    let a = run(&["curvature", "--config", p, "--samples", "5", "--seed", "7"]);
    let b = run(&["curvature", "--config", p, "--samples", "5", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["eval", "--metric", "berwald", "--at", "2,0", "--dir", "1,0"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "--metric", "unknown", "--at", "0,0", "--dir", "1,0"]).status.code(), Some(1));
    assert_eq!(run(&["eval", "--no-such-flag"]).status.code(), Some(1));
    let bad = run(&["eval", "--metric", r#"{"family":"k0","psi":{"kind":"euclidean"}}"#, "--at", "0,0", "--dir", "1,0"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("phi"));
    assert_eq!(run(&["growth", "--metric", "hilbert_ball"]).status.code(), Some(2));
}

#[test]
fn classify_and_growth() {
    let k0 = r#"{"family":"k0","psi":{"kind":"euclidean"},"phi":{"kind":"euclidean"}}"#;
    let v = json(&["classify", "--metric", k0]);
    assert_eq!(v["case_label"], "flat_funk");
    assert_eq!(v["backward_complete"], false);
    let v = json(&["growth", "--metric", k0]);
    let rows = v["rows"].as_array().unwrap();
    assert!((rows[0]["r"].as_f64().unwrap() - 9.0).abs() < 1e-9);
    assert!(rows.iter().all(|r| r["ratio"].as_f64().unwrap() >= 1.0));
}

#[test]
fn sphere_check_bryant() {
    let v = json(&["sphere-check", "--metric", "bryant", "--alpha", "0.3", "--samples", "20"]);
    assert!((v["glued_great_circle_length"].as_f64().unwrap() - std::f64::consts::TAU).abs() < 2e-3);
    assert!((v["line_length"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-3);
    assert!(v["equator"]["min_eig"].as_f64().unwrap() > 1e-3);
}
