//! End-to-end checks of the command-line surface: wire formats, determinism
//! of seeded runs, and exit codes of the verification subcommands.

use std::path::Path;
use std::process::Command;

fn wrtlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wrtlab"))
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 output")
}

#[test]
fn grow_writes_parent_csv_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let tree_path = dir.path().join("tree.csv");
    let trace_path = dir.path().join("trace.csv");
    run_ok(wrtlab()
        .args(["grow", "--model", "wrt", "--seq"])
        .arg(r#"{"kind":"power","gamma":1.0,"c":1.0}"#)
        .args(["--n", "6", "--seed", "9"])
        .arg("--out")
        .arg(&tree_path)
        .arg("--trace")
        .arg(&trace_path));
    let tree = std::fs::read_to_string(&tree_path).unwrap();
    assert!(tree.starts_with("i,parent\n1,0\n"));
    assert_eq!(tree.lines().count(), 7);
    let trace = std::fs::read_to_string(&trace_path).unwrap();
    assert!(trace.starts_with("step,choice\n2,1\n"));
    assert_eq!(trace.lines().count(), 6);
}

#[test]
fn grow_is_deterministic_per_seed() {
    let args = |path: &Path| {
        let mut c = wrtlab();
        c.args(["grow", "--model", "pat", "--seq"])
            .arg(r#"{"kind":"constant_fitness","a":1.0,"b":1.0}"#)
            .args(["--n", "50", "--seed", "77"])
            .arg("--out")
            .arg(path);
        c
    };
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("a.csv");
    let p2 = dir.path().join("b.csv");
    run_ok(&mut args(&p1));
    run_ok(&mut args(&p2));
    let a = std::fs::read(&p1).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, std::fs::read(&p2).unwrap());

    let mut c = wrtlab();
    c.args(["grow", "--model", "pat", "--seq"])
        .arg(r#"{"kind":"constant_fitness","a":1.0,"b":1.0}"#)
        .args(["--n", "50", "--seed", "78"]);
    let other = run_ok(&mut c);
    assert_ne!(other.as_bytes(), a.as_slice());
}

#[test]
fn verify_theorem1_reports_and_exits_zero() {
    let out = run_ok(wrtlab()
        .args(["verify", "theorem1", "--fitness"])
        .arg(r#"{"kind":"constant_fitness","a":0.5,"b":2.0}"#)
        .args(["--n", "5"]));
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(true));
    assert!(report["max_abs_diff"].as_f64().unwrap() <= 1e-10);
    assert!((report["pat_total"].as_f64().unwrap() - 1.0).abs() <= 1e-10);
    assert!((report["mixture_total"].as_f64().unwrap() - 1.0).abs() <= 1e-10);
}

#[test]
fn verify_pagraph_coupling_exits_zero() {
    let out = run_ok(wrtlab().args([
        "verify",
        "pagraph-coupling",
        "--seed-degrees",
        "1,1",
        "--m",
        "2",
        "--alpha",
        "1.0",
        "--n",
        "3",
    ]));
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(true));
}

#[test]
fn urn_csv_has_exact_header() {
    let out = run_ok(wrtlab()
        .args(["urn", "--kind", "timedep", "--params"])
        .arg(r#"{"a":1.0,"b":1.0}"#)
        .args(["--n", "30", "--replicates", "3", "--seed", "5"]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("replicate,n,red,total"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn stats_profile_has_exact_header() {
    let out = run_ok(wrtlab()
        .args(["stats", "--model", "wrt", "--seq"])
        .arg(r#"{"kind":"power","gamma":1.0,"c":1.0}"#)
        .args(["--n", "200", "--replicates", "4", "--stat", "profile", "--seed", "3"]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("k,count,prediction"));
    assert!(lines.next().unwrap().starts_with("0,1,"));
}

#[test]
fn limits_moments_are_json() {
    let out = run_ok(wrtlab()
        .args(["limits", "--law", "ml", "--params"])
        .arg(r#"{"alpha":0.5,"theta":0.5}"#)
        .args(["--max-moment", "2"]));
    let moments: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(moments["0"].as_f64().unwrap(), 1.0);
    assert!((moments["1"].as_f64().unwrap() - 1.7724538509).abs() < 1e-9);
    assert!((moments["2"].as_f64().unwrap() - 4.0).abs() < 1e-9);
}

#[test]
fn pagraph_edge_list() {
    let out = run_ok(wrtlab().args([
        "pagraph",
        "--seed-degrees",
        "1,1",
        "--m",
        "2",
        "--alpha",
        "0.0",
        "--n",
        "4",
        "--seed",
        "6",
    ]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("u,v"));
    assert_eq!(lines.count(), 6); // m (n-1) edges
}

#[test]
fn accept_single_criterion_json() {
    let out = run_ok(wrtlab().args([
        "accept",
        "--level",
        "fast",
        "--criterion",
        "1",
    ]));
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(true));
    assert_eq!(report["id"], serde_json::Value::from(1));
}

#[test]
fn bad_config_is_a_clean_error() {
    let out = wrtlab()
        .args(["grow", "--model", "wrt", "--seq", "{\"kind\":\"nope\"}", "--n", "5"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("parsing sequence spec"), "{err}");
}
