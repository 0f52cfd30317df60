use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lazy-dar"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn ratio_on_emitted_lower_bound_instance() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "lower-bound",
        "--alpha",
        "1.2",
        "--epsilon",
        "0.01",
        "--emit-instance",
    ]);
    assert!(o.status.success());
    let path = write(dir.path(), "prop.json", &stdout(&o));
    let o = run(&[
        "ratio",
        "--instance",
        &path,
        "--algo",
        "lazy",
        "--alpha",
        "1.2",
    ]);
    assert!(o.status.success());
    // (8α + 2 − (2α + 2)ε) / (4α) at α = 1.2, ε = 0.01
    assert_eq!(stdout(&o).trim(), "2.407500");
}

#[test]
fn ratio_json_has_components() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "one.json",
        r#"{"metric":{"type":"halfline"},"capacity":1,"requests":[{"a":0,"b":1,"t":0}]}"#,
    );
    let o = run(&[
        "--format",
        "json",
        "ratio",
        "--instance",
        &path,
        "--algo",
        "lazy",
        "--alpha",
        "1.5",
    ]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["alg"], 2.5);
    assert_eq!(v["opt"], 1.0);
    assert_eq!(v["ratio"], 2.5);
}

#[test]
fn missing_instance_is_usage_error() {
    let o = run(&["simulate", "--algo", "lazy"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn bad_instance_is_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "bad.json",
        r#"{"metric":{"type":"line"},"capacity":0,"requests":[]}"#,
    );
    let o = run(&["opt", "--instance", &path]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["opt", "--instance", "/definitely/not/here.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_trace_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "two.json",
        r#"{"metric":{"type":"line"},"capacity":"inf",
            "requests":[{"a":0,"b":2,"t":0},{"a":-1,"b":1,"t":1.5}]}"#,
    );
    let o = run(&[
        "simulate",
        "--instance",
        &path,
        "--algo",
        "lazy",
        "--alpha",
        "1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let trace: lazy_dar::Trace = serde_json::from_value(v).unwrap();
    assert!(!trace.schedules.is_empty());
    assert!(trace.completion > 0.0);
}

#[test]
fn fuzz_csv_is_stable() {
    let args = [
        "--format", "csv", "fuzz", "--algo", "lazy", "--seed", "11", "--count", "20",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("idx,alg,opt,ratio"));
    assert_eq!(lines.count(), 20);
}

#[test]
fn fuzz_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "cfg.json",
        r#"{"metrics":["halfline"],"max_requests":3,"capacities":[1,"inf"],"count":7,"seed":2}"#,
    );
    let o = run(&["fuzz", "--config", &path, "--algo", "replan"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["entries"].as_array().unwrap().len(), 7);
    assert_eq!(v["algorithm"], "replan");
}

#[test]
fn sweep_csv() {
    let o = run(&["sweep", "--grid", "1:1.5:0.5"]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o).trim(),
        "alpha,bound,source\n1.000000,2.500000,four-request\n1.500000,2.500000,one-plus-alpha"
    );
    let o = run(&["sweep", "--grid", "1:0:0.5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn factor_reveal_json() {
    let o = run(&["factor-reveal", "--alpha", "1.5"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["closed_form"], 2.5);
    assert_eq!(v["assignment"].as_object().unwrap().len(), 10);
    assert_eq!(v["binaries"].as_array().unwrap().len(), 4);
    let o = run(&["factor-reveal", "--alpha", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["factor-reveal"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn precision_flag() {
    let o = run(&["--precision", "2", "sweep", "--grid", "1:1:1"]);
    assert_eq!(
        stdout(&o).trim(),
        "alpha,bound,source\n1.00,2.50,four-request"
    );
}
