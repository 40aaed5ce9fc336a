use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jobshop_codec::instance::Instance;
use serde_json::Value;
use tempfile::TempDir;

fn jobshop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jobshop"))
        .args(args)
        .env_remove("JOBSHOP_ORACLE_CAP")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = jobshop(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).unwrap()
}

fn write_instance(dir: &Path, name: &str, jobs: &[Vec<(usize, u64)>], machines: usize) -> PathBuf {
    let path = dir.join(format!("{name}.json"));
    fs::write(&path, Instance::from_jobs(machines, jobs).unwrap().to_json()).unwrap();
    path
}

fn fig2(dir: &Path) -> PathBuf {
    write_instance(dir, "fig2", &[vec![(1, 1), (2, 2), (1, 2)], vec![(1, 1), (2, 1)]], 2)
}

fn order(schedule: &Value) -> Vec<u64> {
    schedule["entries"].as_array().unwrap().iter().map(|e| e["op"].as_u64().unwrap()).collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_writes_parseable_instances() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    ok(&["generate", "--n-ops", "5", "--seed", "7", "--out", s(&a)]);
    let inst = jobshop_codec::parse_instance(&fs::read_to_string(&a).unwrap()).unwrap();
    assert_eq!(inst.n_ops(), 5);
    assert_eq!(ok(&["generate", "--n-ops", "5", "--seed", "7"]), fs::read_to_string(&a).unwrap());

    let one: Value = json(&["generate", "--n-ops", "1"]);
    assert_eq!(one["n_ops"], 1);
    let flex = jobshop_codec::parse_instance(&ok(&["generate", "--n-ops", "6", "--fjsp", "--seed", "3"])).unwrap();
    assert_eq!(flex.n_ops(), 6);
    assert!(!jobshop(&["generate", "--n-ops", "0"]).status.success());
}

#[test]
fn decode_index_zero_is_identity() {
    let dir = TempDir::new().unwrap();
    let f = fig2(dir.path());
    let sch = json(&["decode", "--instance", s(&f), "--index", "0"]);
    assert_eq!(order(&sch), [1, 2, 3, 4, 5]);
    let same = json(&["decode", "--instance", s(&f), "--bitstring", "0000"]);
    assert_eq!(sch, same);
    assert_eq!(json(&["decode", "--instance", s(&f), "--index", "0b1001"]), json(&["decode", "--instance", s(&f), "--index", "9"]));
}

#[test]
fn decode_single_op_jobs() {
    let dir = TempDir::new().unwrap();
    let jobs: Vec<Vec<(usize, u64)>> = (0..5).map(|_| vec![(1, 1)]).collect();
    let f = write_instance(dir.path(), "five", &jobs, 1);
    assert_eq!(order(&json(&["decode", "--instance", s(&f), "--index", "61"])), [3, 5, 1, 2, 4]);
}

#[test]
fn encode_decode_round_trip() {
    let dir = TempDir::new().unwrap();
    let f = fig2(dir.path());
    let sch = dir.path().join("s.json");
    fs::write(
        &sch,
        r#"{"entries":[{"op":1,"machine":1},{"op":2,"machine":2},{"op":4,"machine":1},{"op":3,"machine":1},{"op":5,"machine":2}]}"#,
    )
    .unwrap();
    let idx = json(&["encode", "--instance", s(&f), "--schedule", s(&sch)]);
    assert_eq!(idx["value"], "1");
    assert_eq!(idx["bitstring"], "0001");
    let back = json(&["decode", "--instance", s(&f), "--index", "1"]);
    let original: Value = serde_json::from_str(&fs::read_to_string(&sch).unwrap()).unwrap();
    assert_eq!(back, original);
}

#[test]
fn strict_decode_rejects_out_of_range() {
    let dir = TempDir::new().unwrap();
    let f = fig2(dir.path());
    let out = jobshop(&["decode", "--instance", s(&f), "--index", "12"]);
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
    let wrapped = json(&["decode", "--instance", s(&f), "--index", "12", "--mode", "total"]);
    assert_eq!(wrapped, json(&["decode", "--instance", s(&f), "--index", "2"]));
}

#[test]
fn solve_brute() {
    let dir = TempDir::new().unwrap();
    let f = fig2(dir.path());
    let r = json(&["solve", "--instance", s(&f), "--method", "brute"]);
    assert_eq!(r["c_gs"], 5);
    assert_eq!(r["timing"]["makespan"], 5);

    let chain = write_instance(dir.path(), "chain", &[vec![(1, 2), (2, 3), (1, 4)]], 2);
    assert_eq!(json(&["solve", "--instance", s(&chain)])["c_gs"], 9);
}

#[test]
fn solve_fvqe_exact() {
    let dir = TempDir::new().unwrap();
    let f = fig2(dir.path());
    let out = dir.path().join("r.json");
    let trace = dir.path().join("t.csv");
    let summary = ok(&[
        "solve", "--instance", s(&f), "--method", "fvqe", "--shots", "0", "--out", s(&out), "--trace", s(&trace),
    ]);
    assert!(summary.contains("alpha"));
    let r: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["result"]["alpha"], 1.0);
    let csv = fs::read_to_string(&trace).unwrap();
    assert!(csv.starts_with("iteration,tau,eta,mean_energy,best_energy,grad_norm\n"));
    assert_eq!(csv.lines().count(), 32);
}

#[test]
fn solve_fvqe_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let f = fig2(dir.path());
    let args = ["solve", "--instance", s(&f), "--method", "fvqe", "--iters", "5", "--seed", "11"];
    assert_eq!(ok(&args), ok(&args));
}

#[test]
fn compare_encodings_from_directory() {
    let dir = TempDir::new().unwrap();
    fig2(dir.path());
    let csv = ok(&["compare-encodings", "--instances", s(dir.path())]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("instance,n_ops,n_qubits,n_qubits_time_indexed,horizon,horizon_source,ratio"));
    assert_eq!(lines.next(), Some("fig2,5,4,11,5,c_gs,2.75"));
    assert_eq!(lines.next(), None);
}

#[test]
fn compare_encodings_family() {
    let csv = ok(&["compare-encodings", "--family", "nxnxn", "--n", "2,3"]);
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "nxnxn-2");
    assert_eq!(rows[0][2], "3");
    assert_eq!(rows[1][1], "9");
}

#[test]
fn oracle_cap_env_falls_back_to_lower_bound() {
    let dir = TempDir::new().unwrap();
    fig2(dir.path());
    let out = Command::new(env!("CARGO_BIN_EXE_jobshop"))
        .args(["compare-encodings", "--instances", s(dir.path())])
        .env("JOBSHOP_ORACLE_CAP", "3")
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[5], "t_min");
    assert!(!jobshop(&["--oracle-cap", "3", "solve", "--instance", s(&dir.path().join("fig2.json"))]).status.success());
}

#[test]
fn check_reports_bijection() {
    let dir = TempDir::new().unwrap();
    let f = fig2(dir.path());
    let r = json(&["check", "--instance", s(&f)]);
    assert_eq!(r["count"], 10);
    assert_eq!(r["distinct"], 10);
    assert_eq!(r["invalid"], 0);
}
