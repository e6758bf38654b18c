use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn ucvrp<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_ucvrp")).args(args).output().expect("spawn ucvrp")
}

fn ok_json(out: Output) -> Value {
    assert!(out.status.success(), "exit {}: {}", out.status, String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn line3_end_to_end() {
    let line3 = fixture("line3.json");
    let exact = ok_json(ucvrp([Path::new("exact"), &line3]));
    assert_eq!(exact["opt_cost"], 8.0);

    let out = ok_json(ucvrp(["solve".as_ref(), line3.as_os_str(), "--alg".as_ref(), "ditp".as_ref(), "--delta".as_ref(), "1/3".as_ref()]));
    assert_eq!(out["cost"], 8.0);
    assert_eq!(out["params"]["delta"], "1/3");
    assert!(out["bound_checks"].as_array().unwrap().iter().all(|b| b["holds"] == true));
}

#[test]
fn tsplib_input() {
    let file = fixture("square5.vrp");
    let exact = ok_json(ucvrp([Path::new("exact"), &file]));
    let opt = exact["opt_cost"].as_f64().unwrap();
    assert!((opt - (36.0 + 10f64.sqrt())).abs() < 1e-9, "{opt}");
    assert_eq!(exact["n"], 5);
    for alg in ["itp", "subalg1", "alg1", "alg2"] {
        let out = ok_json(ucvrp(["solve".as_ref(), file.as_os_str(), "--alg".as_ref(), alg.as_ref()]));
        assert!(out["cost"].as_f64().unwrap() >= opt - 1e-9, "{alg}");
        assert_eq!(out["feasible"], true);
    }
}

#[test]
fn usage_errors_exit_with_two() {
    let line3 = fixture("line3.json");
    let bad_alg = ucvrp(["solve".as_ref(), line3.as_os_str(), "--alg".as_ref(), "nope".as_ref()]);
    assert_eq!(bad_alg.status.code(), Some(2));
    let bad_delta = ucvrp(["solve".as_ref(), line3.as_os_str(), "--alg".as_ref(), "subalg3".as_ref(), "--delta".as_ref(), "1/2".as_ref()]);
    assert_eq!(bad_delta.status.code(), Some(2));
    assert_eq!(ucvrp(["exact", "/nonexistent/file.json"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, r#"{"name":"x","capacity":2,"demands":[3],"metric":{"type":"explicit","matrix":[[0,1],[1,0]]}}"#)
        .unwrap();
    let out = ucvrp([Path::new("exact"), &broken]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("demand"));
}

#[test]
fn check_reports_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixture("line3.json"), dir.path().join("line3.json")).unwrap();
    for seed in 0..3 {
        let path = dir.path().join(format!("g{seed}.json"));
        let out = ucvrp(["gen", "-n", "6", "-k", "3", "--law", "heavy-tail", "--seed", &seed.to_string(), "--out", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let report = ok_json(ucvrp([Path::new("check"), dir.path()]));
    assert_eq!(report["instances"], 4);
    assert!(report["checks"].as_u64().unwrap() > 100);
    assert_eq!(report["violations"], Value::Array(vec![]));
}

#[test]
fn dump_lp_writes_the_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("lp.json");
    ok_json(ucvrp([
        "solve".as_ref(),
        fixture("line3.json").as_os_str(),
        "--alg".as_ref(),
        "alg1".as_ref(),
        "--dump-lp".as_ref(),
        dump.as_os_str(),
    ]));
    let lp: Value = serde_json::from_str(&std::fs::read_to_string(&dump).unwrap()).unwrap();
    assert_eq!(lp["catalog"]["tours"].as_array().unwrap().len(), 6);
    assert!((lp["lp"]["objective"].as_f64().unwrap() - 8.0).abs() < 1e-9);
}

#[test]
fn bench_csv_and_constants_table() {
    let out = ucvrp(["bench", "--suite", "small", "--seeds", "1", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("instance,n,k,algorithm"));
    let columns = header.split(',').count();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 12 * 9);
    assert!(rows.iter().all(|r| r.split(',').count() == columns && r.ends_with("true")));

    let out = ucvrp(["constants", "--format", "table"]);
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("alg1 ratio, alpha = 1.5"));
    assert!(table.contains("3.0896"));
}
