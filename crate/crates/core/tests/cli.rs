use std::path::PathBuf;
use std::process::{Command, Output};

fn nilsol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nilsol")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nilsol-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn sol_on_a_set_file() {
    let dir = scratch("sol");
    let set = dir.join("A.txt");
    std::fs::write(&set, "N 5\n0\n1\n").unwrap();
    let out = nilsol(&["sol", "--system", "3ap", "--set", set.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["count"], "2");
    assert_eq!(v["total"], "25");
    let fast = nilsol(&["sol", "--system", "3ap", "--set", set.to_str().unwrap(), "--fast", "--format", "csv"]);
    assert!(stdout(&fast).contains("fourier,0.08"));
}

#[test]
fn min_sol_exact_json() {
    let out = nilsol(&["min-sol", "--system", "3ap", "--alpha", "0.4", "--n", "5", "--exact"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["value"]["exact"], "2/25");
    assert_eq!(v["boundKind"], "equals");
    assert_eq!(v["method"], "exact");
    assert_eq!(v["verification"]["verified"], true);
}

#[test]
fn budget_exhaustion_exits_with_two() {
    let out = nilsol(&["min-sol", "--system", "3ap", "--alpha", "1/2", "--n", "90", "--budget-ms", "20"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn input_errors_exit_with_one() {
    assert_eq!(nilsol(&["min-sol", "--system", "3ap", "--alpha", "x", "--n", "5"]).status.code(), Some(1));
    assert_eq!(nilsol(&["sol", "--system", "/no/such/file.json", "--set", "/no/such"]).status.code(), Some(1));
    let unknown = nilsol(&["reproduce", "nope"]);
    assert_eq!(unknown.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("weyl-1009"));
}

#[test]
fn construct_writes_certificate() {
    let dir = scratch("construct");
    let out = nilsol(&["construct", "mult", "--k", "2", "--p", "7", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["value"]["exact"], "2/7");
    assert_eq!(v["method"], "construction");
    assert!(std::fs::read_to_string(dir.join("construct-mult.set.txt")).unwrap().starts_with("N 7\n"));
}

#[test]
fn scan_is_deterministic_and_plots() {
    let dir = scratch("scan");
    let args = ["scan", "--system", "pair:2", "--quantity", "d", "--moduli", "5-13", "--format", "csv", "--out", dir.to_str().unwrap()];
    let strip = |s: String| s.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect::<Vec<_>>();
    let first = strip(stdout(&nilsol(&args)));
    assert_eq!(first.len(), 10);
    assert_eq!(first[0], "N,isPrime,p1,quantity,value,method,seed");
    assert_eq!(first[1], "5,true,5,d,0.400000000000,cycle,0");
    assert_eq!(first, strip(stdout(&nilsol(&args))));
    assert!(std::fs::read_to_string(dir.join("scan.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn nil_build_periodic_reports_verification() {
    let out = nilsol(&["nil", "build-periodic", "--model", "heisenberg-lcs", "--q", "227", "--A", "3", "--seed", "7", "--verify", "full"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["periodic"], true);
    assert_eq!(v["irrational"], true);
    assert_eq!(v["verification"]["allLevelOneSumsZero"], true);
    assert_eq!(v["taylor"]["coefficients"].as_array().unwrap().len(), 3);
}

#[test]
fn reproduce_by_number() {
    let out = nilsol(&["reproduce", "11", "--format", "csv"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("PASS [11] kernelize"));
}
