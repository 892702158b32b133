use std::path::PathBuf;
use std::process::{Command, Output};

fn pqharm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pqharm")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn temp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("pqharm-cli-{}-{name}", std::process::id()))
}

fn assert_usage_error(out: &Output, flag: &str) {
    assert_eq!(out.status.code(), Some(2));
    let e = stderr(out);
    assert!(e.contains(flag), "{e}");
    assert!(e.contains("Usage:"), "{e}");
}

#[test]
fn energy_of_hopf_field() {
    let v = json(&pqharm(&["energy", "--manifold", "sphere:3", "--section", "hopf", "--p", "0", "--q", "0", "--samples", "100000", "--seed", "42"]));
    let total = v["total"].as_f64().unwrap();
    assert!((total - 19.7392).abs() < 1e-4, "{total}");
    assert_eq!(v["N"], 100000);
    assert_eq!(v["seed"], 42);
}

#[test]
fn energy_of_zero_section() {
    let v = json(&pqharm(&["energy", "--section", "zero", "--p", "3", "--q", "-2", "--samples", "100"]));
    assert_eq!(v["total"].as_f64().unwrap(), 0.0);
}

#[test]
fn energy_csv() {
    let out = pqharm(&["energy", "--section", "hopf", "--p", "1", "--q", "1", "--samples", "100", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("total,density_min,density_max,N,seed,p,q\n"));
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn missing_flag_is_a_usage_error() {
    assert_usage_error(&pqharm(&["energy", "--section", "hopf", "--q", "0"]), "--p");
}

#[test]
fn unparseable_values_are_usage_errors() {
    assert_usage_error(&pqharm(&["energy", "--section", "bogus", "--p", "0", "--q", "0"]), "--section");
    assert_usage_error(&pqharm(&["energy", "--section", "hopf", "--p", "x", "--q", "0"]), "--p");
    assert_usage_error(&pqharm(&["energy", "--manifold", "cube:3", "--section", "hopf", "--p", "0", "--q", "0"]), "--manifold");
    assert_usage_error(&pqharm(&["energy", "--scheme", "fibonacci", "--section", "hopf", "--p", "0", "--q", "0"]), "--scheme");
    assert_usage_error(&pqharm(&["--threads", "0", "energy", "--section", "hopf", "--p", "0", "--q", "0"]), "--threads");
}

#[test]
fn residual_of_conformal_solution() {
    let base = ["residual", "--manifold", "sphere:3", "--section", "conformal:a=1,0,0,0", "--q", "-1", "--samples", "1000"];
    let mut args = base.to_vec();
    args.extend(["--p", "4"]);
    let v = json(&pqharm(&args));
    assert!(v["sup_residual"].as_f64().unwrap() < 1e-10);
    assert!(v.get("per_point").is_none());
    let mut args = base.to_vec();
    args.extend(["--p", "3"]);
    let v = json(&pqharm(&args));
    assert!(v["sup_residual"].as_f64().unwrap() > 1e-4);
}

#[test]
fn residual_per_point() {
    let args = ["residual", "--section", "conformal:a=1,0,0,0", "--p", "4", "--q", "-1", "--samples", "20", "--per-point"];
    let v = json(&pqharm(&args));
    assert_eq!(v["per_point"].as_array().unwrap().len(), 20);
    let mut csv_args = args.to_vec();
    csv_args.extend(["--format", "csv"]);
    let out = pqharm(&csv_args);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("x0,x1,x2,x3,lambda,tension,phi,residual\n"));
    assert_eq!(text.lines().count(), 21);
}

#[test]
fn hopf_needs_an_odd_sphere() {
    assert_usage_error(&pqharm(&["residual", "--section", "hopf", "--manifold", "sphere:2", "--p", "1", "--q", "1"]), "--section");
}

#[test]
fn solve52() {
    let v = json(&pqharm(&["solve52", "--n", "5"]));
    assert_eq!(v["p"].as_f64().unwrap(), 6.0);
    assert_eq!(v["q"].as_f64().unwrap(), -3.0);
    assert!((v["c"].as_f64().unwrap() - 0.57735).abs() < 1e-5);
    assert_usage_error(&pqharm(&["solve52", "--n", "2"]), "--n");
}

#[test]
fn sweeps() {
    let v = json(&pqharm(&["sweep", "--section", "hopf", "--p", "2", "--q", "0", "--k-range", "0.1:3", "--samples", "300"]));
    let roots = v["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 1);
    assert!((roots[0].as_f64().unwrap() - 1.0).abs() < 1e-8);
    let out = pqharm(&["sweep", "--family", "conformal", "--manifold", "sphere:5", "--p", "6", "--q", "-3", "--c-range", "0.1:2", "--steps", "30", "--samples", "300", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("c,residual,energy\n"));
    assert_eq!(text.lines().count(), 31);
    assert_usage_error(&pqharm(&["sweep", "--p", "2", "--q", "0", "--steps", "2"]), "--steps");
    assert_usage_error(&pqharm(&["sweep", "--section", "scaled:hopf:k=2", "--p", "2", "--q", "0"]), "--section");
    assert_usage_error(&pqharm(&["sweep", "--family", "conformal", "--manifold", "torus:2", "--p", "2", "--q", "0"]), "--manifold");
}

#[test]
fn regions_writes_csv_and_svg() {
    let csv = temp("regions.csv");
    let svg = temp("regions.svg");
    let out = pqharm(&[
        "regions", "--mu", "0.5", "--nu", "1", "--p-range", "-5:5", "--q-range", "-8:4", "--res", "200",
        "--svg", svg.to_str().unwrap(), "--output", csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("p,q,labels\n"));
    assert_eq!(text.lines().count(), 40_001);
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    let _ = std::fs::remove_file(csv);
    let _ = std::fs::remove_file(svg);
    assert_usage_error(&pqharm(&["regions", "--p-range", "5:-5"]), "--p-range");
    assert_usage_error(&pqharm(&["regions", "--res", "1"]), "--res");
    assert_usage_error(&pqharm(&["regions", "--mu", "0"]), "--mu");
}

#[test]
fn identical_config_gives_identical_bytes() {
    let args = ["energy", "--section", "conformal:a=0.3,0.1,0,0.5", "--p", "2", "--q", "-0.5", "--samples", "5000", "--seed", "9"];
    let a = pqharm(&args);
    let mut threaded = vec!["--threads", "1"];
    threaded.extend(args);
    let b = pqharm(&threaded);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_is_deterministic() {
    let (j1, j2) = (temp("v1.json"), temp("v2.json"));
    let first = pqharm(&["verify", "--fast", "--seed", "42", "--json", j1.to_str().unwrap()]);
    let table = String::from_utf8_lossy(&first.stdout).into_owned();
    assert_eq!(first.status.code(), Some(0), "{table}");
    assert!(table.contains("12/12 criteria passed"));
    let second = pqharm(&["verify", "--fast", "--seed", "42", "--json", j2.to_str().unwrap()]);
    assert_eq!(second.status.code(), Some(0));
    let (a, b) = (std::fs::read(&j1).unwrap(), std::fs::read(&j2).unwrap());
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["criteria"].as_array().unwrap().len(), 12);
    assert_eq!(v["passed"], true);
    let _ = std::fs::remove_file(j1);
    let _ = std::fs::remove_file(j2);
}
