use std::fs;
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polysigma"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).env("POLYSIGMA_THREADS", "2").output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn verify_full_group_passes() {
    let (code, out, _) = run(&["verify", "--family", "full", "--n", "3", "--q", "4"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["order"], 16);
    assert_eq!(v["querelement"], true);
    assert_eq!(v["assoc_exhaustive"], true);
}

#[test]
fn verify_writes_junit_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let junit = dir.path().join("junit.xml");
    let (code, out, _) = run(&[
        "verify",
        "--family",
        "elementary",
        "--out",
        report.to_str().unwrap(),
        "--junit",
        junit.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["order"], 33);
    assert_eq!(v["zero_absorption"], true);
    let xml = fs::read_to_string(&junit).unwrap();
    assert!(xml.contains("<testsuite"));
    assert!(xml.contains("zero_absorption"));
}

#[test]
fn sample_mode_is_seeded() {
    let args = ["verify", "--family", "het", "--n", "4", "--q", "8", "--mode", "sample", "--samples", "3000"];
    let (c1, a, _) = run(&args);
    let (c2, b, _) = run(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["sampled"], true);
    assert_eq!(v["closure_exhaustive"], false);
}

#[test]
fn cayley_pauli_csv() {
    let (code, out, _) = run(&["cayley", "--family", "pauli", "--q", "4"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "a1,a2,result_j,result_k,result_r");
    assert_eq!(lines.len(), 257);
}

#[test]
fn cayley_budget_exit_code() {
    let (code, _, err) = run(&["cayley", "--family", "full", "--n", "5", "--q", "360", "--budget", "1000"]);
    assert_eq!(code, 2);
    assert!(err.contains("budget"));
}

#[test]
fn param_mul_binary_and_ternary() {
    let dir = tempfile::tempdir().unwrap();
    let binary = dir.path().join("b.json");
    fs::write(
        &binary,
        r#"[[{"arity":2,"blocks":[{"x0":0.6,"x":[0.8,0.0,0.0]}]},
             {"arity":2,"blocks":[{"x0":0.0,"x":[0.0,1.0,0.0]}]}]]"#,
    )
    .unwrap();
    let (code, out, _) = run(&["param-mul", binary.to_str().unwrap(), "--n", "2"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["count"], 1);
    assert_eq!(v["passed"], true);

    let ternary = dir.path().join("t.json");
    let e = r#"{"arity":3,"blocks":[{"x0":0.0,"x":[0.0,0.0,1.0]},{"x0":0.6,"x":[0.0,0.8,0.0]}]}"#;
    fs::write(&ternary, format!("[[{e},{e},{e}]]")).unwrap();
    let (code, out, _) = run(&["param-mul", ternary.to_str().unwrap(), "--n", "3"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["max_abs_deviation"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn param_mul_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"[[{"arity":2,"blocks":[{"x0":0.9,"x":[0.9,0.0,0.0]}]}]]"#).unwrap();
    assert_eq!(run(&["param-mul", bad.to_str().unwrap(), "--n", "2"]).0, 2);
    assert_eq!(run(&["param-mul", "/nonexistent.json"]).0, 2);
}

#[test]
fn trace_of_identity_and_element() {
    let dir = tempfile::tempdir().unwrap();
    let id = dir.path().join("id.json");
    fs::write(&id, r#"{"arity":4,"identity":{"side":"left","coeffs":[2.0,0.5,1.0]}}"#).unwrap();
    let (code, out, _) = run(&["trace", id.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["ordinary_trace"]["re"], 0.0);
    assert_eq!(v["polyadic_trace"]["re"], 7.0);

    fs::write(&id, r#"{"arity":4,"identity":{"side":"left","coeffs":[2.0,2.0,1.0]}}"#).unwrap();
    assert_eq!(run(&["trace", id.to_str().unwrap()]).0, 2);

    let el = dir.path().join("el.json");
    fs::write(&el, r#"{"arity":2,"blocks":[{"x0":0.6,"x":[0.0,0.0,0.8]}]}"#).unwrap();
    let (code, out, _) = run(&["trace", el.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!((v["polyadic_trace"]["re"].as_f64().unwrap() - 1.2).abs() < 1e-12);
}

#[test]
fn rules_csv_shapes() {
    let (code, out, _) = run(&["rules", "--family", "elementary"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("lhs_indices,rhs_label,phase_exponent"));
    assert_eq!(out.lines().count(), 513);
}
