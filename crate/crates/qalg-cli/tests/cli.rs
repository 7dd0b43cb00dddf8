use rug::ops::Pow;
use rug::Rational;
use serde_json::Value;
use std::process::{Command, Output};

fn corpus(name: &str) -> String {
    format!("{}/../qalg-core/corpus/{name}.qeq", env!("CARGO_MANIFEST_DIR"))
}

fn qalg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qalg")).args(args).output().expect("qalg runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

#[test]
fn analyze_running_example() {
    let out = qalg(&["analyze", &corpus("running")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], "qalg/1");
    let rep = &v["leaves"][0]["report"];
    assert_eq!(rep["classification"], "DivergentCandidate");
    let text = String::from_utf8(qalg(&["analyze", &corpus("running"), "--format", "text"]).stdout).unwrap();
    assert!(text.contains("H = 1, h = 3"), "{text}");
    assert!(text.contains("(-2) + (4)*z^3*t^1 + (36*q^-24)*z^7*t^1"), "{text}");
}

#[test]
fn analyze_cfa_chain() {
    let text = String::from_utf8(qalg(&["analyze", &corpus("cfa"), "--format", "text"]).stdout).unwrap();
    assert!(text.contains("397 expanded monomials"), "{text}");
    assert!(text.contains("H = 3/34, h = 17"), "{text}");
}

#[test]
fn empty_file_is_a_usage_error() {
    let path = std::env::temp_dir().join("qalg-empty-equation.qeq");
    std::fs::write(&path, "").unwrap();
    let out = qalg(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn syntax_error_is_a_usage_error() {
    let out = qalg(&["analyze", "-e", "f(z) + * z"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("syntax error"));
}

#[test]
fn asym_on_convergent_input_is_not_applicable() {
    let out = qalg(&["asym", &corpus("designed")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not applicable"));
}

#[test]
fn designed_equation_solves_to_z() {
    let out = qalg(&["solve", "--exact", &corpus("designed"), "--N", "12"]);
    let v = json(&out);
    let c: Vec<&str> = v["coefficients"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    assert_eq!(c.len(), 13);
    for (n, x) in c.iter().enumerate() {
        assert_eq!(*x, if n == 1 { "1" } else { "0" });
    }
}

fn poch(a: &Rational, b: &Rational, k: u32) -> Rational {
    let mut p = Rational::from(1);
    let mut x = a.clone();
    for _ in 0..k {
        p *= Rational::from(1) - &x;
        x *= b;
    }
    p
}

#[test]
fn jones_matches_direct_sum() {
    let out = qalg(&["solve", "--exact", &corpus("jones"), "--N", "25"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let c = v["coefficients"].as_array().unwrap();
    let q = Rational::from(2);
    let qi = Rational::from((1, 2));
    for n in 0..=25u32 {
        let mut j = Rational::from(if n == 0 { 1 } else { 0 });
        for k in 0..n {
            let a = poch(&qi.clone().pow(n + 1), &qi, k);
            let b = poch(&qi.clone().pow(n - 1), &q, k);
            j += q.clone().pow(n * k) * a * b;
        }
        assert_eq!(c[n as usize].as_str().unwrap(), j.to_string(), "n = {n}");
    }
}

#[test]
fn cfa_parity_structure() {
    let out = qalg(&["solve", &corpus("cfa"), "--N", "390", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut nonzero = 0;
    for line in text.lines().skip(1) {
        let parts: Vec<&str> = line.split(',').collect();
        let n: usize = parts[0].parse().unwrap();
        let (re, im): (f64, f64) = (parts[1].parse().unwrap(), parts[2].parse().unwrap());
        if re == 0.0 && im == 0.0 {
            continue;
        }
        nonzero += 1;
        if n % 2 == 0 {
            assert_eq!(im, 0.0, "n = {n}");
        } else {
            assert_eq!(re, 0.0, "n = {n}");
        }
    }
    assert!(nonzero > 300);
}

#[test]
fn budget_exceeded_exit_code() {
    let out = qalg(&["solve", "--exact", &corpus("drake-b"), "--N", "200", "--budget", "1000"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn corpus_list_has_eight_entries() {
    let v = json(&qalg(&["corpus", "list", "--format", "json"]));
    assert_eq!(v["entries"].as_array().unwrap().len(), 8);
}

#[test]
fn corpus_single_entry_run() {
    let out = qalg(&["corpus", "run", "--entry", "cfa", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 1);
    assert_eq!(entries[0]["id"], "cfa");
}

#[test]
fn unknown_entry_is_a_usage_error() {
    assert_eq!(qalg(&["corpus", "run", "--entry", "nope"]).status.code(), Some(2));
}

#[test]
fn full_corpus_passes() {
    let out = qalg(&["corpus", "run"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn output_is_deterministic() {
    let a = qalg(&["asym", &corpus("drake-b"), "--format", "json"]);
    let b = qalg(&["asym", &corpus("drake-b"), "--format", "json"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
