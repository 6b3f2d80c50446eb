use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str], files: &[&Path]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_conformal"));
    cmd.args(args);
    for f in files {
        cmd.arg(f);
    }
    cmd.output().unwrap()
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn values(t: &Value) -> Vec<Value> {
    t["components"].as_array().unwrap().iter().map(|c| c["value"].clone()).collect()
}

fn flat_torus() -> String {
    json!({
        "kind": "fourier",
        "dimension": 4,
        "components": (0..4).map(|i| json!({ "i": i, "j": i, "modes": [{ "k": [0, 0, 0, 0], "cos": 1.0 }] })).collect::<Vec<_>>(),
    })
    .to_string()
}

fn trig_torus() -> String {
    let mut comps: Vec<Value> = (0..4).map(|i| json!({ "i": i, "j": i, "modes": [{ "k": [0, 0, 0, 0], "cos": 1.0 }] })).collect();
    comps[0]["modes"].as_array_mut().unwrap().push(json!({ "k": [1, 0, 0, 0], "cos": 0.1 }));
    comps[1]["modes"].as_array_mut().unwrap().push(json!({ "k": [0, 1, 1, 0], "sin": 0.08 }));
    comps.push(json!({ "i": 0, "j": 2, "modes": [{ "k": [0, 0, 0, 1], "cos": 0.05 }] }));
    json!({ "kind": "fourier", "dimension": 4, "components": comps }).to_string()
}

#[test]
fn flat_report_is_zero() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "flat.json", r#"{"kind": "builtin", "name": "flat", "dimension": 4}"#);
    let r = json_of(&run(&["report"], &[&spec]));
    assert_eq!(r["backend"], "rational");
    let base = &r["base_point"];
    for key in ["riemann", "ricci", "schouten", "weyl", "cotton", "bach", "obstruction"] {
        assert!(values(&base[key]).iter().all(|v| v == "0/1"), "{key}");
    }
    assert_eq!(base["scalar"], "0/1");
    assert_eq!(base["q"], "0/1");
    assert_eq!(r["conventions"]["constants"]["c_n"], "2/1");
    assert!(r["conventions"]["variation"].as_str().unwrap().contains("+g^ik g^jl h_kl"));
}

#[test]
fn sphere_scalar_curvature() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "s4.json", r#"{"kind": "builtin", "name": "sphere", "dimension": 4}"#);
    let r = json_of(&run(&["report"], &[&spec]));
    assert_eq!(r["base_point"]["scalar"], "12/1");
    assert_eq!(r["base_point"]["q"], "6/1");
    let f = json_of(&run(&["report", "--backend", "float"], &[&spec]));
    assert_eq!(f["base_point"]["scalar"], json!(12.0));
}

#[test]
fn malformed_input_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let broken = write(&dir, "broken.json", "{\"kind\": \"jet\", \"dimension\": 4,\n \"degree\": }");
    let out = run(&["report"], &[&broken]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let typo = write(&dir, "typo.json", r#"{"kind": "builtin", "name": "sphere", "dimension": 4, "lamda": "1/4"}"#);
    let out = run(&["report"], &[&typo]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lamda"));

    let bad_value = r#"{"kind": "jet", "dimension": 2, "degree": 1, "components": [
        {"i": 0, "j": 0, "terms": [{"exponents": [0, 0], "coefficient": "1/0"}]}]}"#;
    let out = run(&["report"], &[&write(&dir, "bad.json", bad_value)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(err.contains("components[0].terms[0].coefficient"), "{err}");

    let out = run(&["report"], &[&dir.path().join("missing.json")]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["no-such-command"], &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn non_positive_metric_is_rejected() {
    let dir = TempDir::new().unwrap();
    let spec = r#"{"kind": "jet", "dimension": 2, "degree": 2, "components": [
        {"i": 0, "j": 0, "terms": [{"exponents": [0, 0], "coefficient": 1}]},
        {"i": 1, "j": 1, "terms": [{"exponents": [0, 0], "coefficient": "-1/2"}]}]}"#;
    let out = run(&["report"], &[&write(&dir, "neg.json", spec)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("positive definite"));
}

#[test]
fn obstruction_paths() {
    let dir = TempDir::new().unwrap();
    let flat = write(&dir, "flat.json", r#"{"kind": "builtin", "name": "flat", "dimension": 4}"#);
    let r = json_of(&run(&["obstruction", "--path", "fg"], &[&flat]));
    assert!(values(&r["fg"]).iter().all(|v| v == "0/1"));
    assert!(r.get("closed").is_none());

    let random = write(&dir, "random.json", r#"{"kind": "builtin", "name": "random", "dimension": 4}"#);
    let r = json_of(&run(&["obstruction", "--seed", "3"], &[&random]));
    assert_eq!(r["equal"], json!(true));
    assert!(values(&r["fg"]).iter().any(|v| v != "0/1"));
    let f = json_of(&run(&["obstruction", "--backend", "float"], &[&random]));
    assert_eq!(f["equal"], json!(true));

    let s6 = write(&dir, "s6.json", r#"{"kind": "builtin", "name": "sphere", "dimension": 6, "backend": "float"}"#);
    let r = json_of(&run(&["obstruction"], &[&s6]));
    assert_eq!(r["equal"], json!(true));
    assert!(values(&r["fg"]).iter().all(|v| v.as_f64().unwrap().abs() < 1e-12));

    let odd = write(&dir, "odd.json", r#"{"kind": "builtin", "name": "flat", "dimension": 5}"#);
    assert_eq!(run(&["obstruction"], &[&odd]).status.code(), Some(1));
}

#[test]
fn insufficient_degree_is_a_numerical_failure() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "low.json", r#"{"kind": "builtin", "name": "random", "dimension": 4, "degree": 3}"#);
    let out = run(&["obstruction"], &[&spec]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("insufficient degree"));
}

#[test]
fn fg_expand_on_sphere() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "s4.json", r#"{"kind": "builtin", "name": "sphere", "dimension": 4}"#);
    let r = json_of(&run(&["fg-expand"], &[&spec]));
    let coeffs = r["coefficients"].as_array().unwrap();
    assert_eq!(coeffs.len(), 5);
    let g2 = &coeffs[2]["coefficient"]["components"];
    for c in g2.as_array().unwrap() {
        let idx = c["index"].as_array().unwrap();
        let expect = if idx[0] == idx[1] { "-1/2" } else { "0/1" };
        assert_eq!(c["value"], expect);
    }
    assert!(values(&coeffs[4]["coefficient"]).contains(&json!("1/16")));
    let short = json_of(&run(&["fg-expand", "--order", "2"], &[&spec]));
    assert_eq!(short["coefficients"].as_array().unwrap().len(), 3);
    assert_eq!(run(&["fg-expand", "--order", "9"], &[&spec]).status.code(), Some(1));
}

#[test]
fn volume_of_sphere_jet() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "s4.json", r#"{"kind": "builtin", "name": "sphere", "dimension": 4}"#);
    let r = json_of(&run(&["volume"], &[&spec]));
    assert_eq!(r["v"], json!(["1/1", "0/1", "-1/1", "0/1", "3/8"]));
    assert_eq!(r["log_term"], "0/1");
}

#[test]
fn q_check_on_flat_torus() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "torus.json", &flat_torus());
    let r = json_of(&run(&["q-check", "--grid", "3"], &[&spec]));
    assert_eq!(r["k_n_times_log_coefficient"], json!(0.0));
    assert_eq!(r["q_integral_pointwise"], json!(0.0));
    assert_eq!(r["agree"], json!(true));
    let v = json_of(&run(&["volume", "--grid", "3"], &[&spec]));
    assert_eq!(v["log_coefficient"], json!(0.0));
}

#[test]
fn failed_comparison_exits_three() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "torus.json", &trig_torus());
    let out = run(&["q-check", "--grid", "5", "--tol", "0"], &[&spec]);
    assert_eq!(out.status.code(), Some(3));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["agree"], json!(false));
}

#[test]
fn conformal_variation_is_degenerate() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "torus.json", &trig_torus());
    let h = write(&dir, "h.json", r#"{"kind": "conformal", "dimension": 4, "phi": [{"k": [0, 1, 0, 0], "cos": 0.5}]}"#);
    let r = json_of(&run(&["variation", "--grid", "5"], &[&spec, &h]));
    assert!(r["q_derivative"].as_f64().unwrap().abs() < 1e-8);
    assert!(r["predicted_derivative"].as_f64().unwrap().abs() < 1e-8);
    assert_eq!(r["agree"], json!(true));
}

#[test]
fn reports_are_deterministic_and_tabular() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "r.json", r#"{"kind": "builtin", "name": "random", "dimension": 4, "seed": 5}"#);
    let a = run(&["report"], &[&spec]);
    let b = run(&["report"], &[&spec]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let t = run(&["report", "--table"], &[&spec]);
    let text = String::from_utf8(t.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("base_point.scalar ")));
    assert!(text.contains("base_point.metric.components[0,0]"));
    assert_eq!(run(&["report", "--table", "--json"], &[&spec]).status.code(), Some(1));
}

#[test]
fn jet_and_product_specs() {
    let dir = TempDir::new().unwrap();
    // delta + y0^2 (dy1)^2 in two dimensions: Gaussian curvature -1 at the origin
    let jet = r#"{"kind": "jet", "dimension": 2, "degree": 4, "components": [
        {"i": 0, "j": 0, "terms": [{"exponents": [0, 0], "coefficient": 1}]},
        {"i": 1, "j": 1, "terms": [{"exponents": [0, 0], "coefficient": 1}, {"exponents": [2, 0], "coefficient": "1"}]}]}"#;
    let out = run(&["report"], &[&write(&dir, "jet.json", jet)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n >= 3"));
    let product = format!(r#"{{"kind": "builtin", "name": "product", "factors": [{jet}, {jet}]}}"#);
    let path = write(&dir, "prod.json", &product);
    let r = json_of(&run(&["report"], &[&path]));
    assert_eq!(r["dimension"], 4);
    assert_eq!(r["base_point"]["scalar"], "-4/1");
    assert_eq!(run(&["report", "--degree", "6"], &[&path]).status.code(), Some(2));
}
