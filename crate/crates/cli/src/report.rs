//! JSON report pieces and the plain-text table view.

use conformal_core::fg::constants;
use conformal_core::series::TruncatedSeries;
use conformal_core::tensor::{TensorJet, Variance};
use conformal_core::volume::{VARIATION_CONVENTION, VARIATION_SIGN};
use conformal_core::Rational;
use serde_json::{json, Map, Value};

use crate::number::{float, BackendScalar};

/// Independent components at the base point, in the storage order of the
/// tensor's symmetry class.
pub fn tensor<S: BackendScalar>(t: &TensorJet<TruncatedSeries<S>>) -> Value {
    let variance: Vec<&str> = t
        .variance()
        .iter()
        .map(|v| if *v == Variance::Covariant { "lower" } else { "upper" })
        .collect();
    let components: Vec<Value> = t
        .stored()
        .map(|(idx, c)| json!({ "index": idx, "value": c.value().to_json() }))
        .collect();
    json!({ "variance": variance, "components": components })
}

/// Largest absolute base-point difference between two tensors.
pub fn max_difference<S: BackendScalar>(a: &TensorJet<TruncatedSeries<S>>, b: &TensorJet<TruncatedSeries<S>>) -> f64 {
    a.stored()
        .map(|(idx, c)| (c.value().to_f64() - b.value(idx).to_f64()).abs())
        .fold(0.0, f64::max)
}

/// Sign and normalization conventions shared by every report.
pub fn conventions(n: usize) -> Value {
    let constants = match constants::<Rational>(n) {
        Ok(c) => json!({ "c_n": c.c.to_json(), "k_n": c.k.to_json() }),
        Err(_) => Value::Null,
    };
    json!({
        "riemann": "R_ijkl = g_ik g_jl - g_il g_jk on the unit sphere",
        "ricci": "Ric_jl = g^ik R_ijkl",
        "schouten": "P = (Ric - R g / (2 (n - 1))) / (n - 2)",
        "obstruction": "O = c_n tf(coefficient of x^(n-2) in E_ij), equal to the Bach tensor for n = 4",
        "variation": VARIATION_CONVENTION,
        "variation_sign": float(VARIATION_SIGN),
        "constants": constants,
    })
}

/// Common header of every report.
pub fn header(command: &str, n: usize, backend: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("dimension".into(), json!(n));
    m.insert("backend".into(), json!(backend));
    m.insert("conventions".into(), conventions(n));
    m
}

/// Renders a report as aligned `path  value` lines.
pub fn table(report: &Value) -> String {
    let mut rows = Vec::new();
    flatten(report, String::new(), &mut rows);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        out.push_str(&format!("{k:<width$}  {v}\n"));
    }
    out
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn component_label(v: &Value) -> Option<(String, &Value)> {
    let obj = v.as_object()?;
    if obj.len() != 2 {
        return None;
    }
    let idx = obj.get("index")?.as_array()?;
    let labels: Vec<String> = idx.iter().map(scalar).collect();
    Some((format!("[{}]", labels.join(",")), obj.get("value")?))
}

fn flatten(v: &Value, path: String, rows: &mut Vec<(String, String)>) {
    let join = |key: &str| if path.is_empty() { key.to_string() } else { format!("{path}.{key}") };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(x, join(k), rows);
            }
        }
        Value::Array(items) if items.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let parts: Vec<String> = items.iter().map(scalar).collect();
            rows.push((path, format!("[{}]", parts.join(", "))));
        }
        Value::Array(items) => {
            for (k, x) in items.iter().enumerate() {
                match component_label(x) {
                    Some((label, value)) => flatten(value, format!("{path}{label}"), rows),
                    None => flatten(x, format!("{path}[{k}]"), rows),
                }
            }
        }
        other => rows.push((path, scalar(other))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_labels_components_by_index() {
        let v = json!({ "a": { "components": [{ "index": [0, 1], "value": "1/2" }] }, "b": [1, 2], "c": 3.5 });
        let t = table(&v);
        assert!(t.contains("a.components[0,1]  1/2"));
        assert!(t.contains("b                  [1, 2]"));
        assert!(t.lines().any(|l| l.starts_with('c') && l.ends_with("3.5")));
    }

    #[test]
    fn conventions_carry_constants() {
        let c = conventions(4);
        assert_eq!(c["constants"]["c_n"], json!("2/1"));
        assert_eq!(c["constants"]["k_n"], json!("16/1"));
        assert_eq!(conventions(5)["constants"], Value::Null);
    }
}
