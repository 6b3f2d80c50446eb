//! Metric spec files.

use std::collections::BTreeSet;
use std::path::Path;

use conformal_core::builtin;
use conformal_core::series::{Basis, TruncatedSeries};
use conformal_core::tensor::MetricJet;
use conformal_core::volume::{FourierField, FourierMetric, FourierSum, FourierTensor, Mode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::number::{BackendScalar, Coefficient};

/// Largest dimension and degree cap accepted from a file.
pub const MAX_DIMENSION: usize = 10;
pub const MAX_DEGREE: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Rational,
    Float,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Rational => "rational",
            Backend::Float => "float",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MetricSpec {
    Jet(JetSpec),
    Fourier(FourierSpec),
    Builtin(BuiltinSpec),
}

/// Polynomial jet: `g_ij = sum c y^e` for each listed `i <= j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetSpec {
    pub dimension: usize,
    pub degree: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<Backend>,
    pub components: Vec<JetComponent>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetComponent {
    pub i: usize,
    pub j: usize,
    pub terms: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub exponents: Vec<u32>,
    pub coefficient: Coefficient,
}

/// Trigonometric metric on the torus `[0, 2 pi)^n`, optionally multiplied by
/// `exp(2 conformal_factor)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierSpec {
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<Backend>,
    pub components: Vec<FourierComponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conformal_factor: Option<Vec<ModeSpec>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierComponent {
    pub i: usize,
    pub j: usize,
    pub modes: Vec<ModeSpec>,
}

/// `cos * cos(k.y) + sin * sin(k.y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub k: Vec<i32>,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinName {
    Flat,
    Sphere,
    ConformallyFlat,
    Product,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinSpec {
    pub name: BuiltinName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<Backend>,
    /// Sphere: `delta / (1 + lambda |y|^2)^2`, default `1/4` (unit sphere).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Coefficient>,
    /// Conformally flat: `exp(2 upsilon) delta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upsilon: Option<Vec<Term>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<MetricSpec>>,
    /// Random jet seed; `--seed` overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Perturbation direction `h` for the variation command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PerturbationSpec {
    /// Explicit symmetric field.
    Fourier(FieldSpec),
    /// `h = phi g`.
    Conformal(ConformalSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub dimension: usize,
    pub components: Vec<FourierComponent>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConformalSpec {
    pub dimension: usize,
    pub phi: Vec<ModeSpec>,
}

/// Parses a spec document. Syntax errors report line and column; type and
/// field errors report the JSON path.
pub fn parse_json<T: Decode>(text: &str, origin: &str) -> CliResult<T> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        CliError::invalid(format!("{origin}: line {}, column {}: {e}", e.line(), e.column()))
    })?;
    T::decode(value).map_err(|e| CliError::invalid(format!("{origin}: {e}")))
}

/// Decoding from an already parsed document, keeping the field path in errors.
pub trait Decode: Sized {
    fn decode(value: Value) -> Result<Self, String>;
}

fn decode_plain<T: DeserializeOwned>(value: Value) -> Result<T, String> {
    serde_path_to_error::deserialize(value).map_err(|e| format!("at {}: {}", e.path().clone(), e.into_inner()))
}

fn take_kind(value: &mut Value, kinds: &[&str]) -> Result<String, String> {
    let obj = value.as_object_mut().ok_or("at .: expected an object")?;
    match obj.remove("kind") {
        Some(Value::String(k)) if kinds.contains(&k.as_str()) => Ok(k),
        Some(other) => Err(format!("at kind: unknown kind {other}, expected one of {}", kinds.join(", "))),
        None => Err(format!("at .: missing field `kind`, expected one of {}", kinds.join(", "))),
    }
}

impl Decode for MetricSpec {
    fn decode(mut value: Value) -> Result<Self, String> {
        match take_kind(&mut value, &["jet", "fourier", "builtin"])?.as_str() {
            "jet" => decode_plain(value).map(MetricSpec::Jet),
            "fourier" => decode_plain(value).map(MetricSpec::Fourier),
            _ => {
                let factors = value.as_object_mut().and_then(|o| o.remove("factors"));
                let mut spec: BuiltinSpec = decode_plain(value)?;
                if let Some(Value::Array(items)) = factors {
                    let mut parsed = Vec::with_capacity(items.len());
                    for (k, item) in items.into_iter().enumerate() {
                        parsed.push(
                            MetricSpec::decode(item).map_err(|e| e.replacen("at ", &format!("at factors[{k}]."), 1))?,
                        );
                    }
                    spec.factors = Some(parsed);
                } else if let Some(other) = factors {
                    return Err(format!("at factors: expected an array, found {other}"));
                }
                Ok(MetricSpec::Builtin(spec))
            }
        }
    }
}

impl Decode for PerturbationSpec {
    fn decode(mut value: Value) -> Result<Self, String> {
        match take_kind(&mut value, &["fourier", "conformal"])?.as_str() {
            "fourier" => decode_plain(value).map(PerturbationSpec::Fourier),
            _ => decode_plain(value).map(PerturbationSpec::Conformal),
        }
    }
}

pub fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

pub fn load_metric(path: &Path) -> CliResult<MetricSpec> {
    let spec: MetricSpec = parse_json(&read_file(path)?, &path.display().to_string())?;
    spec.validate().map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    Ok(spec)
}

pub fn load_perturbation(path: &Path) -> CliResult<PerturbationSpec> {
    let spec: PerturbationSpec = parse_json(&read_file(path)?, &path.display().to_string())?;
    spec.validate().map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    Ok(spec)
}

fn check_dimension(n: usize, field: &str) -> Result<(), String> {
    if n == 0 || n > MAX_DIMENSION {
        return Err(format!("{field}: dimension {n} outside 1..={MAX_DIMENSION}"));
    }
    Ok(())
}

fn check_pairs<'a>(n: usize, pairs: impl Iterator<Item = (usize, usize)> + 'a, field: &str) -> Result<(), String> {
    let mut seen = BTreeSet::new();
    for (k, (i, j)) in pairs.enumerate() {
        if i >= n || j >= n {
            return Err(format!("{field}[{k}]: index ({i}, {j}) out of range for dimension {n}"));
        }
        if !seen.insert((i.min(j), i.max(j))) {
            return Err(format!("{field}[{k}]: component ({i}, {j}) given twice"));
        }
    }
    Ok(())
}

fn check_terms(terms: &[Term], n: usize, degree: usize, field: &str) -> Result<(), String> {
    let mut seen = BTreeSet::new();
    for (k, t) in terms.iter().enumerate() {
        if t.exponents.len() != n {
            return Err(format!("{field}[{k}].exponents: {} entries for dimension {n}", t.exponents.len()));
        }
        let d = total_degree(&t.exponents);
        if d > degree as u64 {
            return Err(format!("{field}[{k}].exponents: total degree {d} above the cap {degree}"));
        }
        if !seen.insert(&t.exponents) {
            return Err(format!("{field}[{k}].exponents: monomial repeated"));
        }
    }
    Ok(())
}

fn total_degree(e: &[u32]) -> u64 {
    e.iter().map(|&x| x as u64).sum()
}

fn check_modes(modes: &[ModeSpec], n: usize, field: &str) -> Result<(), String> {
    for (k, m) in modes.iter().enumerate() {
        if m.k.len() != n {
            return Err(format!("{field}[{k}].k: {} entries for dimension {n}", m.k.len()));
        }
        if !m.cos.is_finite() || !m.sin.is_finite() {
            return Err(format!("{field}[{k}]: coefficients must be finite"));
        }
    }
    Ok(())
}

impl MetricSpec {
    pub fn validate(&self) -> Result<(), String> {
        match self {
            MetricSpec::Jet(j) => {
                check_dimension(j.dimension, "dimension")?;
                if j.degree > MAX_DEGREE {
                    return Err(format!("degree: {} above {MAX_DEGREE}", j.degree));
                }
                check_pairs(j.dimension, j.components.iter().map(|c| (c.i, c.j)), "components")?;
                for (k, c) in j.components.iter().enumerate() {
                    check_terms(&c.terms, j.dimension, j.degree, &format!("components[{k}].terms"))?;
                }
            }
            MetricSpec::Fourier(f) => {
                check_dimension(f.dimension, "dimension")?;
                if f.backend == Some(Backend::Rational) {
                    return Err("backend: fourier metrics are float only".into());
                }
                check_pairs(f.dimension, f.components.iter().map(|c| (c.i, c.j)), "components")?;
                for (k, c) in f.components.iter().enumerate() {
                    check_modes(&c.modes, f.dimension, &format!("components[{k}].modes"))?;
                }
                if let Some(u) = &f.conformal_factor {
                    check_modes(u, f.dimension, "conformal_factor")?;
                }
            }
            MetricSpec::Builtin(b) => b.validate()?,
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        match self {
            MetricSpec::Jet(j) => j.dimension,
            MetricSpec::Fourier(f) => f.dimension,
            MetricSpec::Builtin(b) => match b.name {
                BuiltinName::Product => b.factors.iter().flatten().map(MetricSpec::dimension).sum(),
                _ => b.dimension.unwrap_or(0),
            },
        }
    }

    pub fn backend(&self) -> Option<Backend> {
        match self {
            MetricSpec::Jet(j) => j.backend,
            MetricSpec::Fourier(f) => f.backend,
            MetricSpec::Builtin(b) => b.backend,
        }
    }

    /// The degree cap written in the file, if any.
    pub fn degree(&self) -> Option<usize> {
        match self {
            MetricSpec::Jet(j) => Some(j.degree),
            MetricSpec::Fourier(_) => None,
            MetricSpec::Builtin(b) => b.degree,
        }
    }

    pub fn is_fourier(&self) -> bool {
        matches!(self, MetricSpec::Fourier(_))
    }

    /// Builds the torus metric of a fourier spec.
    pub fn fourier_metric(&self) -> CliResult<FourierMetric> {
        let MetricSpec::Fourier(f) = self else {
            return Err(CliError::invalid("this command needs a metric of kind \"fourier\""));
        };
        let n = f.dimension;
        let mut t = FourierTensor::zero(n);
        for c in &f.components {
            t.set(c.i, c.j, fourier_sum(n, &c.modes)?);
        }
        let mut g = FourierMetric::from_tensor(t);
        if let Some(u) = &f.conformal_factor {
            g = g.conformally_rescaled(&fourier_sum(n, u)?)?;
        }
        Ok(g)
    }

    /// The metric jet at the origin with cap `degree`.
    ///
    /// Jet files fix their own cap, and `degree` may only lower it.
    pub fn series_metric<S: BackendScalar>(&self, degree: usize, seed: Option<u64>) -> CliResult<MetricJet<TruncatedSeries<S>>> {
        if degree > MAX_DEGREE {
            return Err(CliError::invalid(format!("degree {degree} above {MAX_DEGREE}")));
        }
        let n = self.dimension();
        let g = match self {
            MetricSpec::Jet(j) => {
                if degree > j.degree {
                    return Err(CliError::invalid(format!(
                        "degree {degree} requested but the jet only carries degree {}",
                        j.degree
                    )));
                }
                let basis = Basis::new(n, degree);
                let zero = TruncatedSeries::<S>::zero(&basis, degree);
                let mut m = vec![zero; n * n];
                for c in &j.components {
                    let s = series(&basis, degree, &c.terms)?;
                    m[c.i * n + c.j] = s.clone();
                    m[c.j * n + c.i] = s;
                }
                MetricJet::from_matrix(n, &m)
            }
            MetricSpec::Fourier(_) => {
                if S::EXACT {
                    return Err(CliError::invalid("fourier metrics are float only; use --backend float"));
                }
                let g = self.fourier_metric()?;
                let jet = g.jet(&vec![0.0; n], &Basis::new(n, degree), degree)?;
                let m: Vec<_> = (0..n * n)
                    .map(|k| jet.g().get(&[k / n, k % n]).map_coeffs(|c| S::from_f64(*c).unwrap_or_else(S::zero)))
                    .collect();
                MetricJet::from_matrix(n, &m)
            }
            MetricSpec::Builtin(b) => b.build(degree, seed),
        };
        g.map_err(|e| match e {
            conformal_core::Error::NotPositiveDefinite(_) | conformal_core::Error::DegenerateMetric => {
                CliError::invalid(format!("metric rejected: {e}"))
            }
            other => other.into(),
        })
    }
}

/// The terms of degree at most `cap` as a series.
fn series<S: BackendScalar>(basis: &std::sync::Arc<Basis>, cap: usize, terms: &[Term]) -> conformal_core::Result<TruncatedSeries<S>> {
    let owned: Vec<(Vec<u32>, S)> = terms
        .iter()
        .filter(|t| total_degree(&t.exponents) <= cap as u64)
        .map(|t| (t.exponents.clone(), t.coefficient.to_scalar::<S>()))
        .collect();
    TruncatedSeries::from_terms(basis, cap, owned.iter().map(|(e, c)| (e.as_slice(), c.clone())))
}

pub fn fourier_sum(n: usize, modes: &[ModeSpec]) -> CliResult<FourierSum> {
    let modes = modes.iter().map(|m| Mode { k: m.k.clone(), cos: m.cos, sin: m.sin }).collect();
    Ok(FourierSum::from_modes(n, modes)?)
}

impl BuiltinSpec {
    fn validate(&self) -> Result<(), String> {
        let needs = |field: &str, present: bool| {
            if present {
                Ok(())
            } else {
                Err(format!("{field}: required for builtin {:?}", self.name))
            }
        };
        let forbids = |field: &str, present: bool| {
            if present {
                Err(format!("{field}: not used by builtin {:?}", self.name))
            } else {
                Ok(())
            }
        };
        if let Some(d) = self.degree {
            if d > MAX_DEGREE {
                return Err(format!("degree: {d} above {MAX_DEGREE}"));
            }
        }
        match self.name {
            BuiltinName::Product => {
                forbids("dimension", self.dimension.is_some())?;
                let factors = self.factors.as_deref().unwrap_or_default();
                if factors.len() < 2 {
                    return Err("factors: a product needs at least two factors".into());
                }
                for (k, f) in factors.iter().enumerate() {
                    if f.is_fourier() {
                        return Err(format!("factors[{k}]: fourier metrics cannot be factors"));
                    }
                    f.validate().map_err(|e| format!("factors[{k}].{e}"))?;
                }
                check_dimension(self.dimension_of_product(), "factors")?;
            }
            _ => {
                needs("dimension", self.dimension.is_some())?;
                check_dimension(self.dimension.unwrap_or(0), "dimension")?;
                forbids("factors", self.factors.is_some())?;
            }
        }
        forbids("lambda", self.lambda.is_some() && self.name != BuiltinName::Sphere)?;
        forbids("seed", self.seed.is_some() && self.name != BuiltinName::Random)?;
        match self.name {
            BuiltinName::ConformallyFlat => {
                needs("upsilon", self.upsilon.is_some())?;
                let n = self.dimension.unwrap_or(0);
                check_terms(self.upsilon.as_deref().unwrap_or_default(), n, MAX_DEGREE, "upsilon")?;
            }
            _ => forbids("upsilon", self.upsilon.is_some())?,
        }
        Ok(())
    }

    fn dimension_of_product(&self) -> usize {
        self.factors.iter().flatten().map(MetricSpec::dimension).sum()
    }

    fn build<S: BackendScalar>(&self, degree: usize, seed: Option<u64>) -> conformal_core::Result<MetricJet<TruncatedSeries<S>>> {
        let n = self.dimension.unwrap_or(0);
        match self.name {
            BuiltinName::Flat => builtin::flat(n, degree),
            BuiltinName::Sphere => {
                let lambda = self.lambda.as_ref().map_or(S::from_ratio(1, 4), Coefficient::to_scalar::<S>);
                builtin::sphere(n, degree, lambda)
            }
            BuiltinName::ConformallyFlat => {
                let upsilon = series(&Basis::new(n, degree), degree, self.upsilon.as_deref().unwrap_or_default())?;
                builtin::conformally_flat(n, &upsilon)
            }
            BuiltinName::Product => {
                let factors = self.factors.as_deref().unwrap_or_default();
                let build = |f: &MetricSpec| match f {
                    MetricSpec::Jet(j) if degree > j.degree => Err(conformal_core::Error::InsufficientDegree {
                        operation: "product factor",
                        required: degree,
                        available: j.degree,
                    }),
                    MetricSpec::Jet(_) | MetricSpec::Builtin(_) => {
                        f.series_metric::<S>(degree, seed).map_err(|e| conformal_core::Error::InvalidArgument(e.to_string()))
                    }
                    MetricSpec::Fourier(_) => Err(conformal_core::Error::InvalidArgument("fourier factor".into())),
                };
                let mut g = build(&factors[0])?;
                for f in &factors[1..] {
                    g = builtin::product(&g, &build(f)?)?;
                }
                Ok(g)
            }
            BuiltinName::Random => {
                let seed = seed.or(self.seed).unwrap_or(0);
                builtin::random(n, degree, &mut ChaCha8Rng::seed_from_u64(seed))
            }
        }
    }
}

impl PerturbationSpec {
    pub fn validate(&self) -> Result<(), String> {
        match self {
            PerturbationSpec::Fourier(f) => {
                check_dimension(f.dimension, "dimension")?;
                check_pairs(f.dimension, f.components.iter().map(|c| (c.i, c.j)), "components")?;
                for (k, c) in f.components.iter().enumerate() {
                    check_modes(&c.modes, f.dimension, &format!("components[{k}].modes"))?;
                }
            }
            PerturbationSpec::Conformal(c) => {
                check_dimension(c.dimension, "dimension")?;
                check_modes(&c.phi, c.dimension, "phi")?;
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        match self {
            PerturbationSpec::Fourier(f) => f.dimension,
            PerturbationSpec::Conformal(c) => c.dimension,
        }
    }

    /// The field `h` for the background `g`.
    pub fn field(&self, g: &FourierMetric) -> CliResult<FourierField> {
        let n = self.dimension();
        if n != g.dim() {
            return Err(CliError::invalid(format!("perturbation has dimension {n}, metric has {}", g.dim())));
        }
        match self {
            PerturbationSpec::Fourier(f) => {
                let mut t = FourierTensor::zero(n);
                for c in &f.components {
                    t.set(c.i, c.j, fourier_sum(n, &c.modes)?);
                }
                Ok(FourierField::from_tensor(t))
            }
            PerturbationSpec::Conformal(c) => Ok(g.conformal_direction(&fourier_sum(n, &c.phi)?)?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip(text: &str) -> MetricSpec {
        let spec: MetricSpec = parse_json(text, "test").unwrap();
        spec.validate().unwrap();
        let again: MetricSpec = parse_json(&serde_json::to_string(&spec).unwrap(), "test").unwrap();
        assert_eq!(spec, again);
        spec
    }

    #[test]
    fn specs_round_trip() {
        round_trip(r#"{"kind": "builtin", "name": "sphere", "dimension": 4, "lambda": 0.25}"#);
        round_trip(r#"{"kind": "builtin", "name": "random", "dimension": 3, "seed": 9, "backend": "float"}"#);
        round_trip(
            r#"{"kind": "builtin", "name": "conformally-flat", "dimension": 2,
                "upsilon": [{"exponents": [1, 1], "coefficient": "1/3"}]}"#,
        );
        let jet = r#"{"kind": "jet", "dimension": 2, "degree": 2, "components": [
            {"i": 0, "j": 0, "terms": [{"exponents": [0, 0], "coefficient": 1}]},
            {"i": 0, "j": 1, "terms": [{"exponents": [1, 0], "coefficient": "-2.5e-1"}]},
            {"i": 1, "j": 1, "terms": [{"exponents": [0, 0], "coefficient": "1"}]}]}"#;
        round_trip(jet);
        round_trip(&format!(r#"{{"kind": "builtin", "name": "product", "factors": [{jet}, {jet}]}}"#));
        round_trip(
            r#"{"kind": "fourier", "dimension": 2, "components": [
                {"i": 0, "j": 0, "modes": [{"k": [0, 0], "cos": 1.0}, {"k": [1, -1], "sin": 0.1}]},
                {"i": 1, "j": 1, "modes": [{"k": [0, 0], "cos": 1.0}]}],
                "conformal_factor": [{"k": [0, 2], "cos": 0.3}]}"#,
        );
    }

    #[test]
    fn validation_names_the_field() {
        let bad = |text: &str| {
            let spec: MetricSpec = parse_json(text, "test").unwrap();
            spec.validate().unwrap_err()
        };
        let e = bad(r#"{"kind": "jet", "dimension": 2, "degree": 1, "components": [
            {"i": 0, "j": 0, "terms": [{"exponents": [2, 0], "coefficient": 1}]}]}"#);
        assert!(e.starts_with("components[0].terms[0].exponents"), "{e}");
        let e = bad(r#"{"kind": "jet", "dimension": 2, "degree": 1, "components": [
            {"i": 0, "j": 1, "terms": []}, {"i": 1, "j": 0, "terms": []}]}"#);
        assert!(e.contains("given twice"), "{e}");
        let e = bad(r#"{"kind": "builtin", "name": "sphere"}"#);
        assert!(e.starts_with("dimension"), "{e}");
        let e = bad(r#"{"kind": "builtin", "name": "flat", "dimension": 2, "lambda": 1}"#);
        assert!(e.starts_with("lambda"), "{e}");
        let e = bad(r#"{"kind": "fourier", "dimension": 2, "backend": "rational", "components": []}"#);
        assert!(e.starts_with("backend"), "{e}");
        let e = bad(r#"{"kind": "fourier", "dimension": 2, "components": [{"i": 0, "j": 0, "modes": [{"k": [1]}]}]}"#);
        assert!(e.starts_with("components[0].modes[0].k"), "{e}");
    }

    #[test]
    fn parse_errors_carry_path_and_position() {
        let err = parse_json::<MetricSpec>("{\"kind\": \"jet\",\n\"dimension\": }", "f.json").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("f.json") && msg.contains("line 2"), "{msg}");
        assert_eq!(err.exit_code(), 1);
        let msg = parse_json::<MetricSpec>(r#"{"kind": "jet", "dimension": "four"}"#, "f.json").unwrap_err().to_string();
        assert!(msg.contains("at dimension"), "{msg}");
        let msg = parse_json::<MetricSpec>(r#"{"kind": "torus"}"#, "f.json").unwrap_err().to_string();
        assert!(msg.contains("unknown kind"), "{msg}");
        let text = r#"{"kind": "builtin", "name": "product", "factors": [
            {"kind": "builtin", "name": "flat", "dimension": 2},
            {"kind": "builtin", "name": "sphere", "dimension": 2, "lamda": 1}]}"#;
        let msg = parse_json::<MetricSpec>(text, "f.json").unwrap_err().to_string();
        assert!(msg.contains("at factors[1]") && msg.contains("lamda"), "{msg}");
    }

    #[test]
    fn jets_build_on_both_backends() {
        let spec = round_trip(r#"{"kind": "builtin", "name": "sphere", "dimension": 3}"#);
        let q = spec.series_metric::<conformal_core::Rational>(2, None).unwrap();
        let f = spec.series_metric::<f64>(2, None).unwrap();
        assert_eq!(q.cap(), 2);
        assert_eq!(f.g().value(&[0, 0]), 1.0);
        let torus = round_trip(r#"{"kind": "fourier", "dimension": 1, "components": [{"i": 0, "j": 0, "modes": [{"k": [0], "cos": 2.0}]}]}"#);
        assert!(torus.series_metric::<conformal_core::Rational>(2, None).is_err());
        assert_eq!(torus.series_metric::<f64>(2, None).unwrap().g().value(&[0, 0]), 2.0);
    }
}
