use conformal_core::curvature::{curvature_suite, obstruction_closed_form, q4, weyl_selfdual_split};
use conformal_core::fg::fg_expand;
use conformal_core::series::TruncatedSeries;
use conformal_core::tensor::MetricJet;
use conformal_core::volume::{
    boundary_variation, default_sweep, q4_integral, q_integral, variation_check, volume_coeffs, volume_report, Grid,
};
use conformal_core::Rational;
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};
use crate::number::{float, BackendScalar};
use crate::report::{header, max_difference, tensor};
use crate::spec::{Backend, MetricSpec, PerturbationSpec};

/// Options shared by every subcommand.
#[derive(Clone, Debug, Default)]
pub struct Options {
    pub backend: Option<Backend>,
    pub degree: Option<usize>,
    pub grid: Option<usize>,
    pub tol: Option<f64>,
    pub dt: f64,
    pub seed: Option<u64>,
}

/// A finished report and, if a comparison failed, why.
pub struct Outcome {
    pub report: Value,
    pub failure: Option<String>,
}

impl Outcome {
    fn ok(report: Map<String, Value>) -> Self {
        Outcome { report: Value::Object(report), failure: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ObstructionPath {
    Fg,
    Closed,
    Both,
}

fn backend(spec: &MetricSpec, opts: &Options) -> Backend {
    let default = if spec.is_fourier() { Backend::Float } else { Backend::Rational };
    opts.backend.or(spec.backend()).unwrap_or(default)
}

fn degree(spec: &MetricSpec, opts: &Options, minimum: usize) -> usize {
    opts.degree.or(spec.degree()).unwrap_or(minimum)
}

fn metric<S: BackendScalar>(spec: &MetricSpec, opts: &Options, minimum: usize) -> CliResult<MetricJet<TruncatedSeries<S>>> {
    spec.series_metric::<S>(degree(spec, opts, minimum), opts.seed)
}

fn series_header(command: &str, spec: &MetricSpec, g_degree: usize, backend: Backend) -> Map<String, Value> {
    let mut m = header(command, spec.dimension(), backend.name());
    m.insert("degree".into(), json!(g_degree));
    m
}

macro_rules! dispatch {
    ($backend:expr, $f:ident($($arg:expr),*)) => {
        match $backend {
            Backend::Rational => $f::<Rational>($($arg),*),
            Backend::Float => $f::<f64>($($arg),*),
        }
    };
}

pub fn report(spec: &MetricSpec, opts: &Options) -> CliResult<Outcome> {
    let b = backend(spec, opts);
    dispatch!(b, report_with(spec, opts, b))
}

fn report_with<S: BackendScalar>(spec: &MetricSpec, opts: &Options, b: Backend) -> CliResult<Outcome> {
    let n = spec.dimension();
    let g = metric::<S>(spec, opts, n.max(4))?;
    let suite = curvature_suite(&g)?;
    let mut out = series_header("report", spec, g.cap(), b);
    let mut base = Map::new();
    let mut missing = Map::new();
    base.insert("metric".into(), tensor(g.g()));
    base.insert("riemann".into(), tensor(suite.riemann()));
    base.insert("ricci".into(), tensor(suite.ricci()));
    base.insert("scalar".into(), suite.scalar().value().to_json());
    base.insert("schouten".into(), tensor(suite.schouten()));
    base.insert("weyl".into(), tensor(suite.weyl()));
    let mut optional = |name: &str, value: CliResult<Value>| match value {
        Ok(v) => {
            base.insert(name.into(), v);
        }
        Err(e) => {
            missing.insert(name.into(), json!(e.to_string()));
        }
    };
    optional("cotton", suite.cotton().map(tensor).map_err(Into::into));
    optional("bach", suite.bach().map(tensor).map_err(Into::into));
    if n == 4 || n == 6 {
        optional("obstruction", obstruction_closed_form(&suite, n).map(|o| tensor(&o)).map_err(Into::into));
    }
    if n == 4 {
        optional("q", q4(&g).map(|q| q.value().to_json()).map_err(Into::into));
        if S::EXACT {
            // Hodge star needs sqrt(det g), which only rational squares provide exactly
            optional(
                "weyl_split",
                weyl_selfdual_split(&suite, 1)
                    .map(|(p, m)| json!({ "self_dual": tensor(&p), "anti_self_dual": tensor(&m) }))
                    .map_err(Into::into),
            );
        }
    }
    out.insert("base_point".into(), Value::Object(base));
    out.insert("unavailable".into(), Value::Object(missing));
    Ok(Outcome::ok(out))
}

pub fn obstruction(spec: &MetricSpec, opts: &Options, path: ObstructionPath) -> CliResult<Outcome> {
    let b = backend(spec, opts);
    dispatch!(b, obstruction_with(spec, opts, b, path))
}

fn obstruction_with<S: BackendScalar>(spec: &MetricSpec, opts: &Options, b: Backend, path: ObstructionPath) -> CliResult<Outcome> {
    let n = spec.dimension();
    let g = metric::<S>(spec, opts, n)?;
    let mut out = series_header("obstruction", spec, g.cap(), b);
    let fg = match path {
        ObstructionPath::Fg | ObstructionPath::Both => Some(fg_expand(&g, n)?.obstruction().truncated(0)),
        ObstructionPath::Closed => None,
    };
    let closed = match path {
        ObstructionPath::Closed | ObstructionPath::Both => Some(obstruction_closed_form(&curvature_suite(&g)?, n)?.truncated(0)),
        ObstructionPath::Fg => None,
    };
    if let Some(o) = &fg {
        out.insert("fg".into(), tensor(o));
    }
    if let Some(o) = &closed {
        out.insert("closed".into(), tensor(o));
    }
    let mut failure = None;
    if let (Some(a), Some(c)) = (&fg, &closed) {
        let diff = max_difference(a, c);
        let equal = if S::EXACT {
            a.minus(c)?.is_zero()
        } else {
            let scale = a.max_abs().max(c.max_abs()).max(1.0);
            diff <= opts.tol.unwrap_or(1e-10) * scale
        };
        out.insert("equal".into(), json!(equal));
        out.insert("max_difference".into(), float(diff));
        if !equal {
            failure = Some(format!("expansion and closed-form obstructions differ by {diff:e}"));
        }
    }
    Ok(Outcome { report: Value::Object(out), failure })
}

pub fn fg_expand_cmd(spec: &MetricSpec, opts: &Options, order: Option<usize>) -> CliResult<Outcome> {
    let b = backend(spec, opts);
    dispatch!(b, fg_with(spec, opts, b, order))
}

fn fg_with<S: BackendScalar>(spec: &MetricSpec, opts: &Options, b: Backend, order: Option<usize>) -> CliResult<Outcome> {
    let n = spec.dimension();
    let g = metric::<S>(spec, opts, n)?;
    let fg = fg_expand(&g, n)?;
    let top = order.unwrap_or(n);
    if top > n {
        return Err(CliError::invalid(format!("--order {top} exceeds the dimension {n}")));
    }
    let mut out = series_header("fg-expand", spec, g.cap(), b);
    let coefficients: Vec<Value> = (0..=top)
        .map(|s| json!({ "order": s, "coefficient": tensor(&fg.coefficient(s).truncated(0)) }))
        .collect();
    out.insert("coefficients".into(), Value::Array(coefficients));
    out.insert("log_coefficient".into(), tensor(&fg.log_coefficient().truncated(0)));
    out.insert("obstruction".into(), tensor(&fg.obstruction().truncated(0)));
    Ok(Outcome::ok(out))
}

fn grid_for(opts: &Options, max_wave: u32) -> Grid {
    opts.grid.map_or_else(|| Grid::default_for(max_wave), Grid::new)
}

fn warnings(w: &[String]) -> Value {
    json!(w)
}

pub fn volume(spec: &MetricSpec, opts: &Options) -> CliResult<Outcome> {
    if spec.is_fourier() {
        let g = spec.fourier_metric()?;
        let n = g.dim();
        let grid = grid_for(opts, g.max_wave());
        let r = volume_report(&g, n, &grid, true)?;
        let mut out = header("volume", n, "float");
        out.insert("grid".into(), json!(grid.points));
        out.insert("grid_points".into(), json!(r.grid_points));
        out.insert("v_integrals".into(), json!(r.v_integrals.iter().map(|&v| float(v)).collect::<Vec<_>>()));
        out.insert("log_coefficient".into(), float(r.log_coefficient));
        out.insert("q_integral".into(), float(r.q_integral));
        out.insert("error_estimate".into(), r.error_estimate.map_or(Value::Null, float));
        out.insert("max_log_term".into(), float(r.max_log_term));
        out.insert("positivity_margin".into(), float(r.positivity_margin));
        out.insert("warnings".into(), warnings(&r.warnings));
        return Ok(Outcome::ok(out));
    }
    let b = backend(spec, opts);
    dispatch!(b, volume_with(spec, opts, b))
}

fn volume_with<S: BackendScalar>(spec: &MetricSpec, opts: &Options, b: Backend) -> CliResult<Outcome> {
    let n = spec.dimension();
    let g = metric::<S>(spec, opts, n)?;
    let v = volume_coeffs(&fg_expand(&g, n)?)?;
    let mut out = series_header("volume", spec, g.cap(), b);
    out.insert("v".into(), Value::Array(v.all().iter().map(BackendScalar::to_json).collect()));
    out.insert("log_term".into(), v.log_term().to_json());
    Ok(Outcome::ok(out))
}

/// Relative agreement, with both sides below `floor` counted as agreement.
fn agree(a: f64, b: f64, tol: f64, floor: f64) -> (bool, f64) {
    let scale = a.abs().max(b.abs());
    let rel = if scale == 0.0 { 0.0 } else { (a - b).abs() / scale };
    (rel <= tol || scale <= floor, rel)
}

pub fn q_check(spec: &MetricSpec, opts: &Options) -> CliResult<Outcome> {
    let g = spec.fourier_metric()?;
    if g.dim() != 4 {
        return Err(CliError::invalid("q-check compares with the pointwise Q-curvature, which needs n = 4"));
    }
    let grid = grid_for(opts, g.max_wave());
    let kl = q_integral(&g, 4, &grid)?;
    let direct = q4_integral(&g, &grid)?;
    let tol = opts.tol.unwrap_or(1e-6);
    let (ok, rel) = agree(kl.value, direct.value, tol, 1e-10);
    let mut out = header("q-check", 4, "float");
    out.insert("grid".into(), json!(grid.points));
    out.insert("k_n_times_log_coefficient".into(), float(kl.value));
    out.insert("q_integral_pointwise".into(), float(direct.value));
    out.insert("relative_difference".into(), float(rel));
    out.insert("tolerance".into(), float(tol));
    out.insert("agree".into(), json!(ok));
    out.insert("warnings".into(), warnings(&kl.warnings));
    let failure = (!ok).then(|| format!("the two paths differ by {rel:e} relative"));
    Ok(Outcome { report: Value::Object(out), failure })
}

pub fn variation(spec: &MetricSpec, h: &PerturbationSpec, opts: &Options, boundary: bool) -> CliResult<Outcome> {
    let g = spec.fourier_metric()?;
    let field = h.field(&g)?;
    let n = g.dim();
    let grid = grid_for(opts, g.max_wave().max(field.max_wave()));
    let r = variation_check(&g, &field, n, &grid, opts.dt)?;
    let tol = opts.tol.unwrap_or(1e-4);
    let (ok, _) = agree(r.q_derivative, r.predicted_derivative, tol, 1e-8);
    let mut out = header("variation", n, "float");
    out.insert("grid".into(), json!(grid.points));
    out.insert("dt".into(), float(opts.dt));
    out.insert("q_samples".into(), json!(r.q_samples.iter().map(|&v| float(v)).collect::<Vec<_>>()));
    out.insert("q_derivative".into(), float(r.q_derivative));
    out.insert("q_derivative_coarse".into(), float(r.q_derivative_coarse));
    out.insert("q_derivative_fine".into(), float(r.q_derivative_fine));
    out.insert("obstruction_pairing".into(), float(r.obstruction_pairing));
    out.insert("predicted_derivative".into(), float(r.predicted_derivative));
    out.insert("log_derivative".into(), float(r.log_derivative));
    out.insert("discrepancy".into(), float(r.discrepancy));
    out.insert("coarse_discrepancy".into(), float(r.coarse_discrepancy));
    out.insert("fine_discrepancy".into(), float(r.fine_discrepancy));
    out.insert("positivity_margin".into(), float(r.positivity_margin));
    out.insert("tolerance".into(), float(tol));
    out.insert("agree".into(), json!(ok));
    let mut notes = r.warnings.clone();
    let mut failure = (!ok).then(|| format!("dQ/dt and the obstruction pairing differ by {:e} relative", r.discrepancy));
    if boundary {
        let f = boundary_variation(&g, &field, n, &default_sweep(), &grid, opts.dt)?;
        let (fit_ok, _) = agree(f.log_coefficient, f.expected, 1e-3, 1e-8);
        out.insert(
            "boundary".into(),
            json!({
                "eps": f.eps.iter().map(|&v| float(v)).collect::<Vec<_>>(),
                "integrals": f.integrals.iter().map(|&v| float(v)).collect::<Vec<_>>(),
                "log_coefficient": float(f.log_coefficient),
                "expected": float(f.expected),
                "discrepancy": float(f.discrepancy),
                "fit_residual": float(f.fit_residual),
                "fit_stability": float(f.fit_stability),
                "agree": fit_ok,
            }),
        );
        notes.extend(f.warnings.iter().cloned());
        if !fit_ok && failure.is_none() {
            failure = Some(format!("boundary log fit differs from the pairing by {:e} relative", f.discrepancy));
        }
    }
    out.insert("warnings".into(), warnings(&notes));
    Ok(Outcome { report: Value::Object(out), failure })
}
