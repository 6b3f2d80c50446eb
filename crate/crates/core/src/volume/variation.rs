//! One-parameter families `g + t h` on the torus: the derivative of `int Q`,
//! its obstruction pairing, and the boundary form of the volume variation.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::fourier::{combine, FourierField, FourierMetric};
use super::quadrature::{for_each_point, metric_sqrt_det, positivity_margin, Grid};
use super::{base_matrix, check_metric, volume_coeffs_in};
use crate::fg::{constants, fg_expand};
use crate::series::Basis;
use crate::tensor::MetricJet;
use crate::{Error, Result};

/// Sign in `gdot^ij = SIGN g^ik g^jl h_kl`.
///
/// This is `+1`: the pairing that matches the derivative of `int Q` raises the
/// indices of `h` with `g^-1`. The derivative of the inverse metric
/// (`-g^ik g^jl h_kl`) gives the opposite sign.
pub const VARIATION_SIGN: f64 = 1.0;

/// Convention string for reports.
pub const VARIATION_CONVENTION: &str = "gdot^ij = +g^ik g^jl h_kl (indices of h raised with g)";

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Central differences at `dt` and `dt/2` and their Richardson combination,
/// from samples at `-dt, -dt/2, 0, dt/2, dt`.
fn derivatives(x: &[f64; 5], dt: f64) -> (f64, f64, f64) {
    let coarse = (x[4] - x[0]) / (2.0 * dt);
    let fine = (x[3] - x[1]) / dt;
    (coarse, fine, (4.0 * fine - coarse) / 3.0)
}

struct Sweep {
    l: [f64; 5],
    /// `int O_ij g^ik g^jl h_kl dv` at `t = 0`.
    raised_pairing: f64,
    boundary: Vec<f64>,
}

/// Per-point expansion data at one `t`: `g_s(0)` for `s = 0..=n` and `r_0(0)`.
type Orders = Vec<DMatrix<f64>>;

fn sweep(g: &FourierMetric, h: &FourierField, n: usize, grid: &Grid, dt: f64, eps: &[f64]) -> Result<Sweep> {
    check_metric(g, n)?;
    if h.dim() != n {
        return Err(Error::Mismatch(format!("perturbation in dimension {} for n = {n}", h.dim())));
    }
    let basis = Basis::new(n, n);
    let line = Basis::new(1, n);
    let ts = [-dt, -0.5 * dt, 0.0, 0.5 * dt, dt];
    let mut l = [0.0; 5];
    let mut raised_pairing = 0.0;
    let mut boundary = vec![0.0; eps.len()];
    for_each_point(n, grid, |p| {
        let gj = g.field().jets(p, &basis, n)?;
        let hj = h.jets(p, &basis, n)?;
        let gv = g.values(p);
        let hv = h.values(p);
        let mut orders: Vec<Orders> = Vec::with_capacity(5);
        for (k, &t) in ts.iter().enumerate() {
            let metric = MetricJet::from_matrix(n, &combine(&gj, &hj, t))?;
            let fg = fg_expand(&metric, n)?;
            let vt: Vec<f64> = gv.iter().zip(&hv).map(|(a, b)| a + t * b).collect();
            let w = metric_sqrt_det(&vt, n)?;
            l[k] += volume_coeffs_in(&fg, &line)?.v(n) * w;
            if t == 0.0 {
                let g0 = DMatrix::from_row_slice(n, n, &gv);
                let gi = g0.clone().try_inverse().ok_or(Error::DegenerateMetric)?;
                let raised = &gi * DMatrix::from_row_slice(n, n, &hv) * &gi;
                let o = DMatrix::from_row_slice(n, n, &base_matrix(fg.obstruction(), n));
                raised_pairing += o.component_mul(&raised).sum() * w;
            }
            if !eps.is_empty() {
                let mut m: Orders = (0..=n)
                    .map(|s| DMatrix::from_row_slice(n, n, &base_matrix(fg.coefficient(s), n)))
                    .collect();
                m.push(DMatrix::from_row_slice(n, n, &base_matrix(fg.log_coefficient(), n)));
                orders.push(m);
            }
        }
        if !eps.is_empty() {
            let dot: Orders = (0..=n + 1)
                .map(|s| {
                    let x = [0, 1, 2, 3, 4].map(|k| orders[k][s].clone());
                    let coarse = (&x[4] - &x[0]) / (2.0 * dt);
                    let fine = (&x[3] - &x[1]) / dt;
                    (fine * 4.0 - coarse) / 3.0
                })
                .collect();
            let w = metric_sqrt_det(&gv, n)?;
            for (b, &e) in boundary.iter_mut().zip(eps) {
                *b += boundary_integrand(&orders[2], &dot, n, e)? * w;
            }
        }
        Ok(())
    })?;
    let wt = grid.weight(n);
    Ok(Sweep {
        l: l.map(|x| x * wt),
        raised_pairing: raised_pairing * wt,
        boundary: boundary.into_iter().map(|b| b * wt).collect(),
    })
}

/// Value and `x`-derivative at `x = e` of `sum_s a_s x^s + r x^n log x`.
fn radial_at(a: &Orders, n: usize, e: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let le = e.ln();
    let mut v = &a[n + 1] * (e.powi(n as i32) * le);
    let mut d = &a[n + 1] * (e.powi(n as i32 - 1) * (n as f64 * le + 1.0));
    for (s, c) in a.iter().take(n + 1).enumerate() {
        v += c * e.powi(s as i32);
        if s > 0 {
            d += c * (s as f64 * e.powi(s as i32 - 1));
        }
    }
    (v, d)
}

/// `(1/2 tr(g^-1 g' g^-1 gdot) + x^-1 tr(g^-1 gdot) - tr(g^-1 gdot')) (det g_x / det g)^(1/2)`
/// at `x = e`; this is the displayed boundary integrand with the derivative of
/// the trace expanded.
fn boundary_integrand(g: &Orders, gdot: &Orders, n: usize, e: f64) -> Result<f64> {
    let (gx, gx1) = radial_at(g, n, e);
    let (hx, hx1) = radial_at(gdot, n, e);
    let a = gx.clone().try_inverse().ok_or(Error::DegenerateMetric)?;
    let agh = &a * &gx1 * &a * &hx;
    let value = 0.5 * agh.trace() + (&a * &hx).trace() / e - (&a * &hx1).trace();
    let ratio = gx.determinant() / g[0].determinant();
    if ratio <= 0.0 {
        return Err(Error::NotPositiveDefinite(format!(" (g_x degenerates at x = {e})")));
    }
    Ok(value * ratio.sqrt())
}

/// Outcome of [`variation_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct VariationReport {
    pub dim: usize,
    /// `dt` and `dt/2`.
    pub steps: [f64; 2],
    /// `int Q dv` at `t = -dt, -dt/2, 0, dt/2, dt`.
    pub q_samples: [f64; 5],
    pub q_derivative_coarse: f64,
    pub q_derivative_fine: f64,
    /// Richardson-extrapolated derivative of `int Q dv`.
    pub q_derivative: f64,
    /// `int O_ij gdot^ij dv`.
    pub obstruction_pairing: f64,
    /// `(-1)^(n/2) (n-2)/2 int O_ij gdot^ij dv`.
    pub predicted_derivative: f64,
    pub log_derivative: f64,
    /// `2 n c_n Ldot`.
    pub scaled_log_derivative: f64,
    pub discrepancy: f64,
    pub coarse_discrepancy: f64,
    pub fine_discrepancy: f64,
    /// Relative difference of `2 n c_n Ldot` and the obstruction pairing.
    pub log_discrepancy: f64,
    /// `k_n / (2 n c_n)` and `(-1)^(n/2) (n-2)/2`.
    pub identity: [f64; 2],
    pub positivity_margin: f64,
    pub warnings: Vec<String>,
}

fn check_family(g: &FourierMetric, h: &FourierField, grid: &Grid, dt: f64) -> Result<f64> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("t-step must be positive, got {dt}")));
    }
    let plus = positivity_margin(&g.perturbed(h, dt)?, grid)?;
    let minus = positivity_margin(&g.perturbed(h, -dt)?, grid)?;
    Ok(positivity_margin(g, grid)?.min(plus).min(minus))
}

fn grid_warnings(g: &FourierMetric, h: &FourierField, grid: &Grid) -> Vec<String> {
    grid.warnings(g.max_wave().max(h.max_wave()))
}

/// Checks `d/dt int Q dv = (-1)^(n/2) (n-2)/2 int O_ij gdot^ij dv` along `g + t h`.
pub fn variation_check(g: &FourierMetric, h: &FourierField, n: usize, grid: &Grid, dt: f64) -> Result<VariationReport> {
    let c = constants::<f64>(n)?;
    let margin = check_family(g, h, grid, dt)?;
    let s = sweep(g, h, n, grid, dt, &[])?;
    let q_samples = s.l.map(|l| c.k * l);
    let (q_derivative_coarse, q_derivative_fine, q_derivative) = derivatives(&q_samples, dt);
    let (_, _, log_derivative) = derivatives(&s.l, dt);
    let obstruction_pairing = VARIATION_SIGN * s.raised_pairing;
    let half = (n / 2) as i32;
    let factor = (-1.0f64).powi(half) * (n as f64 - 2.0) / 2.0;
    let predicted_derivative = factor * obstruction_pairing;
    let scaled_log_derivative = 2.0 * n as f64 * c.c * log_derivative;
    Ok(VariationReport {
        dim: n,
        steps: [dt, 0.5 * dt],
        q_samples,
        q_derivative_coarse,
        q_derivative_fine,
        q_derivative,
        obstruction_pairing,
        predicted_derivative,
        log_derivative,
        scaled_log_derivative,
        discrepancy: relative(q_derivative, predicted_derivative),
        coarse_discrepancy: relative(q_derivative_coarse, predicted_derivative),
        fine_discrepancy: relative(q_derivative_fine, predicted_derivative),
        log_discrepancy: relative(scaled_log_derivative, predicted_derivative),
        identity: [c.k / (2.0 * n as f64 * c.c), factor],
        positivity_margin: margin,
        warnings: grid_warnings(g, h, grid),
    })
}

/// Outcome of [`boundary_variation`].
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryVariation {
    pub eps: Vec<f64>,
    /// `F(e) = int_{x=e} (...) dv_{g_e}`.
    pub integrals: Vec<f64>,
    /// `e^(1-n) F(e) / (2n)`, the derivative of the volume of `{x > e}`.
    pub volume_derivative: Vec<f64>,
    /// Fitted coefficient of `log(1/e)` in the volume derivative.
    pub log_coefficient: f64,
    /// `int O_ij gdot^ij dv / (2 n c_n)`.
    pub expected: f64,
    pub discrepancy: f64,
    /// Relative least-squares residual of the fit.
    pub fit_residual: f64,
    /// Change of the fitted coefficient when one more order is added.
    pub fit_stability: f64,
    pub warnings: Vec<String>,
}

/// Default `e` sweep: 40 points, geometric between `0.05` and `0.5`.
pub fn default_sweep() -> Vec<f64> {
    let (lo, hi, count) = (0.05f64, 0.5f64, 40);
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}

/// Least-squares fit of `F(e)` up to order `top`. Only odd powers occur,
/// since `g_x` is even in `x` below order `n`: columns are `e^k` (`k >= -1`),
/// `e^k log(1/e)` (`k >= n-1`) and `e^k log(1/e)^2` (`k >= 2n-1`). Returns the
/// coefficient of `e^(n-1) log(1/e)` and the relative residual.
fn fit_log(eps: &[f64], values: &[f64], n: usize, top: usize) -> Result<(f64, f64)> {
    let emax = eps.iter().cloned().fold(0.0, f64::max);
    let odd = |from: i32| (from..=top as i32).step_by(2).collect::<Vec<i32>>();
    let columns: Vec<(i32, i32)> = odd(-1)
        .into_iter()
        .map(|k| (k, 0))
        .chain(odd(n as i32 - 1).into_iter().map(|k| (k, 1)))
        .chain(odd(2 * n as i32 - 1).into_iter().map(|k| (k, 2)))
        .collect();
    if eps.len() < columns.len() + 2 {
        return Err(Error::InvalidArgument(format!(
            "{} sweep points cannot fit {} coefficients",
            eps.len(),
            columns.len()
        )));
    }
    let a = DMatrix::from_fn(eps.len(), columns.len(), |r, c| {
        let u = eps[r] / emax;
        let (k, l) = columns[c];
        u.powi(k) * (1.0 / u).ln().powi(l)
    });
    let y = DVector::from_column_slice(values);
    let x = a
        .clone()
        .svd(true, true)
        .solve(&y, 1e-14)
        .map_err(|e| Error::InvalidArgument(format!("least-squares fit failed: {e}")))?;
    let residual = (&a * &x - &y).norm() / y.norm().max(f64::MIN_POSITIVE);
    let target = columns.iter().position(|&c| c == (n as i32 - 1, 1)).expect("log column");
    Ok((x[target] / emax.powi(n as i32 - 1), residual))
}

/// Evaluates the boundary integrand over the sweep and fits the `log(1/e)`
/// coefficient of the volume derivative.
pub fn boundary_variation(
    g: &FourierMetric,
    h: &FourierField,
    n: usize,
    eps: &[f64],
    grid: &Grid,
    dt: f64,
) -> Result<BoundaryVariation> {
    if eps.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::InvalidArgument("sweep values must lie in (0, 1)".into()));
    }
    let c = constants::<f64>(n)?;
    check_family(g, h, grid, dt)?;
    let s = sweep(g, h, n, grid, dt, eps)?;
    let two_n = 2.0 * n as f64;
    let volume_derivative = eps
        .iter()
        .zip(&s.boundary)
        .map(|(e, f)| e.powi(1 - n as i32) * f / two_n)
        .collect();
    let top = 2 * n + 3;
    let (b, fit_residual) = fit_log(eps, &s.boundary, n, top)?;
    let fit_stability = match fit_log(eps, &s.boundary, n, top + 2) {
        Ok((b2, _)) => (b2 - b).abs() / two_n,
        Err(_) => f64::INFINITY,
    };
    let log_coefficient = b / two_n;
    let expected = VARIATION_SIGN * s.raised_pairing / (two_n * c.c);
    let mut warnings = grid_warnings(g, h, grid);
    let scale = log_coefficient.abs().max(expected.abs()).max(1e-300);
    if fit_stability > 1e-3 * scale {
        warnings.push(format!(
            "log fit is unstable (changes by {fit_stability:e} with one more order); shrink the sweep"
        ));
    }
    Ok(BoundaryVariation {
        eps: eps.to_vec(),
        integrals: s.boundary,
        volume_derivative,
        log_coefficient,
        expected,
        discrepancy: relative(log_coefficient, expected),
        fit_residual,
        fit_stability,
        warnings,
    })
}
