//! Volume expansion of the Poincare metric and its log coefficient.
//!
//! [`volume_coeffs`] is generic and exact on the rational backend. The torus
//! drivers ([`log_coefficient`], [`q_integral`], [`variation_check`],
//! [`boundary_variation`]) work in `f64`: they solve the expansion at every
//! point of a periodic grid and sum with the trapezoid rule.

mod fourier;
mod quadrature;
mod variation;

use alloc::sync::Arc;
use alloc::vec::Vec;

pub use fourier::{FieldTerm, FourierField, FourierMetric, FourierSum, FourierTensor, Mode};
pub use quadrature::{integrate_torus, positivity_margin, Grid, Quadrature};
pub use variation::{
    boundary_variation, default_sweep, variation_check, BoundaryVariation, VariationReport, VARIATION_CONVENTION, VARIATION_SIGN,
};

use crate::fg::{constants, fg_expand, FGExpansion};
use crate::series::{invert_scalar_matrix, Basis, TruncatedSeries};
use crate::{curvature, Error, Result, Scalar};

use quadrature::{for_each_point, metric_sqrt_det};

/// Coefficients of `(det g_x / det g)^(1/2) = sum_k v^(k) x^k + (log term) x^n log x`
/// at the base point.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeCoefficients<S> {
    coeffs: Vec<S>,
    log_term: S,
}

impl<S: Scalar> VolumeCoefficients<S> {
    /// `v^(k)` for `k = 0..=n`; odd orders vanish.
    pub fn v(&self, k: usize) -> &S {
        &self.coeffs[k]
    }

    pub fn all(&self) -> &[S] {
        &self.coeffs
    }

    /// `v^(2j)` for `j = 1..=n/2`.
    pub fn even(&self) -> Vec<S> {
        self.coeffs.iter().skip(2).step_by(2).cloned().collect()
    }

    /// Coefficient of `x^n log x`, which is `tr(g^-1 r_0) / 2` and vanishes.
    pub fn log_term(&self) -> &S {
        &self.log_term
    }
}

/// Volume coefficients at the base point of a solved expansion.
pub fn volume_coeffs<S: Scalar>(fg: &FGExpansion<S>) -> Result<VolumeCoefficients<S>> {
    volume_coeffs_in(fg, &Basis::new(1, fg.dim()))
}

fn base_matrix<S: Scalar>(t: &crate::fg::SeriesTensor<S>, n: usize) -> Vec<S> {
    (0..n * n).map(|k| t.value(&[k / n, k % n])).collect()
}

fn mat_mul<S: Scalar>(a: &[S], b: &[S], n: usize) -> Vec<S> {
    let mut out = alloc::vec![S::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            if a[i * n + k].is_zero() {
                continue;
            }
            for j in 0..n {
                let t = a[i * n + k].clone() * b[k * n + j].clone();
                out[i * n + j] += &t;
            }
        }
    }
    out
}

pub(crate) fn volume_coeffs_in<S: Scalar>(fg: &FGExpansion<S>, line: &Arc<Basis>) -> Result<VolumeCoefficients<S>> {
    let n = fg.dim();
    let g0 = base_matrix(fg.coefficient(0), n);
    let g0_inv = invert_scalar_matrix(&g0, n)?;
    // A(x) = g(0)^-1 g_x(0), one series in x per entry
    let orders: Vec<Vec<S>> = (0..=n).map(|s| mat_mul(&g0_inv, &base_matrix(fg.coefficient(s), n), n)).collect();
    let mut a: Vec<TruncatedSeries<S>> = (0..n * n)
        .map(|k| {
            let coeffs = orders.iter().map(|m| m[k].clone()).collect();
            TruncatedSeries::from_coeffs(line, n, coeffs)
        })
        .collect();
    let mut det = TruncatedSeries::one(line, n);
    for k in 0..n {
        let pivot = a[k * n + k].clone();
        let inv = pivot.recip().map_err(|_| Error::DegenerateMetric)?;
        det = &det * &pivot;
        for i in k + 1..n {
            let f = &a[i * n + k] * &inv;
            for j in k + 1..n {
                let t = &f * &a[k * n + j];
                a[i * n + j].sub_assign_series(&t);
            }
        }
    }
    let v = det.sqrt()?;
    let r0 = mat_mul(&g0_inv, &base_matrix(fg.log_coefficient(), n), n);
    let mut log_term = S::zero();
    for i in 0..n {
        log_term += &r0[i * n + i];
    }
    Ok(VolumeCoefficients { coeffs: v.coeffs().to_vec(), log_term: log_term * S::from_ratio(1, 2) })
}

/// Volume of the round unit sphere `S^n` for even `n`:
/// `2^(n+1) pi^(n/2) (n/2)! / n!`.
pub fn sphere_volume(n: usize) -> f64 {
    let half = n / 2;
    let mut v = num_traits::Float::powi(core::f64::consts::PI, half as i32) * num_traits::Float::powi(2.0, n as i32 + 1);
    for k in 1..=half {
        v *= k as f64;
    }
    for k in 1..=n {
        v /= k as f64;
    }
    v
}

/// Integrated volume coefficients on the torus.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeReport {
    pub dim: usize,
    /// `int v^(2j) dv` for `j = 1..=n/2`; the last entry is `L`.
    pub v_integrals: Vec<f64>,
    pub log_coefficient: f64,
    pub q_integral: f64,
    pub grid_points: usize,
    /// Difference against a grid shifted by half a spacing, when requested.
    pub error_estimate: Option<f64>,
    /// Largest `|tr(g^-1 r_0)| / 2` seen over the grid.
    pub max_log_term: f64,
    pub positivity_margin: f64,
    pub warnings: Vec<alloc::string::String>,
}

fn volume_integrals(g: &FourierMetric, n: usize, grid: &Grid) -> Result<(Vec<f64>, f64)> {
    check_metric(g, n)?;
    let basis = Basis::new(n, n);
    let line = Basis::new(1, n);
    let mut sums = alloc::vec![0.0; n / 2];
    let mut max_log: f64 = 0.0;
    for_each_point(n, grid, |p| {
        let jet = g.jet(p, &basis, n)?;
        let vc = volume_coeffs_in(&fg_expand(&jet, n)?, &line)?;
        let w = metric_sqrt_det(&g.values(p), n)?;
        for (j, s) in sums.iter_mut().enumerate() {
            *s += vc.v(2 * j + 2) * w;
        }
        max_log = max_log.max(vc.log_term().abs());
        Ok(())
    })?;
    let wt = grid.weight(n);
    Ok((sums.into_iter().map(|s| s * wt).collect(), max_log))
}

fn check_metric(g: &FourierMetric, n: usize) -> Result<()> {
    if g.dim() != n {
        return Err(Error::Mismatch(alloc::format!("torus metric in dimension {} used with n = {n}", g.dim())));
    }
    Ok(())
}

/// `L = int v^(n) dv` by quadrature of the pointwise expansion.
pub fn log_coefficient(g: &FourierMetric, n: usize, grid: &Grid) -> Result<Quadrature> {
    let (v, _) = volume_integrals(g, n, grid)?;
    Ok(Quadrature { value: v[n / 2 - 1], points: grid.len(n), warnings: grid.warnings(g.max_wave()) })
}

/// `int Q dv = k_n L`.
pub fn q_integral(g: &FourierMetric, n: usize, grid: &Grid) -> Result<Quadrature> {
    let k = constants::<f64>(n)?.k;
    let mut l = log_coefficient(g, n, grid)?;
    l.value *= k;
    Ok(l)
}

/// `int Q dv` from the four-dimensional pointwise Q-curvature formula.
pub fn q4_integral(g: &FourierMetric, grid: &Grid) -> Result<Quadrature> {
    check_metric(g, 4)?;
    let basis = Basis::new(4, 4);
    integrate_torus(|p| Ok(*curvature::q4(&g.jet(p, &basis, 4)?)?.value()), g, grid)
}

/// All volume coefficients, `L`, `int Q` and an optional aliasing estimate.
pub fn volume_report(g: &FourierMetric, n: usize, grid: &Grid, estimate_error: bool) -> Result<VolumeReport> {
    let k = constants::<f64>(n)?.k;
    let margin = positivity_margin(g, grid)?;
    let (v_integrals, max_log_term) = volume_integrals(g, n, grid)?;
    let l = v_integrals[n / 2 - 1];
    let error_estimate = if estimate_error {
        let shifted = grid.clone().with_offset(grid.offset + 0.5 * grid.spacing());
        let (w, _) = volume_integrals(g, n, &shifted)?;
        Some((w[n / 2 - 1] - l).abs())
    } else {
        None
    };
    Ok(VolumeReport {
        dim: n,
        v_integrals,
        log_coefficient: l,
        q_integral: k * l,
        grid_points: grid.len(n),
        error_estimate,
        max_log_term,
        positivity_margin: margin,
        warnings: grid.warnings(g.max_wave()),
    })
}
