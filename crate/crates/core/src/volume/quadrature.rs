//! Periodic trapezoid quadrature on `[0, 2pi)^n`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_traits::Float;

use super::fourier::FourierMetric;
use crate::{Error, Result};

/// `points` samples per axis at `offset + 2 pi k / points`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub points: usize,
    pub offset: f64,
}

impl Grid {
    pub fn new(points: usize) -> Self {
        Grid { points, offset: 0.0 }
    }

    /// `2K + 1` points with `K` the largest wave number plus two.
    pub fn default_for(max_wave: u32) -> Self {
        Self::new(2 * (max_wave as usize + 2) + 1)
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.points as f64
    }

    /// Total number of points in dimension `dim`.
    pub fn len(&self, dim: usize) -> usize {
        self.points.pow(dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    /// Weight of one point, `(2 pi / N)^dim`.
    pub fn weight(&self, dim: usize) -> f64 {
        Float::powi(self.spacing(), dim as i32)
    }

    /// Aliasing warnings for a metric with the given largest wave number.
    pub fn warnings(&self, max_wave: u32) -> Vec<String> {
        let need = 2 * max_wave as usize + 1;
        if self.points < need {
            vec![format!(
                "grid of {} points per axis is below 2*{max_wave}+1 = {need}; the metric itself is aliased",
                self.points
            )]
        } else {
            Vec::new()
        }
    }
}

/// Calls `f` on every grid point in lexicographic order.
pub(crate) fn for_each_point<F>(dim: usize, grid: &Grid, mut f: F) -> Result<()>
where
    F: FnMut(&[f64]) -> Result<()>,
{
    if grid.points == 0 {
        return Err(Error::InvalidArgument("grid with no points".into()));
    }
    let h = grid.spacing();
    let mut idx = vec![0usize; dim];
    let mut p = vec![grid.offset; dim];
    loop {
        f(&p)?;
        let mut axis = dim;
        loop {
            if axis == 0 {
                return Ok(());
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < grid.points {
                p[axis] = grid.offset + h * idx[axis] as f64;
                break;
            }
            idx[axis] = 0;
            p[axis] = grid.offset;
        }
    }
}

pub(crate) fn metric_sqrt_det(values: &[f64], n: usize) -> Result<f64> {
    let det = DMatrix::from_row_slice(n, n, values).determinant();
    if det <= 0.0 || !det.is_finite() {
        return Err(Error::NotPositiveDefinite(format!(" (determinant {det:e} on the grid)")));
    }
    Ok(Float::sqrt(det))
}

/// Smallest eigenvalue of `g` over the grid; an error if it is not positive.
pub fn positivity_margin(g: &FourierMetric, grid: &Grid) -> Result<f64> {
    let n = g.dim();
    let mut margin = f64::INFINITY;
    for_each_point(n, grid, |p| {
        let m = DMatrix::from_row_slice(n, n, &g.values(p));
        let low = m.symmetric_eigenvalues().min();
        if low.is_nan() || low <= 0.0 {
            return Err(Error::NotPositiveDefinite(format!(" at grid point {p:?} (eigenvalue {low:e})")));
        }
        margin = margin.min(low);
        Ok(())
    })?;
    Ok(margin)
}

/// Result of a torus quadrature.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub points: usize,
    pub warnings: Vec<String>,
}

/// `int f dv_g` by the periodic trapezoid rule.
pub fn integrate_torus<F>(mut f: F, g: &FourierMetric, grid: &Grid) -> Result<Quadrature>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = g.dim();
    let mut sum = 0.0;
    for_each_point(n, grid, |p| {
        sum += f(p)? * metric_sqrt_det(&g.values(p), n)?;
        Ok(())
    })?;
    Ok(Quadrature { value: sum * grid.weight(n), points: grid.len(n), warnings: grid.warnings(g.max_wave()) })
}
