//! Truncated Taylor-series arithmetic.
//!
//! [`TruncatedSeries`] is the coefficient type of every tensor component in the
//! crate. [`RadialSeries`] adds a distinguished radial variable `x` and allows
//! a single power of `log x`, which is what the Poincare-metric expansion
//! needs. Both implement [`Jet`], the ring interface the tensor and curvature
//! code is generic over.

mod basis;
mod radial;
mod truncated;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;

pub use basis::Basis;
pub use radial::RadialSeries;
pub use truncated::TruncatedSeries;

use crate::{Error, Result, Scalar};

/// A commutative ring of jets with spatial partial derivatives.
///
/// Arithmetic truncates at the smallest participating degree cap; `partial`
/// lowers the cap by one. Operations panic if the operands live in different
/// numbers of variables, as slicing does on mismatched lengths; the checked
/// `try_*` methods of [`TruncatedSeries`] return [`Error::Mismatch`] instead.
pub trait Jet: Clone + Debug + PartialEq + Send + Sync + 'static {
    type Scalar: Scalar;

    fn zero_like(&self) -> Self;
    fn constant_like(&self, c: Self::Scalar) -> Self;
    fn cap(&self) -> usize;
    fn truncated(&self, cap: usize) -> Self;
    /// Constant term (regular part at the origin).
    fn value(&self) -> Self::Scalar;
    fn is_zero(&self) -> bool;
    fn is_negligible(&self, tol: f64) -> bool;
    fn max_abs(&self) -> f64;

    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn scaled(&self, c: &Self::Scalar) -> Self;
    fn negated(&self) -> Self {
        self.scaled(&-<Self::Scalar as num_traits::One>::one())
    }

    fn add_assign_jet(&mut self, other: &Self);
    fn sub_assign_jet(&mut self, other: &Self);
    fn add_scaled_jet(&mut self, c: &Self::Scalar, other: &Self);
    fn add_product(&mut self, a: &Self, b: &Self);
    fn sub_product(&mut self, a: &Self, b: &Self);

    /// Partial derivative in spatial coordinate `var`.
    fn partial(&self, var: usize) -> Result<Self>;

    /// Inverse of a row-major `n x n` matrix whose constant term is invertible.
    fn invert_matrix(m: &[Self], n: usize) -> Result<Vec<Self>>;
}

impl<S: Scalar> Jet for TruncatedSeries<S> {
    type Scalar = S;

    fn zero_like(&self) -> Self {
        TruncatedSeries::zero(self.basis(), self.cap())
    }
    fn constant_like(&self, c: S) -> Self {
        TruncatedSeries::constant(self.basis(), self.cap(), c)
    }
    fn cap(&self) -> usize {
        TruncatedSeries::cap(self)
    }
    fn truncated(&self, cap: usize) -> Self {
        self.truncate(cap)
    }
    fn value(&self) -> S {
        TruncatedSeries::value(self).clone()
    }
    fn is_zero(&self) -> bool {
        TruncatedSeries::is_zero(self)
    }
    fn is_negligible(&self, tol: f64) -> bool {
        TruncatedSeries::is_negligible(self, tol)
    }
    fn max_abs(&self) -> f64 {
        TruncatedSeries::max_abs(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn scaled(&self, c: &S) -> Self {
        self.scale(c)
    }
    fn add_assign_jet(&mut self, other: &Self) {
        self.add_assign_series(other)
    }
    fn sub_assign_jet(&mut self, other: &Self) {
        self.sub_assign_series(other)
    }
    fn add_scaled_jet(&mut self, c: &S, other: &Self) {
        self.add_scaled(c, other)
    }
    fn add_product(&mut self, a: &Self, b: &Self) {
        TruncatedSeries::add_product(self, a, b)
    }
    fn sub_product(&mut self, a: &Self, b: &Self) {
        TruncatedSeries::sub_product(self, a, b)
    }
    fn partial(&self, var: usize) -> Result<Self> {
        TruncatedSeries::partial(self, var)
    }
    fn invert_matrix(m: &[Self], n: usize) -> Result<Vec<Self>> {
        invert_series_matrix(m, n)
    }
}

/// Inverse of a square scalar matrix (row-major) by Gauss-Jordan elimination.
pub fn invert_scalar_matrix<S: Scalar>(m: &[S], n: usize) -> Result<Vec<S>> {
    let mut a = m.to_vec();
    let mut inv = vec![S::zero(); n * n];
    for i in 0..n {
        inv[i * n + i] = S::one();
    }
    for col in 0..n {
        let pivot = if S::EXACT {
            (col..n).find(|&r| !a[r * n + col].is_zero())
        } else {
            (col..n)
                .filter(|&r| !a[r * n + col].is_zero())
                .max_by(|&r, &s| {
                    a[r * n + col]
                        .to_f64()
                        .abs()
                        .partial_cmp(&a[s * n + col].to_f64().abs())
                        .unwrap_or(core::cmp::Ordering::Equal)
                })
        };
        let p = pivot.ok_or(Error::DegenerateMetric)?;
        if p != col {
            for k in 0..n {
                a.swap(p * n + k, col * n + k);
                inv.swap(p * n + k, col * n + k);
            }
        }
        let d = S::one() / a[col * n + col].clone();
        for k in 0..n {
            a[col * n + k] *= &d;
            inv[col * n + k] *= &d;
        }
        for r in 0..n {
            if r == col || a[r * n + col].is_zero() {
                continue;
            }
            let f = a[r * n + col].clone();
            for k in 0..n {
                let t = f.clone() * a[col * n + k].clone();
                a[r * n + k] -= &t;
                let t = f.clone() * inv[col * n + k].clone();
                inv[r * n + k] -= &t;
            }
        }
    }
    Ok(inv)
}

/// Row-major product of two `n x n` jet matrices.
pub fn matrix_product<J: Jet>(a: &[J], b: &[J], n: usize) -> Vec<J> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = a[i * n].zero_like();
            for k in 0..n {
                acc.add_product(&a[i * n + k], &b[k * n + j]);
            }
            out.push(acc);
        }
    }
    out
}

/// Inverse of a matrix of truncated series.
///
/// The constant part is inverted exactly; the remaining degrees follow from
/// the Newton step `X <- X + X (I - G X)`, which doubles the number of correct
/// degrees each pass.
pub fn invert_series_matrix<S: Scalar>(
    m: &[TruncatedSeries<S>],
    n: usize,
) -> Result<Vec<TruncatedSeries<S>>> {
    if m.len() != n * n {
        return Err(Error::Mismatch("matrix length is not n*n".into()));
    }
    let basis = m[0].basis().clone();
    let cap = m.iter().map(|s| s.cap()).min().unwrap_or(0);
    let g0: Vec<S> = m.iter().map(|s| s.value().clone()).collect();
    let inv0 = invert_scalar_matrix(&g0, n)?;
    let mut x: Vec<TruncatedSeries<S>> = inv0
        .into_iter()
        .map(|c| TruncatedSeries::constant(&basis, 0, c))
        .collect();
    let mut done = 0usize;
    while done < cap {
        let next_cap = (2 * done + 1).min(cap);
        let xe: Vec<_> = x.iter().map(|s| s.extend_to(next_cap)).collect();
        let gt: Vec<_> = m.iter().map(|s| s.truncate(next_cap)).collect();
        let gx = matrix_product(&gt, &xe, n);
        let resid: Vec<_> = gx
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let id = if k / n == k % n { S::one() } else { S::zero() };
                &TruncatedSeries::constant(&basis, next_cap, id) - s
            })
            .collect();
        let corr = matrix_product(&xe, &resid, n);
        x = xe.iter().zip(&corr).map(|(a, c)| a + c).collect();
        done = next_cap;
    }
    Ok(x)
}
