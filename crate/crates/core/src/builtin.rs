//! Ready-made metric jets at the chart origin.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::series::{Basis, Jet, TruncatedSeries};
use crate::tensor::MetricJet;
use crate::{Error, Result, Scalar};

pub type SeriesMetric<S> = MetricJet<TruncatedSeries<S>>;

fn diagonal<S: Scalar>(dim: usize, f: &TruncatedSeries<S>) -> Result<SeriesMetric<S>> {
    let zero = f.zero_like();
    let m: Vec<_> = (0..dim * dim)
        .map(|k| if k / dim == k % dim { f.clone() } else { zero.clone() })
        .collect();
    MetricJet::from_matrix(dim, &m)
}

/// The Euclidean metric `delta_ij`.
pub fn flat<S: Scalar>(dim: usize, cap: usize) -> Result<SeriesMetric<S>> {
    let basis = Basis::new(dim, cap);
    diagonal(dim, &TruncatedSeries::one(&basis, cap))
}

/// `|y|^2` as a series.
fn radius_squared<S: Scalar>(basis: &alloc::sync::Arc<Basis>, cap: usize) -> TruncatedSeries<S> {
    let mut r2 = TruncatedSeries::zero(basis, cap);
    for i in 0..basis.num_vars() {
        let y = TruncatedSeries::variable(basis, cap, i);
        r2.add_product(&y, &y);
    }
    r2
}

/// The constant-curvature metric `delta / (1 + lambda |y|^2)^2` in
/// stereographic coordinates, which has sectional curvature `4 lambda`, so
/// `Ric = 4 lambda (n - 1) g`. `lambda = 1/4` is the unit sphere.
pub fn sphere<S: Scalar>(dim: usize, cap: usize, lambda: S) -> Result<SeriesMetric<S>> {
    let basis = Basis::new(dim, cap);
    let mut denom = radius_squared(&basis, cap).scale(&lambda);
    denom.add_assign_series(&TruncatedSeries::one(&basis, cap));
    diagonal(dim, &denom.powi(-2)?)
}

/// `e^{2 upsilon} delta`. On the exact backend `upsilon(0)` must vanish.
pub fn conformally_flat<S: Scalar>(dim: usize, upsilon: &TruncatedSeries<S>) -> Result<SeriesMetric<S>> {
    if upsilon.num_vars() != dim {
        return Err(Error::Mismatch(format!(
            "conformal factor in {} variables for dimension {dim}",
            upsilon.num_vars()
        )));
    }
    diagonal(dim, &upsilon.scale(&S::from_i64(2)).exp()?)
}

/// Reindexes a series into a larger variable set starting at `offset`.
fn shift_variables<S: Scalar>(s: &TruncatedSeries<S>, target: &alloc::sync::Arc<Basis>, offset: usize) -> TruncatedSeries<S> {
    let mut exps = vec![0u32; target.num_vars()];
    let terms: Vec<(Vec<u32>, S)> = s
        .terms()
        .map(|(e, c)| {
            exps.iter_mut().for_each(|x| *x = 0);
            for (k, &v) in e.iter().enumerate() {
                exps[offset + k] = v as u32;
            }
            (exps.clone(), c.clone())
        })
        .collect();
    TruncatedSeries::from_terms(target, s.cap(), terms.iter().map(|(e, c)| (e.as_slice(), c.clone())))
        .expect("exponent lengths match")
}

/// The Riemannian product `a x b` (block-diagonal metric).
pub fn product<S: Scalar>(a: &SeriesMetric<S>, b: &SeriesMetric<S>) -> Result<SeriesMetric<S>> {
    let (na, nb) = (a.dim(), b.dim());
    let n = na + nb;
    let cap = a.cap().min(b.cap());
    let basis = Basis::new(n, cap);
    let zero = TruncatedSeries::zero(&basis, cap);
    let mut m = vec![zero; n * n];
    for i in 0..na {
        for j in 0..na {
            m[i * n + j] = shift_variables(&a.g().get(&[i, j]), &basis, 0).truncate(cap);
        }
    }
    for i in 0..nb {
        for j in 0..nb {
            m[(na + i) * n + na + j] = shift_variables(&b.g().get(&[i, j]), &basis, na).truncate(cap);
        }
    }
    MetricJet::from_matrix(n, &m)
}

/// A series with random coefficients `k / denominator`, `|k| <= range`, in
/// every degree from `min_degree` through `cap`.
pub fn random_series<S: Scalar, R: Rng + ?Sized>(
    basis: &alloc::sync::Arc<Basis>,
    cap: usize,
    min_degree: usize,
    range: i64,
    denominator: i64,
    rng: &mut R,
) -> TruncatedSeries<S> {
    let mut s = TruncatedSeries::zero(basis, cap);
    let start = basis.degree_range(min_degree).start;
    for c in s.coeffs_mut()[start..].iter_mut() {
        *c = S::from_ratio(rng.gen_range(-range..=range), denominator);
    }
    s
}

/// A random metric jet with `g(0) = I` and small rational higher
/// coefficients (numerators in `[-2, 2]`, denominator 8).
pub fn random<S: Scalar, R: Rng + ?Sized>(dim: usize, cap: usize, rng: &mut R) -> Result<SeriesMetric<S>> {
    let basis = Basis::new(dim, cap);
    let mut m = vec![TruncatedSeries::zero(&basis, cap); dim * dim];
    for i in 0..dim {
        for j in i..dim {
            let mut s = random_series(&basis, cap, 1, 2, 8, rng);
            if i == j {
                s.add_assign_series(&TruncatedSeries::one(&basis, cap));
            }
            m[i * dim + j] = s.clone();
            m[j * dim + i] = s;
        }
    }
    MetricJet::from_matrix(dim, &m)
}

/// `f * g` for a positive jet `f`.
pub fn rescaled<S: Scalar>(g: &SeriesMetric<S>, f: &TruncatedSeries<S>) -> Result<SeriesMetric<S>> {
    MetricJet::new(g.g().times_jet(f))
}
