use alloc::format;
use alloc::vec::Vec;

use super::{Symmetry, TensorJet, Variance};
use crate::series::Jet;
use crate::{Error, Result, Scalar};

use Variance::{Contravariant, Covariant};

/// A Riemannian metric jet at the chart origin with its inverse and, when the
/// cap allows, Christoffel symbols.
#[derive(Clone, Debug)]
pub struct MetricJet<J: Jet> {
    g: TensorJet<J>,
    g_inv: TensorJet<J>,
    christoffel: Option<TensorJet<J>>,
    christoffel_lower: Option<TensorJet<J>>,
}

/// Signs of the leading principal pivots of a symmetric scalar matrix.
fn positive_definite<S: Scalar>(m: &[S], n: usize) -> core::result::Result<(), String> {
    let mut a = m.to_vec();
    for k in 0..n {
        let p = a[k * n + k].clone();
        if !p.is_positive() {
            return Err(format!("pivot {k} of the base-point metric is {p}"));
        }
        for i in k + 1..n {
            let f = a[i * n + k].clone() / p.clone();
            for j in k..n {
                let t = f.clone() * a[k * n + j].clone();
                a[i * n + j] -= &t;
            }
        }
    }
    Ok(())
}

use alloc::string::String;

impl<J: Jet> MetricJet<J> {
    /// Wraps a covariant rank-2 tensor. The tensor must be symmetric (checked
    /// exactly for exact scalars, to `1e-12` relative otherwise) and positive
    /// definite at the base point.
    pub fn new(g: TensorJet<J>) -> Result<Self> {
        if g.variance() != [Covariant, Covariant] {
            return Err(Error::InvalidArgument(format!("metric must be a covariant 2-tensor, got {}", g.describe())));
        }
        let sym = Symmetry::symmetric(2, 0, 1);
        let g = if *g.symmetry() == sym {
            g
        } else {
            let defect = g.symmetry_defect(&sym);
            let tol = if J::Scalar::EXACT { 0.0 } else { 1e-12 * g.max_abs().max(1.0) };
            if defect > tol {
                return Err(Error::InvalidArgument(format!("metric is not symmetric (defect {defect:e})")));
            }
            g.with_symmetry(sym)?
        };
        let n = g.dim();
        let m: Vec<J> = (0..n * n).map(|k| g.get(&[k / n, k % n])).collect();
        let values: Vec<J::Scalar> = m.iter().map(Jet::value).collect();
        positive_definite(&values, n).map_err(Error::NotPositiveDefinite)?;
        let inv = J::invert_matrix(&m, n)?;
        let g_inv = TensorJet::from_fn(n, &[Contravariant; 2], Symmetry::symmetric(2, 0, 1), g.zero_jet(), |t| {
            Ok(inv[t[0] * n + t[1]].clone())
        })?;
        let (christoffel, christoffel_lower) = if g.cap() >= 1 {
            let (a, b) = christoffel_symbols(&g, &g_inv)?;
            (Some(a), Some(b))
        } else {
            (None, None)
        };
        Ok(MetricJet { g, g_inv, christoffel, christoffel_lower })
    }

    /// A metric from a row-major matrix of jets.
    pub fn from_matrix(dim: usize, m: &[J]) -> Result<Self> {
        Self::new(TensorJet::symmetric_from_matrix(dim, m)?)
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn cap(&self) -> usize {
        self.g.cap()
    }

    /// `g_ij`
    pub fn g(&self) -> &TensorJet<J> {
        &self.g
    }

    /// `g^ij`
    pub fn g_inv(&self) -> &TensorJet<J> {
        &self.g_inv
    }

    /// `Gamma^k_ij`, slots `(k, i, j)`, symmetric in `i, j`.
    pub fn christoffel(&self) -> Result<&TensorJet<J>> {
        self.christoffel.as_ref().ok_or(Error::InsufficientDegree {
            operation: "Christoffel symbols",
            required: 1,
            available: self.cap(),
        })
    }

    /// `Gamma_{k,ij} = (d_i g_jk + d_j g_ik - d_k g_ij) / 2`, slots `(k, i, j)`.
    pub fn christoffel_lower(&self) -> Result<&TensorJet<J>> {
        self.christoffel_lower.as_ref().ok_or(Error::InsufficientDegree {
            operation: "Christoffel symbols",
            required: 1,
            available: self.cap(),
        })
    }

    /// The same metric truncated to a lower cap.
    pub fn truncated(&self, cap: usize) -> Result<Self> {
        Self::new(self.g.truncated(cap))
    }

    /// `det g` as a jet, by cofactor-free Gaussian elimination over the jets.
    pub fn determinant(&self) -> Result<J> {
        let n = self.dim();
        let mut a: Vec<J> = (0..n * n).map(|k| self.g.get(&[k / n, k % n])).collect();
        let mut det = self.g.zero_jet().constant_like(J::Scalar::one());
        for k in 0..n {
            let pivot = a[k * n + k].clone();
            let inv = J::invert_matrix(core::slice::from_ref(&pivot), 1)?.remove(0);
            det = det.times(&pivot);
            for i in k + 1..n {
                let f = a[i * n + k].times(&inv);
                for j in k..n {
                    let t = f.times(&a[k * n + j]);
                    a[i * n + j].sub_assign_jet(&t);
                }
            }
        }
        Ok(det)
    }
}

use num_traits::One;

fn christoffel_symbols<J: Jet>(g: &TensorJet<J>, g_inv: &TensorJet<J>) -> Result<(TensorJet<J>, TensorJet<J>)> {
    let n = g.dim();
    // dg[k][i][j] = d_k g_ij
    let mut dg: Vec<Vec<J>> = Vec::with_capacity(n);
    for k in 0..n {
        dg.push((0..n * n).map(|ij| g.get(&[ij / n, ij % n]).partial(k)).collect::<Result<Vec<_>>>()?);
    }
    let half = J::Scalar::from_ratio(1, 2);
    let sym = Symmetry::symmetric(3, 1, 2);
    let lower = TensorJet::from_fn(n, &[Covariant; 3], sym.clone(), &dg[0][0], |t| {
        let (k, i, j) = (t[0], t[1], t[2]);
        let s = dg[i][j * n + k].plus(&dg[j][i * n + k]).minus(&dg[k][i * n + j]);
        Ok(s.scaled(&half))
    })?;
    let upper = TensorJet::from_fn(n, &[Contravariant, Covariant, Covariant], sym, lower.zero_jet(), |t| {
        let mut acc = lower.zero_jet().clone();
        for m in 0..n {
            lower.accumulate_into(&mut acc, &g_inv.get(&[t[0], m]), &[m, t[1], t[2]], false);
        }
        Ok(acc)
    })?;
    Ok((upper, lower))
}
