//! Trigonometric fields on the flat torus `[0, 2pi)^n`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use num_traits::Float;

use crate::series::{Basis, TruncatedSeries};
use crate::tensor::MetricJet;
use crate::{Error, Result};

/// One wave `c cos(k.x) + s sin(k.x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mode {
    pub k: Vec<i32>,
    pub cos: f64,
    pub sin: f64,
}

/// A finite real Fourier sum. Modes are kept canonical: wave vectors are
/// distinct, sorted, and their first non-zero entry is positive.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSum {
    dim: usize,
    modes: Vec<Mode>,
}

fn canonical_sign(k: &[i32]) -> i32 {
    k.iter().find(|&&c| c != 0).map_or(0, |c| c.signum())
}

impl FourierSum {
    pub fn zero(dim: usize) -> Self {
        FourierSum { dim, modes: Vec::new() }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::from_modes(dim, vec![Mode { k: vec![0; dim], cos: c, sin: 0.0 }]).expect("valid mode")
    }

    pub fn cos(k: &[i32], amplitude: f64) -> Self {
        Self::from_modes(k.len(), vec![Mode { k: k.to_vec(), cos: amplitude, sin: 0.0 }]).expect("valid mode")
    }

    pub fn sin(k: &[i32], amplitude: f64) -> Self {
        Self::from_modes(k.len(), vec![Mode { k: k.to_vec(), cos: 0.0, sin: amplitude }]).expect("valid mode")
    }

    /// Canonicalizes and merges arbitrary modes.
    pub fn from_modes(dim: usize, modes: Vec<Mode>) -> Result<Self> {
        let mut out: Vec<Mode> = Vec::new();
        for mut m in modes {
            if m.k.len() != dim {
                return Err(Error::Mismatch(format!("wave vector {:?} in dimension {dim}", m.k)));
            }
            if !m.cos.is_finite() || !m.sin.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite coefficient for wave {:?}", m.k)));
            }
            match canonical_sign(&m.k) {
                0 => m.sin = 0.0,
                -1 => {
                    m.k.iter_mut().for_each(|c| *c = -*c);
                    m.sin = -m.sin;
                }
                _ => {}
            }
            match out.binary_search_by(|o| o.k.cmp(&m.k)) {
                Ok(i) => {
                    out[i].cos += m.cos;
                    out[i].sin += m.sin;
                }
                Err(i) => out.insert(i, m),
            }
        }
        out.retain(|m| m.cos != 0.0 || m.sin != 0.0);
        Ok(FourierSum { dim, modes: out })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn is_zero(&self) -> bool {
        self.modes.is_empty()
    }

    /// Largest `|k_i|` over all modes.
    pub fn max_wave(&self) -> u32 {
        self.modes
            .iter()
            .flat_map(|m| m.k.iter().map(|c| c.unsigned_abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let modes = self
            .modes
            .iter()
            .map(|m| Mode { k: m.k.clone(), cos: c * m.cos, sin: c * m.sin })
            .collect();
        Self::from_modes(self.dim, modes).expect("same dimension")
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Self::from_modes(self.dim, self.modes.iter().chain(&other.modes).cloned().collect())
    }

    /// Product, expanded with the angle-addition identities.
    pub fn times(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut modes = Vec::with_capacity(2 * self.modes.len() * other.modes.len());
        for a in &self.modes {
            for b in &other.modes {
                let sum: Vec<i32> = a.k.iter().zip(&b.k).map(|(x, y)| x + y).collect();
                let diff: Vec<i32> = a.k.iter().zip(&b.k).map(|(x, y)| x - y).collect();
                let cc = a.cos * b.cos;
                let ss = a.sin * b.sin;
                let sc = a.sin * b.cos;
                let cs = a.cos * b.sin;
                modes.push(Mode { k: diff, cos: 0.5 * (cc + ss), sin: 0.5 * (sc - cs) });
                modes.push(Mode { k: sum, cos: 0.5 * (cc - ss), sin: 0.5 * (sc + cs) });
            }
        }
        Self::from_modes(self.dim, modes)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Mismatch(format!("Fourier sums in dimensions {} and {}", self.dim, other.dim)));
        }
        Ok(())
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        self.modes
            .iter()
            .map(|m| {
                let th = phase(&m.k, p);
                m.cos * Float::cos(th) + m.sin * Float::sin(th)
            })
            .sum()
    }

    /// Taylor jet at `p` in the shifted coordinates `y = x - p`: the
    /// coefficient of `y^a` in `cos(th + k.y)` is `k^a / a! cos(th + |a| pi/2)`.
    pub fn jet(&self, p: &[f64], basis: &Arc<Basis>, cap: usize) -> TruncatedSeries<f64> {
        let len = basis.count(cap);
        let mut coeffs = vec![0.0; len];
        let mut powers = vec![vec![0.0; cap + 1]; self.dim];
        for m in &self.modes {
            let th = phase(&m.k, p);
            let mut by_degree = [0.0; 4];
            for (r, v) in by_degree.iter_mut().enumerate() {
                let a = th + r as f64 * FRAC_PI_2;
                *v = m.cos * Float::cos(a) + m.sin * Float::sin(a);
            }
            for (v, row) in powers.iter_mut().enumerate() {
                row[0] = 1.0;
                for e in 1..=cap {
                    row[e] = row[e - 1] * m.k[v] as f64 / e as f64;
                }
            }
            for (i, c) in coeffs.iter_mut().enumerate() {
                let ex = basis.exponents(i);
                let mut t = by_degree[basis.degree_of(i) % 4];
                for (v, &e) in ex.iter().enumerate() {
                    t *= powers[v][e as usize];
                }
                *c += t;
            }
        }
        TruncatedSeries::from_coeffs(basis, cap, coeffs)
    }
}

fn phase(k: &[i32], p: &[f64]) -> f64 {
    k.iter().zip(p).map(|(&a, &b)| a as f64 * b).sum()
}

/// A symmetric 2-tensor with Fourier-sum components, upper triangle stored.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierTensor {
    dim: usize,
    upper: Vec<FourierSum>,
}

fn upper_index(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * dim - i * (i + 1) / 2 + j
}

impl FourierTensor {
    pub fn zero(dim: usize) -> Self {
        FourierTensor { dim, upper: vec![FourierSum::zero(dim); dim * (dim + 1) / 2] }
    }

    /// `f delta_ij`.
    pub fn diagonal(f: &FourierSum) -> Self {
        let mut t = Self::zero(f.dim());
        for i in 0..f.dim() {
            t.set(i, i, f.clone());
        }
        t
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&FourierSum::constant(dim, 1.0))
    }

    /// Sets `T_ij` (and `T_ji`).
    pub fn set(&mut self, i: usize, j: usize, f: FourierSum) {
        assert_eq!(f.dim(), self.dim, "component dimension");
        let k = upper_index(self.dim, i, j);
        self.upper[k] = f;
    }

    pub fn with(mut self, i: usize, j: usize, f: FourierSum) -> Self {
        self.set(i, j, f);
        self
    }

    pub fn get(&self, i: usize, j: usize) -> &FourierSum {
        &self.upper[upper_index(self.dim, i, j)]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_wave(&self) -> u32 {
        self.upper.iter().map(FourierSum::max_wave).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().all(FourierSum::is_zero)
    }

    pub fn scaled(&self, c: f64) -> Self {
        FourierTensor { dim: self.dim, upper: self.upper.iter().map(|f| f.scaled(c)).collect() }
    }

    pub fn times_sum(&self, f: &FourierSum) -> Result<Self> {
        Ok(FourierTensor {
            dim: self.dim,
            upper: self.upper.iter().map(|u| u.times(f)).collect::<Result<_>>()?,
        })
    }
}

/// One summand `e^(2 upsilon) T` of a [`FourierField`].
#[derive(Clone, Debug, PartialEq)]
pub struct FieldTerm {
    pub conformal: Option<FourierSum>,
    pub tensor: FourierTensor,
}

/// A symmetric 2-tensor field on the torus, `sum_a e^(2 upsilon_a) T_a`.
///
/// The exponential factors keep conformal rescalings exact: jets of
/// `e^(2 upsilon)` are taken by series exponentiation of the jet of `upsilon`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierField {
    dim: usize,
    terms: Vec<FieldTerm>,
}

impl FourierField {
    pub fn zero(dim: usize) -> Self {
        FourierField { dim, terms: Vec::new() }
    }

    pub fn from_tensor(t: FourierTensor) -> Self {
        FourierField { dim: t.dim(), terms: vec![FieldTerm { conformal: None, tensor: t }] }
    }

    pub fn from_terms(dim: usize, terms: Vec<FieldTerm>) -> Result<Self> {
        for t in &terms {
            if t.tensor.dim() != dim || t.conformal.as_ref().is_some_and(|u| u.dim() != dim) {
                return Err(Error::Mismatch(format!("field term in the wrong dimension for n = {dim}")));
            }
        }
        Ok(FourierField { dim, terms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[FieldTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.tensor.is_zero())
    }

    pub fn max_wave(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.tensor.max_wave().max(t.conformal.as_ref().map_or(0, FourierSum::max_wave)))
            .max()
            .unwrap_or(0)
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Mismatch(format!("fields in dimensions {} and {}", self.dim, other.dim)));
        }
        let terms = self.terms.iter().chain(&other.terms).cloned().collect();
        Ok(FourierField { dim: self.dim, terms })
    }

    pub fn scaled(&self, c: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| FieldTerm { conformal: t.conformal.clone(), tensor: t.tensor.scaled(c) })
            .collect();
        FourierField { dim: self.dim, terms }
    }

    /// `phi` times the field.
    pub fn times_sum(&self, phi: &FourierSum) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|t| Ok(FieldTerm { conformal: t.conformal.clone(), tensor: t.tensor.times_sum(phi)? }))
            .collect::<Result<_>>()?;
        Ok(FourierField { dim: self.dim, terms })
    }

    /// `e^(2 upsilon)` times the field.
    pub fn conformally_rescaled(&self, upsilon: &FourierSum) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let conformal = match &t.conformal {
                    Some(u) => u.plus(upsilon)?,
                    None => upsilon.clone(),
                };
                Ok(FieldTerm { conformal: Some(conformal), tensor: t.tensor.clone() })
            })
            .collect::<Result<_>>()?;
        Ok(FourierField { dim: self.dim, terms })
    }

    /// Row-major component values at `p`.
    pub fn values(&self, p: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for t in &self.terms {
            let f = t.conformal.as_ref().map_or(1.0, |u| Float::exp(2.0 * u.eval(p)));
            for i in 0..n {
                for j in i..n {
                    let v = f * t.tensor.get(i, j).eval(p);
                    out[i * n + j] += v;
                    if i != j {
                        out[j * n + i] += v;
                    }
                }
            }
        }
        out
    }

    /// Row-major component jets at `p` in the coordinates `y = x - p`.
    pub fn jets(&self, p: &[f64], basis: &Arc<Basis>, cap: usize) -> Result<Vec<TruncatedSeries<f64>>> {
        let n = self.dim;
        let zero = TruncatedSeries::zero(basis, cap);
        let mut out = vec![zero; n * n];
        for t in &self.terms {
            let factor = match &t.conformal {
                Some(u) => Some(u.jet(p, basis, cap).scale(&2.0).exp()?),
                None => None,
            };
            for i in 0..n {
                for j in i..n {
                    let c = t.tensor.get(i, j);
                    if c.is_zero() {
                        continue;
                    }
                    let jet = c.jet(p, basis, cap);
                    match &factor {
                        Some(f) => out[i * n + j].add_product(f, &jet),
                        None => out[i * n + j].add_assign_series(&jet),
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                out[i * n + j] = out[j * n + i].clone();
            }
        }
        Ok(out)
    }
}

/// A trigonometric Riemannian metric on the torus.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierMetric {
    field: FourierField,
}

impl FourierMetric {
    /// Wraps a field. Positivity is checked on a grid by
    /// [`positivity_margin`](super::positivity_margin) when the metric is used.
    pub fn new(field: FourierField) -> Self {
        FourierMetric { field }
    }

    pub fn flat(dim: usize) -> Self {
        Self::new(FourierField::from_tensor(FourierTensor::identity(dim)))
    }

    /// `e^(2 upsilon) delta`.
    pub fn conformally_flat(upsilon: &FourierSum) -> Self {
        Self::flat(upsilon.dim()).conformally_rescaled(upsilon).expect("same dimension")
    }

    pub fn from_tensor(t: FourierTensor) -> Self {
        Self::new(FourierField::from_tensor(t))
    }

    pub fn field(&self) -> &FourierField {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn max_wave(&self) -> u32 {
        self.field.max_wave()
    }

    pub fn conformally_rescaled(&self, upsilon: &FourierSum) -> Result<Self> {
        Ok(Self::new(self.field.conformally_rescaled(upsilon)?))
    }

    /// `g + t h`.
    pub fn perturbed(&self, h: &FourierField, t: f64) -> Result<Self> {
        Ok(Self::new(self.field.plus(&h.scaled(t))?))
    }

    /// The conformal direction `phi g`.
    pub fn conformal_direction(&self, phi: &FourierSum) -> Result<FourierField> {
        self.field.times_sum(phi)
    }

    pub fn values(&self, p: &[f64]) -> Vec<f64> {
        self.field.values(p)
    }

    /// Metric jet at `p` of degree cap `cap`.
    pub fn jet(&self, p: &[f64], basis: &Arc<Basis>, cap: usize) -> Result<MetricJet<TruncatedSeries<f64>>> {
        MetricJet::from_matrix(self.dim(), &self.field.jets(p, basis, cap)?)
    }
}

/// Jets of `g + t h` from precomputed jets of `g` and `h`.
pub(crate) fn combine(g: &[TruncatedSeries<f64>], h: &[TruncatedSeries<f64>], t: f64) -> Vec<TruncatedSeries<f64>> {
    g.iter()
        .zip(h)
        .map(|(a, b)| {
            let mut c = a.clone();
            c.add_scaled(&t, b);
            c
        })
        .collect()
}
