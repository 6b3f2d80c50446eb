//! Tensors whose components are jets.
//!
//! A [`TensorJet`] stores one jet per symmetry orbit of index tuples (the
//! lexicographically smallest representative); reads of other tuples apply
//! the orbit's permutation sign. [`MetricJet`] carries a metric, its inverse
//! and Christoffel symbols, and the free functions implement Levi-Civita
//! differentiation, traces and index gymnastics.

mod metric;
mod ops;
mod symmetry;
#[cfg(test)]
mod tests;

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use alloc::format;

pub use metric::MetricJet;
pub use ops::{covariant_derivative, lower_index, raise_index, trace, trace_free_part};
pub use symmetry::{Layout, Symmetry};

use crate::series::Jet;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variance {
    Covariant,
    Contravariant,
}

use Variance::{Contravariant, Covariant};

impl Variance {
    pub fn flipped(self) -> Self {
        match self {
            Covariant => Contravariant,
            Contravariant => Covariant,
        }
    }
}

#[cfg(feature = "std")]
fn layout(dim: usize, symmetry: Symmetry) -> Arc<Layout> {
    use std::collections::HashMap;
    use std::sync::Mutex;
    static CACHE: Mutex<Option<HashMap<(usize, Symmetry), Arc<Layout>>>> = Mutex::new(None);
    let mut guard = CACHE.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .get_or_insert_with(HashMap::new)
        .entry((dim, symmetry.clone()))
        .or_insert_with(|| Arc::new(Layout::new(dim, symmetry)))
        .clone()
}

#[cfg(not(feature = "std"))]
fn layout(dim: usize, symmetry: Symmetry) -> Arc<Layout> {
    Arc::new(Layout::new(dim, symmetry))
}

/// An indexed tensor of jets in dimension `dim`.
#[derive(Clone, Debug)]
pub struct TensorJet<J: Jet> {
    variance: Vec<Variance>,
    layout: Arc<Layout>,
    components: Vec<J>,
    zero: J,
}

impl<J: Jet> TensorJet<J> {
    /// Builds a tensor by evaluating `f` on every canonical index tuple.
    ///
    /// `template` supplies the jet ring (variables and cap) for components
    /// that vanish by symmetry. All components are truncated to the smallest
    /// cap among them.
    pub fn from_fn<F>(dim: usize, variance: &[Variance], symmetry: Symmetry, template: &J, mut f: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> Result<J>,
    {
        if symmetry.rank() != variance.len() {
            return Err(Error::Mismatch(format!(
                "symmetry of rank {} for a tensor of rank {}",
                symmetry.rank(),
                variance.len()
            )));
        }
        let layout = layout(dim, symmetry);
        let components = layout
            .canonical
            .iter()
            .map(|idx| f(idx))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::assemble(variance.to_vec(), layout, components, template.zero_like()))
    }

    fn assemble(variance: Vec<Variance>, layout: Arc<Layout>, mut components: Vec<J>, zero: J) -> Self {
        let cap = components.iter().map(Jet::cap).min().unwrap_or(zero.cap()).min(zero.cap());
        for c in components.iter_mut() {
            if c.cap() > cap {
                *c = c.truncated(cap);
            }
        }
        TensorJet { variance, layout, components, zero: zero.truncated(cap) }
    }

    /// A rank-0 tensor.
    pub fn scalar(dim: usize, value: J) -> Self {
        let zero = value.zero_like();
        Self::assemble(Vec::new(), layout(dim, Symmetry::none(0)), vec![value], zero)
    }

    /// A symmetric covariant 2-tensor from a row-major matrix; only the upper
    /// triangle is read.
    pub fn symmetric_from_matrix(dim: usize, m: &[J]) -> Result<Self> {
        if m.len() != dim * dim || dim == 0 {
            return Err(Error::Mismatch(format!("{} entries for a {dim}x{dim} matrix", m.len())));
        }
        Self::from_fn(dim, &[Covariant; 2], Symmetry::symmetric(2, 0, 1), &m[0], |t| {
            Ok(m[t[0] * dim + t[1]].clone())
        })
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn symmetry(&self) -> &Symmetry {
        &self.layout.symmetry
    }

    pub fn cap(&self) -> usize {
        self.zero.cap()
    }

    /// A zero jet in the components' ring.
    pub fn zero_jet(&self) -> &J {
        &self.zero
    }

    /// Canonical index tuples in storage order, with their components.
    pub fn stored(&self) -> impl Iterator<Item = (&[usize], &J)> + '_ {
        self.layout.canonical.iter().map(|v| v.as_slice()).zip(self.components.iter())
    }

    pub fn num_stored(&self) -> usize {
        self.components.len()
    }

    fn check_index(&self, idx: &[usize]) {
        assert!(
            idx.len() == self.rank() && idx.iter().all(|&i| i < self.dim()),
            "index {idx:?} out of range for a rank-{} tensor in dimension {}",
            self.rank(),
            self.dim()
        );
    }

    /// The stored jet for `idx` and whether it enters negated; `None` when the
    /// component vanishes by symmetry.
    pub fn lookup(&self, idx: &[usize]) -> Option<(&J, bool)> {
        self.check_index(idx);
        self.layout.locate(idx).map(|(s, neg)| (&self.components[s], neg))
    }

    /// Storage slot (position in [`TensorJet::stored`]) and sign of `idx`.
    pub fn locate(&self, idx: &[usize]) -> Option<(usize, bool)> {
        self.check_index(idx);
        self.layout.locate(idx)
    }

    /// The component at `idx` with the symmetry sign applied.
    pub fn get(&self, idx: &[usize]) -> J {
        match self.lookup(idx) {
            None => self.zero.clone(),
            Some((c, false)) => c.clone(),
            Some((c, true)) => c.negated(),
        }
    }

    /// Constant term of the component at `idx`.
    pub fn value(&self, idx: &[usize]) -> J::Scalar {
        self.get(idx).value()
    }

    /// `acc += sign * c * T[idx]` without cloning the component.
    pub(crate) fn accumulate_into(&self, acc: &mut J, c: &J, idx: &[usize], negate: bool) {
        if let Some((t, neg)) = self.lookup(idx) {
            if neg ^ negate {
                acc.sub_product(c, t);
            } else {
                acc.add_product(c, t);
            }
        }
    }

    pub fn map<F: FnMut(&J) -> J>(&self, mut f: F) -> Self {
        let components: Vec<J> = self.components.iter().map(&mut f).collect();
        let zero = f(&self.zero).zero_like();
        Self::assemble(self.variance.clone(), self.layout.clone(), components, zero)
    }

    /// Applies a fallible map to every stored component.
    pub fn try_map<F: FnMut(&J) -> Result<J>>(&self, mut f: F) -> Result<Self> {
        let components: Vec<J> = self.components.iter().map(&mut f).collect::<Result<_>>()?;
        let zero = f(&self.zero)?.zero_like();
        Ok(Self::assemble(self.variance.clone(), self.layout.clone(), components, zero))
    }

    pub fn truncated(&self, cap: usize) -> Self {
        self.map(|c| c.truncated(cap))
    }

    pub fn scaled(&self, c: &J::Scalar) -> Self {
        self.map(|x| x.scaled(c))
    }

    pub fn negated(&self) -> Self {
        self.map(|x| x.negated())
    }

    /// Multiplies every component by the jet `f`.
    pub fn times_jet(&self, f: &J) -> Self {
        self.map(|x| x.times(f))
    }

    fn combine(&self, other: &Self, subtract: bool) -> Result<Self> {
        if self.dim() != other.dim() || self.variance != other.variance {
            return Err(Error::Mismatch(format!(
                "cannot combine tensors of variance {:?} (dimension {}) and {:?} (dimension {})",
                self.variance,
                self.dim(),
                other.variance,
                other.dim()
            )));
        }
        let symmetry = if self.symmetry() == other.symmetry() {
            self.symmetry().clone()
        } else {
            Symmetry::none(self.rank())
        };
        let same = Arc::ptr_eq(&self.layout, &other.layout);
        Self::from_fn(self.dim(), &self.variance, symmetry, &self.zero, |idx| {
            let (a, b) = if same {
                let s = self.layout.locate(idx).unwrap().0;
                (self.components[s].clone(), &other.components[s])
            } else {
                (self.get(idx), &other.get(idx))
            };
            Ok(if subtract { a.minus(b) } else { a.plus(b) })
        })
        .map(|t| {
            let cap = self.cap().min(other.cap());
            if t.cap() > cap {
                t.truncated(cap)
            } else {
                t
            }
        })
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.combine(other, false)
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.combine(other, true)
    }

    /// True when every stored component is identically zero.
    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Jet::is_zero)
    }

    pub fn is_negligible(&self, tol: f64) -> bool {
        self.components.iter().all(|c| c.is_negligible(tol))
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().map(Jet::max_abs).fold(0.0, f64::max)
    }

    /// Largest constant-term magnitude over all components.
    pub fn max_abs_value(&self) -> f64 {
        use crate::Scalar;
        self.components.iter().map(|c| c.value().to_f64().abs()).fold(0.0, f64::max)
    }

    /// Constant terms of all canonical components, in storage order.
    pub fn values(&self) -> Vec<(Vec<usize>, J::Scalar)> {
        self.stored().map(|(i, c)| (i.to_vec(), c.value())).collect()
    }

    /// Re-stores the tensor under another symmetry, reading each new canonical
    /// component from the old storage. No consistency check is made; see
    /// [`TensorJet::symmetry_defect`].
    pub fn with_symmetry(&self, symmetry: Symmetry) -> Result<Self> {
        Self::from_fn(self.dim(), &self.variance, symmetry, &self.zero, |idx| Ok(self.get(idx)))
    }

    /// Largest violation `|T[t] -/+ T[t o p]|` over all tuples and group
    /// elements of `symmetry`, measured by [`Jet::max_abs`].
    pub fn symmetry_defect(&self, symmetry: &Symmetry) -> f64 {
        assert_eq!(symmetry.rank(), self.rank());
        let elements = symmetry.elements();
        let mut worst = 0.0f64;
        for_each_index(self.dim(), self.rank(), |t| {
            let a = self.get(t);
            for (p, neg) in &elements {
                let img: Vec<usize> = (0..t.len()).map(|s| t[p[s]]).collect();
                let b = self.get(&img);
                let d = if *neg { a.plus(&b) } else { a.minus(&b) };
                worst = worst.max(d.max_abs());
            }
        });
        worst
    }

    /// True when the tensor satisfies `symmetry` exactly.
    pub fn respects(&self, symmetry: &Symmetry) -> bool {
        self.symmetry_defect(symmetry) == 0.0
    }

    /// The tensor with slots reordered: `result[t] = self[u]` where
    /// `u[perm[s]] = t[s]`, i.e. slot `s` of the result is slot `perm[s]` of
    /// `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let r = self.rank();
        let mut seen = vec![false; r];
        if perm.len() != r || perm.iter().any(|&p| p >= r || core::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidIndex(format!("{perm:?} is not a permutation of {r} slots")));
        }
        let variance: Vec<Variance> = perm.iter().map(|&p| self.variance[p]).collect();
        let mut u = vec![0; r];
        Self::from_fn(self.dim(), &variance, Symmetry::none(r), &self.zero, |t| {
            for s in 0..r {
                u[perm[s]] = t[s];
            }
            Ok(self.get(&u))
        })
    }

    /// A short description used in diagnostics.
    pub fn describe(&self) -> String {
        format!("rank-{} tensor {:?} in dimension {}", self.rank(), self.variance, self.dim())
    }
}

/// Calls `f` on every index tuple of the given rank in lexicographic order.
pub fn for_each_index(dim: usize, rank: usize, mut f: impl FnMut(&[usize])) {
    let mut t = vec![0usize; rank];
    if dim == 0 && rank > 0 {
        return;
    }
    loop {
        f(&t);
        let mut s = rank;
        loop {
            if s == 0 {
                return;
            }
            s -= 1;
            t[s] += 1;
            if t[s] < dim {
                break;
            }
            t[s] = 0;
        }
    }
}
