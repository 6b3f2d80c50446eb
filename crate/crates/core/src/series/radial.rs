use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{invert_series_matrix, matrix_product, Basis, Jet, TruncatedSeries};
use crate::{Error, Result, Scalar};

/// A jet in the spatial variables and the radial variable `x`, with at most
/// one power of `log x`:
///
/// `f = regular(y, x) + log(x) * log_part(y, x)`.
///
/// Both parts are [`TruncatedSeries`] on a basis whose last variable is `x`
/// (see [`Basis::radial_extension`]). The total-degree cap means the
/// coefficient of `x^k` is known to spatial degree `cap - k`.
///
/// Products that would create `log(x)^2` below the cap panic; in the
/// Poincare-metric expansion the log part starts at order `x^n` and every
/// such product lies beyond the working order.
#[derive(Clone, PartialEq)]
pub struct RadialSeries<S> {
    regular: TruncatedSeries<S>,
    log: Option<TruncatedSeries<S>>,
}

impl<S: Scalar> RadialSeries<S> {
    pub fn from_parts(regular: TruncatedSeries<S>, log: Option<TruncatedSeries<S>>) -> Result<Self> {
        if let Some(l) = &log {
            if l.num_vars() != regular.num_vars() {
                return Err(Error::Mismatch("regular and log parts in different variables".into()));
            }
        }
        Ok(RadialSeries { regular, log }.normalized())
    }

    pub fn regular(regular: TruncatedSeries<S>) -> Self {
        RadialSeries { regular, log: None }
    }

    /// Lifts an `x`-independent spatial series.
    pub fn from_spatial(s: &TruncatedSeries<S>) -> Self {
        let radial = s.basis().radial_extension().clone();
        Self::regular(s.embed_with_power(0, &radial))
    }

    /// Builds `sum c_k x^k (log x)^l` from spatial coefficients.
    pub fn from_coefficients(
        spatial: &Arc<Basis>,
        cap: usize,
        terms: &[(usize, bool, TruncatedSeries<S>)],
    ) -> Self {
        let radial = spatial.radial_extension();
        let mut regular = TruncatedSeries::zero(radial, cap);
        let mut log: Option<TruncatedSeries<S>> = None;
        for (k, is_log, c) in terms {
            let e = c.embed_with_power(*k, radial).extend_to(cap);
            if *is_log {
                match &mut log {
                    Some(l) => l.add_assign_series(&e),
                    None => {
                        let mut l = TruncatedSeries::zero(radial, cap);
                        l.add_assign_series(&e);
                        log = Some(l);
                    }
                }
            } else {
                regular.add_assign_series(&e);
            }
        }
        RadialSeries { regular, log }.normalized()
    }

    fn normalized(mut self) -> Self {
        if let Some(l) = &self.log {
            if l.is_zero() {
                let cap = l.cap().min(self.regular.cap());
                self.regular = self.regular.truncate(cap);
                self.log = None;
            } else if l.cap() != self.regular.cap() {
                let cap = l.cap().min(self.regular.cap());
                self.regular = self.regular.truncate(cap);
                self.log = Some(l.truncate(cap));
            }
        }
        self
    }

    pub fn regular_part(&self) -> &TruncatedSeries<S> {
        &self.regular
    }

    pub fn log_part(&self) -> Option<&TruncatedSeries<S>> {
        self.log.as_ref()
    }

    /// Number of spatial variables.
    pub fn dim(&self) -> usize {
        self.regular.num_vars() - 1
    }

    fn x_var(&self) -> usize {
        self.dim()
    }

    /// Spatial coefficient of `x^k (log x)^l` with spatial cap `cap - k`.
    pub fn coefficient(&self, k: usize, log: bool, spatial: &Arc<Basis>) -> TruncatedSeries<S> {
        let part = if log { self.log.as_ref() } else { Some(&self.regular) };
        match part {
            Some(p) => p.extract_power(k, spatial),
            None => {
                let cap = self.cap().saturating_sub(k).min(spatial.max_degree());
                TruncatedSeries::zero(spatial, cap)
            }
        }
    }

    /// Leading term `(k, has_log)` among known coefficients, ordered by the
    /// size of `x^k (log x)^l` as `x -> 0`: `x^k log x` dominates `x^k`.
    pub fn leading_order(&self) -> Option<(usize, bool)> {
        let r = self.regular.order_in_last();
        let l = self.log.as_ref().and_then(|l| l.order_in_last());
        match (r, l) {
            (None, None) => None,
            (Some(r), None) => Some((r, false)),
            (None, Some(l)) => Some((l, true)),
            (Some(r), Some(l)) => Some(if l <= r { (l, true) } else { (r, false) }),
        }
    }

    /// `d/dx`, using `d/dx (x^k log x) = k x^(k-1) log x + x^(k-1)`.
    pub fn d_dx(&self) -> Result<Self> {
        let x = self.x_var();
        let regular = self.regular.partial(x)?;
        match &self.log {
            None => Ok(Self::regular(regular)),
            Some(l) => {
                let lx = l.partial(x)?;
                let shifted = l.div_var(x).map_err(|_| {
                    Error::RadialRange("derivative of log x produces 1/x".into())
                })?;
                Ok(RadialSeries {
                    regular: &regular + &shifted,
                    log: Some(lx),
                }
                .normalized())
            }
        }
    }

    pub fn mul_x(&self) -> Self {
        let x = self.x_var();
        RadialSeries {
            regular: self.regular.mul_var(x),
            log: self.log.as_ref().map(|l| l.mul_var(x)),
        }
        .normalized()
    }

    /// Exact division by `x`; fails if a term of order `x^0` is present.
    pub fn div_x(&self) -> Result<Self> {
        let x = self.x_var();
        let regular = self
            .regular
            .div_var(x)
            .map_err(|_| Error::RadialRange("division by x of a term of order x^0".into()))?;
        let log = match &self.log {
            Some(l) => Some(l.div_var(x).map_err(|_| {
                Error::RadialRange("division by x of a log x term".into())
            })?),
            None => None,
        };
        Ok(RadialSeries { regular, log }.normalized())
    }

    /// Substitutes `x = value` in the regular part and in the log part with
    /// `log x = log_value`, returning a spatial series.
    pub fn eval_x(&self, value: &S, log_value: &S, spatial: &Arc<Basis>) -> TruncatedSeries<S> {
        let mut total = TruncatedSeries::zero(spatial, self.cap().min(spatial.max_degree()));
        let mut power = S::one();
        for k in 0..=self.cap() {
            let c = self.coefficient(k, false, spatial);
            total.add_scaled(&power, &c.extend_to(total.cap()));
            if self.log.is_some() {
                let c = self.coefficient(k, true, spatial);
                let mut w = power.clone();
                w *= log_value;
                total.add_scaled(&w, &c.extend_to(total.cap()));
            }
            power *= value;
        }
        total
    }
}

fn add_opt<S: Scalar>(a: &Option<TruncatedSeries<S>>, b: &Option<TruncatedSeries<S>>, sub: bool) -> Option<TruncatedSeries<S>> {
    match (a, b) {
        (None, None) => None,
        (Some(a), None) => Some(a.clone()),
        (None, Some(b)) => Some(if sub { -b } else { b.clone() }),
        (Some(a), Some(b)) => Some(if sub { a - b } else { a + b }),
    }
}

impl<S: Scalar> Jet for RadialSeries<S> {
    type Scalar = S;

    fn zero_like(&self) -> Self {
        Self::regular(self.regular.zero_like())
    }
    fn constant_like(&self, c: S) -> Self {
        Self::regular(self.regular.constant_like(c))
    }
    fn cap(&self) -> usize {
        self.regular.cap()
    }
    fn truncated(&self, cap: usize) -> Self {
        RadialSeries {
            regular: self.regular.truncate(cap),
            log: self.log.as_ref().map(|l| l.truncate(cap)),
        }
        .normalized()
    }
    fn value(&self) -> S {
        self.regular.value().clone()
    }
    fn is_zero(&self) -> bool {
        self.regular.is_zero() && self.log.as_ref().is_none_or(|l| l.is_zero())
    }
    fn is_negligible(&self, tol: f64) -> bool {
        self.regular.is_negligible(tol) && self.log.as_ref().is_none_or(|l| l.is_negligible(tol))
    }
    fn max_abs(&self) -> f64 {
        self.regular
            .max_abs()
            .max(self.log.as_ref().map_or(0.0, |l| l.max_abs()))
    }
    fn plus(&self, other: &Self) -> Self {
        RadialSeries {
            regular: &self.regular + &other.regular,
            log: add_opt(&self.log, &other.log, false),
        }
        .normalized()
    }
    fn minus(&self, other: &Self) -> Self {
        RadialSeries {
            regular: &self.regular - &other.regular,
            log: add_opt(&self.log, &other.log, true),
        }
        .normalized()
    }
    fn times(&self, other: &Self) -> Self {
        let mut out = self.zero_like().truncated(other.cap());
        out.add_product(self, other);
        out
    }
    fn scaled(&self, c: &S) -> Self {
        RadialSeries {
            regular: self.regular.scale(c),
            log: self.log.as_ref().map(|l| l.scale(c)),
        }
    }
    fn add_assign_jet(&mut self, other: &Self) {
        *self = self.plus(other);
    }
    fn sub_assign_jet(&mut self, other: &Self) {
        *self = self.minus(other);
    }
    fn add_scaled_jet(&mut self, c: &S, other: &Self) {
        *self = self.plus(&other.scaled(c));
    }
    fn add_product(&mut self, a: &Self, b: &Self) {
        self.accumulate(a, b, false)
    }
    fn sub_product(&mut self, a: &Self, b: &Self) {
        self.accumulate(a, b, true)
    }
    fn partial(&self, var: usize) -> Result<Self> {
        if var >= self.dim() {
            return Err(Error::InvalidIndex(format!(
                "spatial variable {var} of a radial series in dimension {}",
                self.dim()
            )));
        }
        Ok(RadialSeries {
            regular: self.regular.partial(var)?,
            log: match &self.log {
                Some(l) => Some(l.partial(var)?),
                None => None,
            },
        }
        .normalized())
    }

    /// `(A + L B)^{-1} = A^{-1} - L A^{-1} B A^{-1}` since `L^2` terms lie beyond the cap.
    fn invert_matrix(m: &[Self], n: usize) -> Result<Vec<Self>> {
        let regular: Vec<_> = m.iter().map(|s| s.regular.clone()).collect();
        let inv = invert_series_matrix(&regular, n)?;
        if m.iter().all(|s| s.log.is_none()) {
            return Ok(inv.into_iter().map(Self::regular).collect());
        }
        let logs: Vec<_> = m
            .iter()
            .map(|s| s.log.clone().unwrap_or_else(|| s.regular.zero_like()))
            .collect();
        let corr = matrix_product(&matrix_product(&inv, &logs, n), &inv, n);
        Ok(inv
            .into_iter()
            .zip(corr)
            .map(|(a, c)| RadialSeries { regular: a, log: Some(-&c) }.normalized())
            .collect())
    }
}

impl<S: Scalar> RadialSeries<S> {
    fn accumulate(&mut self, a: &Self, b: &Self, subtract: bool) {
        let add = |acc: &mut TruncatedSeries<S>, x: &TruncatedSeries<S>, y: &TruncatedSeries<S>| {
            if subtract {
                acc.sub_product(x, y)
            } else {
                acc.add_product(x, y)
            }
        };
        add(&mut self.regular, &a.regular, &b.regular);
        if a.log.is_none() && b.log.is_none() {
            if let Some(l) = &mut self.log {
                *l = l.truncate(self.regular.cap());
            }
            return;
        }
        if let (Some(la), Some(lb)) = (&a.log, &b.log) {
            if let (Some(oa), Some(ob)) = (la.order_in_last(), lb.order_in_last()) {
                let cap = self.regular.cap().min(la.cap()).min(lb.cap());
                assert!(
                    oa + ob > cap,
                    "product needs (log x)^2 at order x^{} within cap {cap}",
                    oa + ob
                );
            }
        }
        let mut log = self
            .log
            .take()
            .unwrap_or_else(|| self.regular.zero_like());
        if let Some(lb) = &b.log {
            add(&mut log, &a.regular, lb);
        }
        if let Some(la) = &a.log {
            add(&mut log, la, &b.regular);
        }
        let cap = log.cap().min(self.regular.cap());
        let regular = self.regular.truncate(cap);
        *self = RadialSeries { regular, log: Some(log.truncate(cap)) }.normalized();
    }
}

impl<S: Scalar> core::fmt::Debug for RadialSeries<S> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match &self.log {
            None => write!(f, "{:?}", self.regular),
            Some(l) => write!(f, "{:?} + log(x) * ({:?})", self.regular, l),
        }
    }
}
