use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

use super::Basis;
use crate::{Error, Result, Scalar};

/// Multivariate Taylor polynomial truncated at total degree `cap`.
///
/// Coefficients are stored densely in the graded-lexicographic order of the
/// [`Basis`]; a series with cap `d` holds exactly `basis.count(d)` entries.
/// Binary operations produce the smaller of the two caps, and every
/// derivative lowers the cap by one.
#[derive(Clone, PartialEq)]
pub struct TruncatedSeries<S> {
    basis: Arc<Basis>,
    cap: usize,
    coeffs: Vec<S>,
}

fn pick_basis<'a>(a: &'a Arc<Basis>, b: &'a Arc<Basis>) -> Result<&'a Arc<Basis>> {
    if a.num_vars() != b.num_vars() {
        return Err(Error::Mismatch(format!(
            "series in {} and {} variables",
            a.num_vars(),
            b.num_vars()
        )));
    }
    Ok(if a.max_degree() >= b.max_degree() { a } else { b })
}

impl<S: Scalar> TruncatedSeries<S> {
    pub fn zero(basis: &Arc<Basis>, cap: usize) -> Self {
        assert!(cap <= basis.max_degree(), "degree cap {cap} exceeds basis maximum");
        TruncatedSeries {
            basis: basis.clone(),
            cap,
            coeffs: vec![S::zero(); basis.count(cap)],
        }
    }

    pub fn constant(basis: &Arc<Basis>, cap: usize, c: S) -> Self {
        let mut s = Self::zero(basis, cap);
        s.coeffs[0] = c;
        s
    }

    pub fn one(basis: &Arc<Basis>, cap: usize) -> Self {
        Self::constant(basis, cap, S::one())
    }

    /// The coordinate function `y_var`.
    pub fn variable(basis: &Arc<Basis>, cap: usize, var: usize) -> Self {
        let mut s = Self::zero(basis, cap);
        if cap >= 1 {
            s.coeffs[1 + var] = S::one();
        }
        s
    }

    /// Builds a series from `(exponents, coefficient)` pairs. Terms above the
    /// cap are dropped; repeated monomials accumulate.
    pub fn from_terms<'a, I>(basis: &Arc<Basis>, cap: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a [u32], S)>,
    {
        let mut s = Self::zero(basis, cap);
        for (exps, c) in terms {
            if exps.len() != basis.num_vars() {
                return Err(Error::Mismatch(format!(
                    "exponent vector of length {} for {} variables",
                    exps.len(),
                    basis.num_vars()
                )));
            }
            let deg: u32 = exps.iter().sum();
            if deg as usize > cap {
                continue;
            }
            let key: Vec<u8> = exps.iter().map(|&e| e as u8).collect();
            let i = basis.index_of(&key).expect("monomial within cap");
            s.coeffs[i] += &c;
        }
        Ok(s)
    }

    pub(crate) fn from_coeffs(basis: &Arc<Basis>, cap: usize, coeffs: Vec<S>) -> Self {
        debug_assert_eq!(coeffs.len(), basis.count(cap));
        TruncatedSeries {
            basis: basis.clone(),
            cap,
            coeffs,
        }
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn num_vars(&self) -> usize {
        self.basis.num_vars()
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Dense coefficients in graded-lexicographic order.
    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [S] {
        &mut self.coeffs
    }

    /// Coefficient of a monomial; zero if it lies above the cap.
    pub fn coeff(&self, exponents: &[u32]) -> S {
        let deg: u32 = exponents.iter().sum();
        if exponents.len() != self.num_vars() || deg as usize > self.cap {
            return S::zero();
        }
        let key: Vec<u8> = exponents.iter().map(|&e| e as u8).collect();
        self.basis
            .index_of(&key)
            .map(|i| self.coeffs[i].clone())
            .unwrap_or_else(S::zero)
    }

    /// Value at the origin.
    pub fn value(&self) -> &S {
        &self.coeffs[0]
    }

    /// Non-zero terms in graded-lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u8], &S)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.basis.exponents(i), c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_negligible(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.is_negligible(tol))
    }

    /// Largest coefficient magnitude (as `f64`).
    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max)
    }

    pub fn truncate(&self, cap: usize) -> Self {
        let cap = cap.min(self.cap);
        TruncatedSeries {
            basis: self.basis.clone(),
            cap,
            coeffs: self.coeffs[..self.basis.count(cap)].to_vec(),
        }
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> TruncatedSeries<T> {
        TruncatedSeries {
            basis: self.basis.clone(),
            cap: self.cap,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        let basis = pick_basis(&self.basis, &other.basis)?;
        let cap = self.cap.min(other.cap);
        let n = basis.count(cap);
        let coeffs = self.coeffs[..n]
            .iter()
            .zip(&other.coeffs[..n])
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        Ok(Self::from_coeffs(basis, cap, coeffs))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        let basis = pick_basis(&self.basis, &other.basis)?;
        let cap = self.cap.min(other.cap);
        let n = basis.count(cap);
        let coeffs = self.coeffs[..n]
            .iter()
            .zip(&other.coeffs[..n])
            .map(|(a, b)| a.clone() - b.clone())
            .collect();
        Ok(Self::from_coeffs(basis, cap, coeffs))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        let basis = pick_basis(&self.basis, &other.basis)?;
        let cap = self.cap.min(other.cap);
        let mut out = vec![S::zero(); basis.count(cap)];
        S::accumulate_product(&mut out, &self.coeffs, &other.coeffs, basis, cap);
        Ok(Self::from_coeffs(basis, cap, out))
    }

    pub fn scale(&self, c: &S) -> Self {
        TruncatedSeries {
            basis: self.basis.clone(),
            cap: self.cap,
            coeffs: self
                .coeffs
                .iter()
                .map(|a| {
                    let mut t = a.clone();
                    t *= c;
                    t
                })
                .collect(),
        }
    }

    fn shrink_to(&mut self, cap: usize) {
        if cap < self.cap {
            self.cap = cap;
            self.coeffs.truncate(self.basis.count(cap));
        }
    }

    pub fn add_assign_series(&mut self, other: &Self) {
        pick_basis(&self.basis, &other.basis).expect("series variable counts differ");
        self.shrink_to(other.cap);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }

    pub fn sub_assign_series(&mut self, other: &Self) {
        pick_basis(&self.basis, &other.basis).expect("series variable counts differ");
        self.shrink_to(other.cap);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
    }

    /// `self += c * other`
    pub fn add_scaled(&mut self, c: &S, other: &Self) {
        pick_basis(&self.basis, &other.basis).expect("series variable counts differ");
        self.shrink_to(other.cap);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            let mut t = b.clone();
            t *= c;
            *a += &t;
        }
    }

    /// `self += a * b`, truncated at the smallest of the three caps.
    pub fn add_product(&mut self, a: &Self, b: &Self) {
        let basis = pick_basis(&a.basis, &b.basis)
            .and_then(|x| pick_basis(x, &self.basis))
            .expect("series variable counts differ")
            .clone();
        self.shrink_to(a.cap.min(b.cap));
        S::accumulate_product(&mut self.coeffs, &a.coeffs, &b.coeffs, &basis, self.cap);
    }

    /// `self -= a * b`
    pub fn sub_product(&mut self, a: &Self, b: &Self) {
        let basis = pick_basis(&a.basis, &b.basis)
            .and_then(|x| pick_basis(x, &self.basis))
            .expect("series variable counts differ")
            .clone();
        self.shrink_to(a.cap.min(b.cap));
        let mut tmp = vec![S::zero(); basis.count(self.cap)];
        S::accumulate_product(&mut tmp, &a.coeffs, &b.coeffs, &basis, self.cap);
        for (x, t) in self.coeffs.iter_mut().zip(&tmp) {
            *x -= t;
        }
    }

    /// Formal partial derivative; the cap drops by one.
    pub fn partial(&self, var: usize) -> Result<Self> {
        if var >= self.num_vars() {
            return Err(Error::InvalidIndex(format!(
                "variable {var} of a series in {} variables",
                self.num_vars()
            )));
        }
        if self.cap == 0 {
            return Err(Error::InsufficientDegree {
                operation: "partial derivative",
                required: 1,
                available: 0,
            });
        }
        let cap = self.cap - 1;
        let n = self.basis.count(cap);
        let coeffs = (0..n)
            .map(|k| {
                let src = self.basis.raised(var, k).expect("raised index within cap");
                let e = self.basis.exponents(k)[var] as i64 + 1;
                let mut c = self.coeffs[src].clone();
                c *= &S::from_i64(e);
                c
            })
            .collect();
        Ok(Self::from_coeffs(&self.basis, cap, coeffs))
    }

    /// Multiplication by the coordinate `y_var`. The cap grows by one, up to
    /// the basis maximum.
    pub fn mul_var(&self, var: usize) -> Self {
        let cap = (self.cap + 1).min(self.basis.max_degree());
        let mut out = Self::zero(&self.basis, cap);
        let n_out = self.basis.count(cap);
        for (i, c) in self.coeffs.iter().enumerate() {
            if let Some(k) = self.basis.raised(var, i) {
                if k < n_out {
                    out.coeffs[k] = c.clone();
                }
            }
        }
        out
    }

    /// Exact division by the coordinate `y_var`; fails if some term is not
    /// divisible. The cap drops by one.
    pub fn div_var(&self, var: usize) -> Result<Self> {
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() && self.basis.exponents(i)[var] == 0 {
                return Err(Error::RadialRange(format!(
                    "term {:?} is not divisible by variable {var}",
                    self.basis.exponents(i)
                )));
            }
        }
        if self.cap == 0 {
            return Err(Error::InsufficientDegree {
                operation: "division by a coordinate",
                required: 1,
                available: 0,
            });
        }
        let cap = self.cap - 1;
        let coeffs = (0..self.basis.count(cap))
            .map(|k| self.coeffs[self.basis.raised(var, k).unwrap()].clone())
            .collect();
        Ok(Self::from_coeffs(&self.basis, cap, coeffs))
    }

    /// Evaluates the truncated polynomial at a point.
    pub fn evaluate(&self, point: &[S]) -> Result<S> {
        if point.len() != self.num_vars() {
            return Err(Error::Mismatch(format!(
                "point of dimension {} for {} variables",
                point.len(),
                self.num_vars()
            )));
        }
        let mut total = S::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut term = c.clone();
            for (p, &e) in point.iter().zip(self.basis.exponents(i)) {
                for _ in 0..e {
                    term *= p;
                }
            }
            total += &term;
        }
        Ok(total)
    }

    /// Multiplicative inverse by Newton iteration (doubling the number of
    /// correct degrees per step).
    pub fn recip(&self) -> Result<Self> {
        let c0 = self.value().clone();
        if c0.is_zero() {
            return Err(Error::NotRepresentable(
                "reciprocal of a series with zero constant term".into(),
            ));
        }
        let mut x = Self::constant(&self.basis, 0, S::one() / c0);
        let mut done = 0usize;
        while done < self.cap {
            let cap = (2 * done + 1).min(self.cap);
            let x_ext = x.extend_to(cap);
            let mut r = Self::one(&self.basis, cap);
            r.sub_product(&self.truncate(cap), &x_ext);
            let mut next = x_ext.clone();
            next.add_product(&x_ext, &r);
            x = next;
            done = cap;
        }
        Ok(x)
    }

    /// Same coefficients with a larger cap; the new degrees are zero.
    pub(crate) fn extend_to(&self, cap: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(self.basis.count(cap), S::zero());
        Self::from_coeffs(&self.basis, cap.max(self.cap), coeffs)
    }

    pub fn powi(&self, e: i32) -> Result<Self> {
        if e < 0 {
            return self.recip()?.powi(-e);
        }
        let mut result = Self::one(&self.basis, self.cap);
        let mut base = self.clone();
        let mut k = e as u32;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }

    /// `exp` of the series. On the exact backend the constant term must vanish.
    pub fn exp(&self) -> Result<Self> {
        let c0 = self.value().clone();
        let scale = c0.exp_scalar().ok_or_else(|| {
            Error::NotRepresentable("exp of a series with non-zero constant term".into())
        })?;
        let mut f = self.clone();
        f.coeffs[0] = S::zero();
        let mut total = Self::one(&self.basis, self.cap);
        let mut term = Self::one(&self.basis, self.cap);
        for k in 1..=self.cap {
            term = (&term * &f).scale(&S::from_ratio(1, k as i64));
            total.add_assign_series(&term);
        }
        Ok(total.scale(&scale))
    }

    /// `log(1 + f)` for `self = 1 + f` with `f(0) = 0`.
    pub fn ln(&self) -> Result<Self> {
        if !(self.value().clone() - S::one()).is_zero() {
            return Err(Error::NotRepresentable(
                "logarithm is only taken of series with constant term 1".into(),
            ));
        }
        let mut f = self.clone();
        f.coeffs[0] = S::zero();
        let mut total = Self::zero(&self.basis, self.cap);
        let mut power = Self::one(&self.basis, self.cap);
        for k in 1..=self.cap {
            power = &power * &f;
            let sign = if k % 2 == 1 { 1 } else { -1 };
            total.add_scaled(&S::from_ratio(sign, k as i64), &power);
        }
        Ok(total)
    }

    /// Square root with positive constant term; on the exact backend the
    /// constant term must be a rational square.
    pub fn sqrt(&self) -> Result<Self> {
        let c0 = self.value().clone();
        let root = c0.sqrt_exact().ok_or_else(|| {
            Error::NotRepresentable(format!("square root of constant term {c0}"))
        })?;
        if root.is_zero() {
            return Err(Error::NotRepresentable("square root of a series vanishing at the origin".into()));
        }
        let unit = self.scale(&(S::one() / c0));
        let half_log = unit.ln()?.scale(&S::from_ratio(1, 2));
        Ok(half_log.exp()?.scale(&root))
    }

    /// The coefficient of `y_var^power`, as a series in the remaining
    /// variables on `target` (which must have one variable fewer, with `var`
    /// the last variable of `self`).
    pub fn extract_power(&self, power: usize, target: &Arc<Basis>) -> Self {
        let var = self.num_vars() - 1;
        assert_eq!(target.num_vars(), var, "target basis must drop the last variable");
        if power > self.cap {
            return Self::zero(target, 0);
        }
        let cap = (self.cap - power).min(target.max_degree());
        let mut out = Self::zero(target, cap);
        let mut key: Vec<u8> = Vec::with_capacity(var + 1);
        for k in 0..target.count(cap) {
            key.clear();
            key.extend_from_slice(target.exponents(k));
            key.push(power as u8);
            let i = self.basis.index_of(&key).expect("monomial within cap");
            out.coeffs[k] = self.coeffs[i].clone();
        }
        out
    }

    /// Embeds a series in one variable fewer into `target`, multiplied by
    /// `y_last^power`. The result cap is `cap + power`, bounded by the target.
    pub fn embed_with_power(&self, power: usize, target: &Arc<Basis>) -> Self {
        assert_eq!(target.num_vars(), self.num_vars() + 1);
        let cap = (self.cap + power).min(target.max_degree());
        let mut out = Self::zero(target, cap);
        let mut key: Vec<u8> = Vec::with_capacity(self.num_vars() + 1);
        for (i, c) in self.coeffs.iter().enumerate() {
            if self.basis.degree_of(i) + power > cap {
                break;
            }
            key.clear();
            key.extend_from_slice(self.basis.exponents(i));
            key.push(power as u8);
            out.coeffs[target.index_of(&key).unwrap()] = c.clone();
        }
        out
    }

    /// Lowest total degree carrying a non-zero coefficient.
    pub fn order(&self) -> Option<usize> {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .map(|i| self.basis.degree_of(i))
    }

    /// Lowest exponent of the last variable among non-zero terms.
    pub fn order_in_last(&self) -> Option<usize> {
        let var = self.num_vars() - 1;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, _)| self.basis.exponents(i)[var] as usize)
            .min()
    }
}

impl<S: Scalar> Add for &TruncatedSeries<S> {
    type Output = TruncatedSeries<S>;
    fn add(self, rhs: Self) -> TruncatedSeries<S> {
        self.try_add(rhs).expect("series variable counts differ")
    }
}

impl<S: Scalar> Sub for &TruncatedSeries<S> {
    type Output = TruncatedSeries<S>;
    fn sub(self, rhs: Self) -> TruncatedSeries<S> {
        self.try_sub(rhs).expect("series variable counts differ")
    }
}

impl<S: Scalar> Mul for &TruncatedSeries<S> {
    type Output = TruncatedSeries<S>;
    fn mul(self, rhs: Self) -> TruncatedSeries<S> {
        self.try_mul(rhs).expect("series variable counts differ")
    }
}

impl<S: Scalar> Neg for &TruncatedSeries<S> {
    type Output = TruncatedSeries<S>;
    fn neg(self) -> TruncatedSeries<S> {
        self.scale(&-S::one())
    }
}

impl<S: Scalar> fmt::Debug for TruncatedSeries<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} + O({})", self.cap + 1)
    }
}

impl<S: Scalar> fmt::Display for TruncatedSeries<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (exps, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (v, &e) in exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*y{v}")?,
                    _ => write!(f, "*y{v}^{e}")?,
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
