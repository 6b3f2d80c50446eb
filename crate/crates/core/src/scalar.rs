use core::fmt::{Debug, Display};
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use alloc::vec;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::series::Basis;

/// Arbitrary-precision rational number, the exact backend.
pub type Rational = num_rational::BigRational;

/// Coefficient field of every series in the crate.
///
/// Two backends exist: [`Rational`] (exact, `EXACT == true`) and `f64`. Code
/// that compares results uses [`Scalar::is_negligible`], which is an exact
/// zero test on the rational backend and an absolute tolerance on floats.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
{
    const EXACT: bool;
    /// Backend name as used in reports: `"rational"` or `"float"`.
    const NAME: &'static str;

    fn from_i64(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Exact conversion of a finite float (rationals) or identity (floats).
    fn from_f64(v: f64) -> Option<Self>;
    fn to_f64(&self) -> f64;

    fn is_negligible(&self, tol: f64) -> bool;

    /// Square root if it exists in the backend.
    fn sqrt_exact(&self) -> Option<Self>;

    /// `exp` of a scalar if it exists in the backend (only `exp(0)` on rationals).
    fn exp_scalar(&self) -> Option<Self>;

    fn is_positive(&self) -> bool {
        !self.is_zero() && self.to_f64() > 0.0
    }

    /// `out[k] += sum a[i] b[j]` over all monomial pairs whose product has
    /// index `k` and total degree at most `cap`.
    fn accumulate_product(out: &mut [Self], a: &[Self], b: &[Self], basis: &Basis, cap: usize) {
        let n_out = basis.count(cap);
        for (i, ai) in a.iter().enumerate().take(n_out) {
            if ai.is_zero() {
                continue;
            }
            let row = basis.product_row(i);
            let lim = basis.count(cap - basis.degree_of(i)).min(b.len());
            for (j, bj) in b[..lim].iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                let mut t = ai.clone();
                t *= bj;
                out[row[j] as usize] += &t;
            }
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const NAME: &'static str = "float";

    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_f64(v: f64) -> Option<Self> {
        Some(v)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_negligible(&self, tol: f64) -> bool {
        num_traits::Float::abs(*self) <= tol
    }
    fn sqrt_exact(&self) -> Option<Self> {
        if *self < 0.0 {
            None
        } else {
            Some(num_traits::Float::sqrt(*self))
        }
    }
    fn exp_scalar(&self) -> Option<Self> {
        Some(num_traits::Float::exp(*self))
    }

    fn accumulate_product(out: &mut [f64], a: &[f64], b: &[f64], basis: &Basis, cap: usize) {
        let n_out = basis.count(cap);
        for (i, &ai) in a.iter().enumerate().take(n_out) {
            if ai == 0.0 {
                continue;
            }
            let row = basis.product_row(i);
            let lim = basis.count(cap - basis.degree_of(i)).min(b.len());
            for (k, &bj) in row[..lim].iter().zip(&b[..lim]) {
                out[*k as usize] += ai * bj;
            }
        }
    }
}

/// Scales a slice of rationals to integer numerators over one common denominator.
fn common_denominator(values: &[Rational]) -> (Vec<BigInt>, BigInt) {
    let mut den = BigInt::one();
    for v in values {
        if !v.is_zero() && !v.denom().is_one() {
            den = den.lcm(v.denom());
        }
    }
    let nums = values
        .iter()
        .map(|v| {
            if v.is_zero() {
                BigInt::zero()
            } else if v.denom() == &den {
                v.numer().clone()
            } else {
                v.numer() * (&den / v.denom())
            }
        })
        .collect();
    (nums, den)
}

impl Scalar for Rational {
    const EXACT: bool = true;
    const NAME: &'static str = "rational";

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_f64(v: f64) -> Option<Self> {
        Rational::from_float(v)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }
    fn sqrt_exact(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &(&n * &n) == self.numer() && &(&d * &d) == self.denom() {
            Some(Rational::new(n, d))
        } else {
            None
        }
    }
    fn exp_scalar(&self) -> Option<Self> {
        if self.is_zero() {
            Some(Rational::one())
        } else {
            None
        }
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }

    // Integer convolution over a common denominator: one gcd per output
    // coefficient instead of one per monomial pair. Uses i128 accumulators when
    // the operand sizes guarantee no overflow.
    fn accumulate_product(
        out: &mut [Rational],
        a: &[Rational],
        b: &[Rational],
        basis: &Basis,
        cap: usize,
    ) {
        let n_out = basis.count(cap);
        let (an, ad) = common_denominator(&a[..n_out.min(a.len())]);
        let (bn, bd) = common_denominator(&b[..n_out.min(b.len())]);
        let bits = |v: &[BigInt]| v.iter().map(|x| x.bits()).max().unwrap_or(0);
        let (abits, bbits) = (bits(&an), bits(&bn));
        if abits == 0 || bbits == 0 {
            return;
        }
        let pair_bits = 64 - (basis.count(cap) as u64 * basis.count(cap) as u64).leading_zeros() as u64;
        let den = ad * bd;
        if abits + bbits + pair_bits < 126 {
            let a128: Vec<i128> = an.iter().map(|x| x.to_i128().unwrap()).collect();
            let b128: Vec<i128> = bn.iter().map(|x| x.to_i128().unwrap()).collect();
            let mut acc = vec![0i128; n_out];
            for (i, &ai) in a128.iter().enumerate() {
                if ai == 0 {
                    continue;
                }
                let row = basis.product_row(i);
                let lim = basis.count(cap - basis.degree_of(i)).min(b128.len());
                for (k, &bj) in row[..lim].iter().zip(&b128[..lim]) {
                    acc[*k as usize] += ai * bj;
                }
            }
            for (o, v) in out.iter_mut().zip(acc) {
                if v != 0 {
                    *o += &Rational::new(BigInt::from(v), den.clone());
                }
            }
        } else {
            let mut acc = vec![BigInt::zero(); n_out];
            for (i, ai) in an.iter().enumerate() {
                if ai.is_zero() {
                    continue;
                }
                let row = basis.product_row(i);
                let lim = basis.count(cap - basis.degree_of(i)).min(bn.len());
                for (k, bj) in row[..lim].iter().zip(&bn[..lim]) {
                    if !bj.is_zero() {
                        acc[*k as usize] += ai * bj;
                    }
                }
            }
            for (o, v) in out.iter_mut().zip(acc) {
                if !v.is_zero() {
                    *o += &Rational::new(v, den.clone());
                }
            }
        }
    }
}
