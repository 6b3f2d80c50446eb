//! Conformal curvature invariants computed on truncated Taylor jets of a
//! Riemannian metric.
//!
//! The crate is organised bottom-up:
//!
//! * [`series`]: exact or floating truncated multivariate Taylor series, and
//!   the radial ring carrying `x^k` and `x^k log x` terms.
//! * [`tensor`]: indexed tensors of jets with symmetry-aware storage, metric
//!   contraction and Levi-Civita differentiation.
//! * [`curvature`]: Riemann, Ricci, Schouten, Weyl, Cotton and Bach tensors, the
//!   closed-form obstruction tensors in dimensions 4 and 6, the self-dual split
//!   of Weyl and the four-dimensional Q-curvature.
//! * [`fg`]: the order-by-order Poincare-metric expansion, its obstruction and
//!   log coefficient, and the Einstein/Bianchi residual oracles.
//! * [`volume`]: renormalized-volume coefficients, spectral quadrature on the flat
//!   torus and the variational identities for the integral of Q.
//!
//! Everything except the quadrature drivers is generic over a [`Scalar`]
//! backend: [`Rational`] (arbitrary precision, exact) or `f64`.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is off.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod builtin;
pub mod curvature;
mod error;
pub mod fg;
mod scalar;
pub mod series;
pub mod tensor;
pub mod volume;

pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};
