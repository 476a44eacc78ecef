//! Spectral analysis of generalized indefinite strings.
//!
//! A string is a triple (L, ω, υ): a length 0 < L ≤ ∞, a real distribution ω
//! on [0, L) given through its anti-derivative w, and a nonnegative Borel
//! measure υ. The associated spectral problem is −f″ = z·ω·f + z²·υ·f on the
//! energy space of functions with f(0) = 0 and square-integrable derivative.
//!
//! The crate discretizes that problem (hat basis plus a plateau element on the
//! half line), solves the resulting matrix pencil two independent ways,
//! classifies spectra from closed-form tail data (boundedness away from zero,
//! discreteness, Schatten-class summability, trace sums), and carries the
//! exact point-mass reference model together with the reductions for
//! Camassa–Holm and δ′-interaction Hamiltonians.
//!
//! Works without the standard library: disable default features and enable
//! `libm` (allocation is required).

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod camassa_holm;
pub mod coefficients;
pub mod criteria;
pub mod delta_prime;
pub mod discretization;
pub mod error;
pub mod integral_ops;
pub mod oracle;
pub mod pencil;
pub mod poly;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
