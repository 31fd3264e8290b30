//! Kernel density estimation for circular data.
//!
//! This crate estimates densities on the circle `[0, 2π)` with flat-top
//! kernels defined by their Fourier coefficients: coefficients are exactly 1
//! up to a cutoff `⌊ν⌋`, taper linearly to 0 over `(⌊ν⌋, c⌊ν⌋)`, and vanish
//! beyond. The two named members of the family are the wrapped sinc (`c = 1`,
//! no taper) and the wrapped trapezoid (`c ≥ 2`). Because the coefficients
//! have finite support, integrated squared bias, variance, and cross-validation
//! scores all reduce to finite sums that this crate evaluates exactly.
//!
//! What is provided, by module:
//!
//! - [`circular`]: angle wrapping, empirical characteristic functions,
//!   Fourier coefficient series ([`circular::CharSeq`]), modified Bessel
//!   functions, and periodic quadrature.
//! - [`kernels`]: closed-form flat-top kernels and the von Mises kernel.
//! - [`estimator`]: the density estimator itself, with spectral and direct
//!   evaluation paths and optional nonnegativity corrections.
//! - [`selectors`]: least-squares cross-validation (flat-top and von Mises)
//!   and an empirical-rule cutoff selector.
//! - [`distributions`]: circular distributions (von Mises, wrapped normal,
//!   wrapped Cauchy, cardioid, triangular, wrapped skew-normal, wrapped
//!   stable, uniform), their densities, characteristic coefficients, and
//!   samplers, plus a catalog of mixture scenarios for simulation studies.
//! - [`mise`]: exact mean integrated squared error decompositions and the
//!   classical risk bounds and rate constants.
//! - [`simulation`]: a seeded, parallel Monte Carlo harness with integrated
//!   squared error summaries and convergence-rate studies.
//! - [`io`]: CSV ingestion of angular data and report export.

pub mod circular;
pub mod distributions;
pub mod estimator;
pub mod io;
pub mod kernels;
pub mod mise;
pub mod selectors;
pub mod simulation;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
