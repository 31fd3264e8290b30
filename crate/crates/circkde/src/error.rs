//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by estimation, selection, simulation, and I/O routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An angle was NaN or infinite where a finite value is required.
    #[error("angle is not finite: {0}")]
    NonFiniteAngle(f64),

    /// A routine received fewer observations than it needs.
    #[error("sample too small: need at least {needed} observations, got {got}")]
    SampleTooSmall { needed: usize, got: usize },

    /// A parameter was outside its valid range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The Bessel series argument is large enough to overflow `f64`.
    #[error("modified Bessel function I_{order}({x}) would overflow")]
    BesselOverflow { order: u32, x: f64 },

    /// An iterative series failed to converge within the iteration budget.
    #[error("series did not converge within the iteration limit")]
    NoConvergence,

    /// Numerically integrated Fourier coefficients do not describe a density.
    #[error("function does not integrate to one: coefficient at index zero is {phi0}")]
    NotADensity { phi0: f64 },

    /// An evaluation or integration grid has too few points.
    #[error("grid too small: need at least {needed} points, got {got}")]
    GridTooSmall { needed: usize, got: usize },

    /// A truncated coefficient series carries too much unaccounted tail mass.
    #[error(
        "coefficient tail beyond index {index} cannot be bounded below {limit:.3e} (bound {bound:.3e})"
    )]
    TailBoundExceeded { index: usize, bound: f64, limit: f64 },

    /// A summed series shows no sign of settling, so its value is untrustworthy.
    #[error("series convergence uncertain: trailing terms still contribute a {share:.3e} share")]
    ConvergenceUncertain { share: f64 },

    /// A spectral-domain routine was asked to use a kernel without finite
    /// Fourier support.
    #[error("kernel has unbounded Fourier support; spectral evaluation is unavailable")]
    InfiniteSupportKernel,

    /// Random variate generation is not implemented for these parameters.
    #[error("sampling is not implemented for wrapped stable with alpha={alpha}, beta={beta}")]
    UnsupportedSampling { alpha: f64, beta: f64 },

    /// A scenario id is not in the catalog.
    #[error("unknown scenario id: {0}")]
    UnknownScenario(String),

    /// An estimator description string could not be parsed.
    #[error("bad estimator spec '{spec}': {reason}")]
    BadEstimatorSpec { spec: String, reason: String },

    /// An underlying file operation failed.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A data file row could not be parsed; `row` is 1-based and counts the
    /// header as row 1.
    #[error("{path}: row {row}: {reason}")]
    BadRow {
        path: String,
        row: usize,
        reason: String,
    },

    /// The requested column is missing from the CSV header.
    #[error("column '{0}' not found in header")]
    MissingColumn(String),

    /// A data file contains a header but no data rows.
    #[error("{0}: no data rows")]
    EmptyFile(String),
}

impl Error {
    /// Process exit code for command-line reporting: 1 for usage errors,
    /// 2 for data errors, 3 for numerical errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_)
            | Error::UnknownScenario(_)
            | Error::BadEstimatorSpec { .. } => 1,
            Error::NonFiniteAngle(_)
            | Error::SampleTooSmall { .. }
            | Error::Io { .. }
            | Error::BadRow { .. }
            | Error::MissingColumn(_)
            | Error::EmptyFile(_) => 2,
            Error::BesselOverflow { .. }
            | Error::NoConvergence
            | Error::NotADensity { .. }
            | Error::GridTooSmall { .. }
            | Error::TailBoundExceeded { .. }
            | Error::ConvergenceUncertain { .. }
            | Error::InfiniteSupportKernel
            | Error::UnsupportedSampling { .. } => 3,
        }
    }
}
