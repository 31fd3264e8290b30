//! Exact finite-sample accuracy analysis in the Fourier domain, plus the
//! closed-form risk bounds and optimal smoothing rules they imply.
//!
//! For a flat-top kernel with coefficients `g(t)` and a target density with
//! coefficients `φ_t`, the integrated squared bias and integrated variance
//! of the estimator are exactly
//!
//! ```text
//! ISB = (1/π) Σ_{t≥1} |φ_t|² (1 − g(t))²
//! IV  = (1/(πn)) Σ_{t≥1} g(t)² (1 − |φ_t|²)
//! ```
//!
//! (the t = 0 terms vanish; Hermitian symmetry supplies the factor 2).
//! These drive [`exact_mise`], the variance bound `cν/(πn)`, the spectral
//! smoothness constants `C_r` and `I_{α,τ}`, their induced bias bounds, and
//! the smoothing parameters that balance the two error terms.

use std::f64::consts::PI;

use serde::Serialize;

use crate::circular::CharSeq;
use crate::kernels::FlatTopKernel;
use crate::{Error, Result};

/// Tolerated tail contribution for the exact error sums.
const TAIL_LIMIT: f64 = 1e-12;

/// Tolerated last-decade share for the weighted-series constants.
const DECADE_SHARE_LIMIT: f64 = 1e-6;

/// Exact error decomposition of one estimator configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MiseReport {
    /// Integrated squared bias.
    pub isb: f64,
    /// Integrated variance.
    pub iv: f64,
    /// Mean integrated squared error, identically `isb + iv`.
    pub mise: f64,
    /// Largest density coefficient index entering the sums.
    pub truncation_index: usize,
    /// Bound on what the discarded coefficients could contribute
    /// (0 for densities with finite spectral support).
    pub truncation_tail_bound: f64,
}

/// Checks that the coefficients reach far enough for the stated precision
/// and returns the bound on what lies beyond them, divided by π (the scale
/// at which it enters both error sums).
pub(crate) fn tail_contribution(f_char: &CharSeq) -> Result<f64> {
    if !f_char.truncated() {
        return Ok(0.0);
    }
    let index = f_char.max_index();
    match f_char.tail_sq_bound() {
        Some(bound) => {
            let contribution = bound / PI;
            if contribution < TAIL_LIMIT {
                Ok(contribution)
            } else {
                Err(Error::TailBoundExceeded {
                    index,
                    bound: contribution,
                    limit: TAIL_LIMIT,
                })
            }
        }
        None => Err(Error::TailBoundExceeded {
            index,
            bound: f64::INFINITY,
            limit: TAIL_LIMIT,
        }),
    }
}

/// Exact integrated squared bias `(1/π) Σ_{t≥1} |φ_t|² (1 − g(t))²`.
///
/// Zero exactly when every nonzero density coefficient falls inside the
/// kernel's flat region (finite spectral support with ⌊ν⌋ past it).
///
/// # Errors
///
/// The density's coefficients must extend far enough that the discarded
/// tail contributes less than 1e-12; otherwise the tail bound is reported.
pub fn exact_isb(f_char: &CharSeq, kernel: &FlatTopKernel) -> Result<f64> {
    tail_contribution(f_char)?;
    let mut sum = 0.0;
    for t in 1..=f_char.max_index() as i64 {
        let weight = 1.0 - kernel.char_coeff(t);
        sum += f_char.get(t).norm_sqr() * weight * weight;
    }
    Ok(sum / PI)
}

/// Exact integrated variance `(1/(πn)) Σ_{t≥1} g(t)² (1 − |φ_t|²)`, summed
/// over the kernel's nonzero coefficients.
///
/// # Errors
///
/// Coefficient range as in [`exact_isb`]; n must be positive.
pub fn exact_iv(f_char: &CharSeq, kernel: &FlatTopKernel, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "sample size must be positive".into(),
        ));
    }
    tail_contribution(f_char)?;
    let mut sum = 0.0;
    for t in 1..=kernel.support_end() as i64 {
        let coeff = kernel.char_coeff(t);
        sum += coeff * coeff * (1.0 - f_char.get(t).norm_sqr());
    }
    Ok(sum / (PI * n as f64))
}

/// Exact mean integrated squared error, split into its bias and variance
/// parts.
///
/// # Errors
///
/// As [`exact_isb`] and [`exact_iv`].
pub fn exact_mise(f_char: &CharSeq, kernel: &FlatTopKernel, n: usize) -> Result<MiseReport> {
    let tail = tail_contribution(f_char)?;
    let isb = exact_isb(f_char, kernel)?;
    let iv = exact_iv(f_char, kernel, n)?;
    Ok(MiseReport {
        isb,
        iv,
        mise: isb + iv,
        truncation_index: f_char.max_index(),
        truncation_tail_bound: tail,
    })
}

/// The variance bound `cν/(πn)`, valid for every density.
pub fn iv_bound(nu: f64, c: f64, n: usize) -> f64 {
    c * nu / (PI * n as f64)
}

/// Spectral smoothness constant `C_r = (1/π) Σ_{t≥1} t^{2r} |φ_t|²`.
///
/// For coefficients that stop at a finite support the sum is exact. For
/// truncated sequences the last decade of indices (T/10, T] must contribute
/// less than 1e-6 of the running sum, evidence that the weighted series has
/// effectively converged; slowly decaying spectra (polynomial tails near
/// the weight's critical rate) fail this monitor and must be handled
/// analytically by the caller.
///
/// # Errors
///
/// r must be positive; an unconverged series is reported with its
/// last-decade share.
pub fn smoothness_const(f_char: &CharSeq, r: f64) -> Result<f64> {
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "smoothness order must be positive, got {r}"
        )));
    }
    weighted_coeff_sum(f_char, |t| 2.0 * r * t.ln()).map(|sum| sum / PI)
}

/// Exponential-weight constant `I_{α,τ} = (2π)⁻¹ Σ_t e^{τ|t|^α} |φ_t|²`
/// (the t = 0 term contributes 1).
///
/// Convergence is monitored as in [`smoothness_const`]; the series only
/// converges when the weight grows slower than the coefficients decay.
///
/// # Errors
///
/// α and τ must be positive; an unconverged series is reported with its
/// last-decade share.
pub fn exp_const(f_char: &CharSeq, alpha: f64, tau: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 || !tau.is_finite() || tau <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "exponential weight needs positive alpha and tau, got ({alpha}, {tau})"
        )));
    }
    weighted_coeff_sum(f_char, |t| tau * t.powf(alpha))
        .map(|sum| (1.0 + 2.0 * sum) / (2.0 * PI))
}

/// `Σ_{t≥1} e^{log_weight(t)} |φ_t|²` with the last-decade convergence
/// monitor. Terms are assembled in log space so enormous weights against
/// tiny coefficients cannot overflow.
fn weighted_coeff_sum<W: Fn(f64) -> f64>(f_char: &CharSeq, log_weight: W) -> Result<f64> {
    let max_index = f_char.max_index();
    let decade_start = max_index as f64 / 10.0;
    let mut total = 0.0;
    let mut last_decade = 0.0;
    for t in 1..=max_index as i64 {
        let norm_sq = f_char.get(t).norm_sqr();
        if norm_sq == 0.0 {
            continue;
        }
        let term = (log_weight(t as f64) + norm_sq.ln()).exp();
        total += term;
        if t as f64 > decade_start {
            last_decade += term;
        }
    }
    if f_char.truncated() && total > 0.0 {
        let share = last_decade / total;
        if share >= DECADE_SHARE_LIMIT {
            return Err(Error::ConvergenceUncertain { share });
        }
    }
    Ok(total)
}

/// Bias bound `C_r / ν^{2r}` under polynomial spectral decay.
///
/// # Errors
///
/// Needs positive r and ν.
pub fn isb_bound_poly(c_r: f64, r: f64, nu: f64) -> Result<f64> {
    if !r.is_finite() || r <= 0.0 || !nu.is_finite() || nu <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "polynomial bias bound needs positive r and nu, got ({r}, {nu})"
        )));
    }
    Ok(c_r / nu.powf(2.0 * r))
}

/// Bias bound `I_{α,τ} · e^{−τν^α}` under exponential spectral decay.
///
/// # Errors
///
/// Needs positive α, τ, and ν.
pub fn isb_bound_exp(i_const: f64, alpha: f64, tau: f64, nu: f64) -> Result<f64> {
    if !alpha.is_finite()
        || alpha <= 0.0
        || !tau.is_finite()
        || tau <= 0.0
        || !nu.is_finite()
        || nu <= 0.0
    {
        return Err(Error::InvalidParameter(format!(
            "exponential bias bound needs positive alpha, tau, nu, got ({alpha}, {tau}, {nu})"
        )));
    }
    Ok(i_const * (-tau * nu.powf(alpha)).exp())
}

/// The smoothing parameter `ν_r = [2πr C_r n / c]^{1/(2r+1)}` balancing
/// `C_r/ν^{2r}` against `cν/(πn)`; real-valued — floor it to build a kernel.
///
/// # Errors
///
/// Needs positive r, C_r, n, and c ≥ 1.
pub fn optimal_nu_poly(r: f64, c_r: f64, c: f64, n: usize) -> Result<f64> {
    if !r.is_finite() || r <= 0.0 || !c_r.is_finite() || c_r <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "optimal smoothing needs positive r and C_r, got ({r}, {c_r})"
        )));
    }
    if !c.is_finite() || c < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "taper width must be at least 1, got {c}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter(
            "sample size must be positive".into(),
        ));
    }
    Ok((2.0 * PI * r * c_r * n as f64 / c).powf(1.0 / (2.0 * r + 1.0)))
}

/// The smoothing parameter `⌊(τ⁻¹ log n)^{1/α}⌋` for exponentially decaying
/// spectra.
///
/// # Errors
///
/// Needs positive τ, α, and n.
pub fn optimal_nu_exp(tau: f64, alpha: f64, n: usize) -> Result<usize> {
    if !tau.is_finite() || tau <= 0.0 || !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "optimal smoothing needs positive tau and alpha, got ({tau}, {alpha})"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter(
            "sample size must be positive".into(),
        ));
    }
    Ok(((n as f64).ln() / tau).powf(1.0 / alpha).floor() as usize)
}
