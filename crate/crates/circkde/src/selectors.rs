//! Data-driven smoothing selection: least-squares cross-validation for the
//! flat-top and von Mises kernels, and the empirical rule.
//!
//! The cross-validation criterion is
//! `CV = ∫ f̂² − (2/n) Σ_i f̂_{−i}(Θ_i)`,
//! the unbiased-up-to-a-constant risk proxy. For flat-top kernels it
//! collapses to a closed spectral form over the sample's power spectrum
//! `|S_t|²`, which is what makes scanning ν cheap; the identity is checked
//! against the definitional double loop in this module's tests. The
//! empirical rule instead looks for the first index beyond which the
//! squared empirical coefficients stay inside the noise band `M log n / n`.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::circular::{ecf_series, trapezoid_integral};
use crate::estimator::{Correction, DensityEstimate};
use crate::kernels::{FlatTopKernel, VonMisesKernel};
use crate::{Error, Result};

/// Default cross-validation search cap for ν.
pub const DEFAULT_LSCV_CAP: usize = 30;
/// Default empirical-rule threshold scale M.
pub const DEFAULT_ER_SCALE: f64 = 1.0;
/// Default empirical-rule window length ℓ.
pub const DEFAULT_ER_WINDOW: usize = 5;
/// Default empirical-rule search cap for ν.
pub const DEFAULT_ER_CAP: usize = 50;

/// Outcome of a smoothing-parameter search.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectorResult {
    /// Selected parameter: an integer ν for flat-top kernels, a
    /// concentration κ for the von Mises kernel.
    pub chosen: f64,
    /// Every candidate examined with its criterion value (the CV score, or
    /// the empirical rule's window peak).
    pub criterion_trace: Vec<(f64, f64)>,
    /// Whether the search ended pinned at its cap.
    pub at_boundary: bool,
}

/// 40 log-spaced von Mises concentrations spanning [0.1, 500].
pub fn default_kappa_grid() -> Vec<f64> {
    let (lo, hi, count) = (0.1f64, 500.0f64, 40);
    let step = (hi.ln() - lo.ln()) / (count - 1) as f64;
    (0..count).map(|i| (lo.ln() + step * i as f64).exp()).collect()
}

/// Least-squares cross-validation over ν ∈ {0, …, cap} for a flat-top
/// kernel with taper width c.
///
/// Each CV(ν) is computed by the spectral identity
/// `CV(ν) = (2π)⁻¹ Σ_t [ φ_t(K)² |S_t|²/n² − 2 φ_t(K) (|S_t|² − n)/(n(n−1)) ]`
/// summed over the kernel's nonzero coefficients (`S_t = Σ_j e^{itΘ_j}`; the
/// t = 0 term contributes the constant −1/2π). Ties go to the smallest ν.
///
/// # Errors
///
/// Needs n ≥ 2 and cap ≥ 1; invalid taper widths are rejected by the kernel.
pub fn lscv_flat_top(sample: &[f64], c: u32, cap: usize) -> Result<SelectorResult> {
    if sample.len() < 2 {
        return Err(Error::SampleTooSmall {
            needed: 2,
            got: sample.len(),
        });
    }
    if cap == 0 {
        return Err(Error::InvalidParameter(
            "cross-validation cap must be at least 1".into(),
        ));
    }
    let widest = FlatTopKernel::new(cap as f64, c)?;
    let ecf = ecf_series(sample, widest.support_end())?;
    let n = sample.len() as f64;
    let pair_scale = 2.0 / (n * (n - 1.0));

    let mut criterion_trace = Vec::with_capacity(cap + 1);
    for nu in 0..=cap {
        let kernel = FlatTopKernel::new(nu as f64, c)?;
        let mut sum = 0.0;
        for t in 1..=kernel.support_end() {
            let coeff = kernel.char_coeff(t as i64);
            let s_sq = ecf.get(t as i64).norm_sqr() * n * n;
            sum += coeff * coeff * s_sq / (n * n) - pair_scale * coeff * (s_sq - n);
        }
        let cv = (-1.0 + 2.0 * sum) / TAU;
        criterion_trace.push((nu as f64, cv));
    }

    let (chosen, _) = criterion_trace
        .iter()
        .copied()
        .reduce(|best, cand| if cand.1 < best.1 { cand } else { best })
        .expect("trace is non-empty");
    Ok(SelectorResult {
        chosen,
        criterion_trace,
        at_boundary: chosen == cap as f64,
    })
}

/// The empirical rule: the smallest ν ≥ 0 whose following window of
/// squared empirical coefficients `|φ̂_{ν+t}|², t = 1..window` lies strictly
/// below the noise threshold `scale · log n / n`.
///
/// If no ν up to `cap` qualifies, `cap` is returned with the boundary flag
/// set. The trace records each examined ν with its window peak.
///
/// # Errors
///
/// Needs n ≥ 2, positive finite `scale`, and window/cap ≥ 1.
pub fn er_selector(
    sample: &[f64],
    scale: f64,
    window: usize,
    cap: usize,
) -> Result<SelectorResult> {
    if sample.len() < 2 {
        return Err(Error::SampleTooSmall {
            needed: 2,
            got: sample.len(),
        });
    }
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "empirical-rule threshold scale must be positive, got {scale}"
        )));
    }
    if window == 0 || cap == 0 {
        return Err(Error::InvalidParameter(
            "empirical-rule window and cap must be at least 1".into(),
        ));
    }
    let n = sample.len() as f64;
    let threshold = scale * n.ln() / n;
    let ecf = ecf_series(sample, cap + window)?;

    let mut criterion_trace = Vec::new();
    for nu in 0..=cap {
        let peak = (1..=window)
            .map(|t| ecf.get((nu + t) as i64).norm_sqr())
            .fold(0.0, f64::max);
        criterion_trace.push((nu as f64, peak));
        if peak < threshold {
            return Ok(SelectorResult {
                chosen: nu as f64,
                criterion_trace,
                at_boundary: nu == cap,
            });
        }
    }
    Ok(SelectorResult {
        chosen: cap as f64,
        criterion_trace,
        at_boundary: true,
    })
}

/// Least-squares cross-validation for the von Mises kernel over an explicit
/// concentration grid.
///
/// CV(κ) is computed from the definition: `∫ f̂²` by 512-point quadrature
/// plus the leave-one-out double loop. Ties go to the smallest grid index;
/// the boundary flag reports whether the largest grid value won.
///
/// # Errors
///
/// Needs n ≥ 2 and a non-empty grid of valid concentrations.
pub fn lscv_von_mises(sample: &[f64], kappa_grid: &[f64]) -> Result<SelectorResult> {
    if sample.len() < 2 {
        return Err(Error::SampleTooSmall {
            needed: 2,
            got: sample.len(),
        });
    }
    if kappa_grid.is_empty() {
        return Err(Error::InvalidParameter(
            "concentration grid must be non-empty".into(),
        ));
    }
    let n = sample.len() as f64;
    let pair_scale = 2.0 / (n * (n - 1.0));

    let criterion_trace: Vec<(f64, f64)> = kappa_grid
        .par_iter()
        .map(|&kappa| -> Result<(f64, f64)> {
            let kernel = VonMisesKernel::new(kappa)?;
            let estimate = DensityEstimate::fit(sample, kernel, Correction::None)?;
            let squared: Vec<f64> = estimate
                .eval_grid(512)
                .into_iter()
                .map(|v| v * v)
                .collect();
            let integral = trapezoid_integral(&squared)?;
            let mut pair_sum = 0.0;
            for (i, &a) in sample.iter().enumerate() {
                for &b in &sample[i + 1..] {
                    pair_sum += kernel.eval(a - b);
                }
            }
            Ok((kappa, integral - pair_scale * 2.0 * pair_sum))
        })
        .collect::<Result<_>>()?;

    let (chosen, _) = criterion_trace
        .iter()
        .copied()
        .reduce(|best, cand| if cand.1 < best.1 { cand } else { best })
        .expect("grid is non-empty");
    let cap = kappa_grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(SelectorResult {
        chosen,
        criterion_trace,
        at_boundary: chosen == cap,
    })
}
