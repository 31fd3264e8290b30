//! Angles, Fourier coefficient series, and quadrature on the circle.
//!
//! Everything downstream — kernels, estimators, risk formulas, selectors —
//! works in terms of Fourier coefficients `φ_t(f) = ∫ f(θ) e^{itθ} dθ`.
//! This module provides the shared plumbing: angle reduction to `[0, 2π)`,
//! the coefficient container [`CharSeq`], empirical characteristic functions,
//! modified Bessel functions (needed by the von Mises family), and periodic
//! trapezoidal quadrature.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::{Error, Result};

/// Maximum number of power-series terms attempted by [`bessel_i`].
const BESSEL_MAX_TERMS: usize = 500;

/// Largest argument accepted by [`bessel_i`]; beyond this `I_0(x)` leaves the
/// `f64` range.
const BESSEL_MAX_ARG: f64 = 705.0;

/// Reduces an angle modulo 2π into `[0, 2π)`.
///
/// # Errors
///
/// Rejects NaN and infinite input.
pub fn wrap_angle(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFiniteAngle(x));
    }
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs.
    Ok(if r >= TAU { 0.0 } else { r })
}

/// Modified Bessel function of the first kind `I_order(x)` for integer order,
/// by ascending power series.
///
/// All series terms are positive, so summation stops once the next term falls
/// below `1e-16` of the running sum; relative accuracy is ≤ 1e-12 for
/// `x ≤ 100`.
///
/// # Errors
///
/// Rejects negative or non-finite `x`, reports overflow for `x > 705` (where
/// `I_0` leaves the `f64` range) rather than saturating, and reports failure
/// to converge within 500 terms.
pub fn bessel_i(order: u32, x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "bessel_i argument must be finite and non-negative, got {x}"
        )));
    }
    if x > BESSEL_MAX_ARG {
        return Err(Error::BesselOverflow { order, x });
    }
    let half = x / 2.0;
    // Leading term (x/2)^order / order!, built incrementally so large orders
    // underflow gracefully instead of overflowing part-way.
    let mut term = 1.0_f64;
    for k in 1..=order {
        term *= half / f64::from(k);
    }
    if term == 0.0 {
        // x = 0 (or underflow so deep the whole series is 0 at f64 precision).
        return Ok(if order == 0 { 1.0 } else { 0.0 });
    }
    let mut sum = term;
    let x2 = half * half;
    for k in 1..=BESSEL_MAX_TERMS {
        let kf = k as f64;
        term *= x2 / (kf * (kf + f64::from(order)));
        sum += term;
        // Non-strict: when the whole series is subnormal, `sum * 1e-16`
        // underflows to zero and the terms themselves eventually hit zero.
        if term <= sum * 1e-16 {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence)
}

/// A Hermitian sequence of Fourier coefficients `φ_t`, stored for `t ≥ 0`.
///
/// Index `t = 0` is always present; negative indices are recovered by complex
/// conjugation, and indices beyond [`CharSeq::max_index`] are zero — either
/// exactly (finite spectral support) or by truncation, in which case
/// [`CharSeq::truncated`] is set and an upper bound on the discarded energy
/// `Σ_{t > T} |φ_t|²` may be attached.
#[derive(Debug, Clone)]
pub struct CharSeq {
    coeffs: Vec<Complex64>,
    truncated: bool,
    tail_sq_bound: Option<f64>,
}

impl CharSeq {
    /// Wraps coefficients `φ_0, …, φ_T`. Set `truncated` when indices beyond
    /// `T` are nonzero but dropped.
    ///
    /// # Errors
    ///
    /// The sequence must contain at least `φ_0`.
    pub fn new(coeffs: Vec<Complex64>, truncated: bool) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter(
                "coefficient sequence must contain at least the index-zero entry".into(),
            ));
        }
        Ok(CharSeq {
            coeffs,
            truncated,
            tail_sq_bound: None,
        })
    }

    /// Attaches an upper bound on the one-sided discarded energy
    /// `Σ_{t > max_index} |φ_t|²`.
    pub fn with_tail_sq_bound(mut self, bound: f64) -> Self {
        self.tail_sq_bound = Some(bound);
        self
    }

    /// Coefficient at any integer index, using Hermitian symmetry for `t < 0`
    /// and zero beyond the stored range.
    pub fn get(&self, t: i64) -> Complex64 {
        let a = t.unsigned_abs() as usize;
        if a >= self.coeffs.len() {
            return Complex64::ZERO;
        }
        if t < 0 {
            self.coeffs[a].conj()
        } else {
            self.coeffs[a]
        }
    }

    /// Largest stored index `T`.
    pub fn max_index(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Whether nonzero coefficients beyond [`CharSeq::max_index`] were
    /// dropped.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// Upper bound on the one-sided discarded energy, when known.
    pub fn tail_sq_bound(&self) -> Option<f64> {
        if self.truncated {
            self.tail_sq_bound
        } else {
            Some(0.0)
        }
    }
}

/// Uniform grid `θ_j = 2πj/G`, `j = 0..G` (no duplicated endpoint).
pub fn circle_grid(grid_size: usize) -> Vec<f64> {
    (0..grid_size)
        .map(|j| TAU * j as f64 / grid_size as f64)
        .collect()
}

/// Fourier coefficients `φ_t = ∫ f(θ) e^{itθ} dθ` for `t = 0..=max_index`,
/// by trapezoidal quadrature on a uniform circular grid.
///
/// The result is marked truncated: nothing is known about coefficients
/// beyond `max_index`.
///
/// # Errors
///
/// Requires `grid_size ≥ max(8, 4·max_index)` for Nyquist margin, and rejects
/// input whose zeroth coefficient differs from 1 by more than 1e-6 (not a
/// probability density).
pub fn fourier_coeffs_numeric<F>(density: F, max_index: usize, grid_size: usize) -> Result<CharSeq>
where
    F: Fn(f64) -> f64,
{
    let needed = (4 * max_index).max(8);
    if grid_size < needed {
        return Err(Error::GridTooSmall {
            needed,
            got: grid_size,
        });
    }
    let mut coeffs = vec![Complex64::ZERO; max_index + 1];
    for j in 0..grid_size {
        let theta = TAU * j as f64 / grid_size as f64;
        let f = density(theta);
        let z = Complex64::from_polar(1.0, theta);
        // w walks through f(θ_j)·e^{itθ_j} as t increases.
        let mut w = Complex64::new(f, 0.0);
        for c in coeffs.iter_mut() {
            *c += w;
            w *= z;
        }
    }
    let scale = TAU / grid_size as f64;
    for c in coeffs.iter_mut() {
        *c *= scale;
    }
    let phi0 = coeffs[0].re;
    if (phi0 - 1.0).abs() > 1e-6 || coeffs[0].im.abs() > 1e-6 {
        return Err(Error::NotADensity { phi0 });
    }
    CharSeq::new(coeffs, true)
}

/// Empirical characteristic function `n⁻¹ Σ_j e^{itΘ_j}` at a single index.
///
/// The exponent is positive, matching the forward transform
/// `φ_t(f) = ∫ f e^{itθ} dθ`; only squared magnitudes are consumed by the
/// selectors, so the sign choice is observationally irrelevant there.
///
/// # Errors
///
/// Rejects an empty sample.
pub fn ecf(sample: &[f64], t: i64) -> Result<Complex64> {
    if sample.is_empty() {
        return Err(Error::SampleTooSmall { needed: 1, got: 0 });
    }
    let sum: Complex64 = sample
        .iter()
        .map(|&theta| Complex64::from_polar(1.0, t as f64 * theta))
        .sum();
    Ok(sum / sample.len() as f64)
}

/// Empirical characteristic function at every index `t = 0..=max_index`,
/// as a coefficient sequence (negative indices by Hermitian symmetry).
///
/// Equivalent to calling [`ecf`] per index but builds the powers `e^{itΘ_j}`
/// incrementally, which is what the estimator and selectors need. The
/// sequence is marked truncated with no tail bound: empirical coefficients
/// do not decay.
///
/// # Errors
///
/// Rejects an empty sample.
pub fn ecf_series(sample: &[f64], max_index: usize) -> Result<CharSeq> {
    if sample.is_empty() {
        return Err(Error::SampleTooSmall { needed: 1, got: 0 });
    }
    let mut acc = vec![Complex64::ZERO; max_index + 1];
    for &theta in sample {
        let z = Complex64::from_polar(1.0, theta);
        let mut w = Complex64::ONE;
        for a in acc.iter_mut() {
            *a += w;
            w *= z;
        }
    }
    let inv_n = 1.0 / sample.len() as f64;
    for a in acc.iter_mut() {
        *a *= inv_n;
    }
    CharSeq::new(acc, true)
}

/// Integral over `[0, 2π)` of a function sampled on the uniform circular grid
/// `θ_j = 2πj/G`: the periodic trapezoid rule, `(2π/G) Σ values`.
///
/// # Errors
///
/// Requires at least 8 grid points.
pub fn trapezoid_integral(values: &[f64]) -> Result<f64> {
    if values.len() < 8 {
        return Err(Error::GridTooSmall {
            needed: 8,
            got: values.len(),
        });
    }
    Ok(TAU / values.len() as f64 * values.iter().sum::<f64>())
}

#[cfg(test)]
mod tests {
    // Reference constants carry their full independently computed
    // precision; the compiler rounding them to f64 is expected.
    #![allow(clippy::excessive_precision)]

    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_angle_identities() {
        assert_eq!(wrap_angle(0.0).unwrap(), 0.0);
        assert_eq!(wrap_angle(TAU).unwrap(), 0.0);
        assert_abs_diff_eq!(
            wrap_angle(-PI / 2.0).unwrap(),
            3.0 * PI / 2.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn wrap_angle_rejects_non_finite() {
        assert!(wrap_angle(f64::NAN).is_err());
        assert!(wrap_angle(f64::INFINITY).is_err());
        assert!(wrap_angle(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn wrap_angle_handles_tiny_negatives() {
        // -1e-20 mod 2π rounds to exactly 2π; the result must stay below it.
        let r = wrap_angle(-1e-20).unwrap();
        assert!((0.0..TAU).contains(&r));
    }

    proptest! {
        #[test]
        fn wrap_angle_lands_in_range(x in -1e9f64..1e9f64) {
            let r = wrap_angle(x).unwrap();
            prop_assert!((0.0..TAU).contains(&r));
        }
    }

    #[test]
    fn bessel_small_order_values() {
        // Reference values from a 40-digit power-series evaluation.
        assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            bessel_i(1, 2.0).unwrap(),
            1.5906368546373290634,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            bessel_i(0, 2.0).unwrap(),
            2.2795853023360672674,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            bessel_i(5, 0.3).unwrap(),
            6.3518936427803162434e-7,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            bessel_i(0, 1.0).unwrap(),
            1.2660658777520083356,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            bessel_i(10, 10.0).unwrap(),
            21.891706163723370526,
            max_relative = 1e-13
        );
    }

    #[test]
    fn bessel_large_argument_values() {
        assert_relative_eq!(
            bessel_i(0, 50.0).unwrap(),
            2.9325537838493363267e20,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            bessel_i(25, 50.0).unwrap(),
            6.0388390503700175592e17,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            bessel_i(0, 100.0).unwrap(),
            1.0737517071310738235e42,
            max_relative = 1e-12
        );
        // Beyond the accuracy promise but well within range.
        assert_relative_eq!(
            bessel_i(0, 500.0).unwrap(),
            2.5048094765700780966e215,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            bessel_i(150, 500.0).unwrap(),
            4.8882964482285023997e205,
            max_relative = 1e-10
        );
    }

    #[test]
    fn bessel_overflow_and_domain_errors() {
        assert!(matches!(
            bessel_i(0, 706.0),
            Err(Error::BesselOverflow { .. })
        ));
        assert!(bessel_i(0, -1.0).is_err());
        assert!(bessel_i(0, f64::NAN).is_err());
    }

    #[test]
    fn bessel_ratio_decreases_in_order() {
        for &kappa in &[0.5, 1.0, 4.0, 50.0] {
            let i0 = bessel_i(0, kappa).unwrap();
            let mut prev = 1.0;
            for t in 1..=20 {
                let ratio = bessel_i(t, kappa).unwrap() / i0;
                assert!(
                    ratio < prev,
                    "I_{t}({kappa})/I_0 = {ratio} did not drop below {prev}"
                );
                prev = ratio;
            }
        }
    }

    #[test]
    fn char_seq_hermitian_lookup() {
        let seq = CharSeq::new(
            vec![Complex64::ONE, Complex64::new(0.3, 0.4)],
            false,
        )
        .unwrap();
        assert_eq!(seq.max_index(), 1);
        assert_eq!(seq.get(1), Complex64::new(0.3, 0.4));
        assert_eq!(seq.get(-1), Complex64::new(0.3, -0.4));
        assert_eq!(seq.get(2), Complex64::ZERO);
        assert_eq!(seq.get(-7), Complex64::ZERO);
        // Exact sequences have a zero tail by construction.
        assert_eq!(seq.tail_sq_bound(), Some(0.0));
    }

    #[test]
    fn char_seq_requires_index_zero() {
        assert!(CharSeq::new(vec![], false).is_err());
    }

    #[test]
    fn ecf_examples() {
        let one = ecf(&[0.7, 1.1, 5.3], 0).unwrap();
        assert_abs_diff_eq!(one.re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(one.im, 0.0, epsilon = 1e-15);

        let zero = ecf(&[0.0, PI], 1).unwrap();
        assert_abs_diff_eq!(zero.norm(), 0.0, epsilon = 1e-15);

        let neg = ecf(&[PI / 2.0], 2).unwrap();
        assert_abs_diff_eq!(neg.re, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(neg.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn ecf_rejects_empty_sample() {
        assert!(ecf(&[], 1).is_err());
        assert!(ecf_series(&[], 3).is_err());
    }

    #[test]
    fn ecf_series_matches_per_index_form() {
        let sample = [0.31, 2.9, 4.77, 1.05, 6.1];
        let series = ecf_series(&sample, 12).unwrap();
        assert_eq!(series.max_index(), 12);
        assert!(series.truncated());
        for t in -12i64..=12 {
            let direct = ecf(&sample, t).unwrap();
            assert_abs_diff_eq!((series.get(t) - direct).norm(), 0.0, epsilon = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn ecf_magnitude_at_most_one(
            sample in proptest::collection::vec(0.0f64..TAU, 1..40),
            t in -30i64..30,
        ) {
            let value = ecf(&sample, t).unwrap();
            prop_assert!(value.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn trapezoid_integral_examples() {
        let grid = circle_grid(256);
        let uniform: Vec<f64> = grid.iter().map(|_| 1.0 / TAU).collect();
        assert_abs_diff_eq!(trapezoid_integral(&uniform).unwrap(), 1.0, epsilon = 1e-12);

        let cosine: Vec<f64> = grid.iter().map(|&t| t.cos()).collect();
        assert_abs_diff_eq!(trapezoid_integral(&cosine).unwrap(), 0.0, epsilon = 1e-12);

        let cos_sq: Vec<f64> = grid.iter().map(|&t| t.cos().powi(2)).collect();
        assert_abs_diff_eq!(trapezoid_integral(&cos_sq).unwrap(), PI, epsilon = 1e-12);
    }

    #[test]
    fn trapezoid_integral_needs_eight_points() {
        assert!(matches!(
            trapezoid_integral(&[0.0; 7]),
            Err(Error::GridTooSmall { needed: 8, got: 7 })
        ));
    }

    #[test]
    fn numeric_coefficients_of_uniform_density() {
        let seq = fourier_coeffs_numeric(|_| 1.0 / TAU, 3, 64).unwrap();
        assert!(seq.truncated());
        assert_abs_diff_eq!(seq.get(0).re, 1.0, epsilon = 1e-12);
        for t in 1..=3 {
            assert_abs_diff_eq!(seq.get(t).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn numeric_coefficients_reject_non_density() {
        assert!(matches!(
            fourier_coeffs_numeric(|_| 2.0 / TAU, 3, 64),
            Err(Error::NotADensity { .. })
        ));
    }

    #[test]
    fn numeric_coefficients_need_nyquist_margin() {
        assert!(matches!(
            fourier_coeffs_numeric(|_| 1.0 / TAU, 100, 128),
            Err(Error::GridTooSmall { .. })
        ));
    }
}
