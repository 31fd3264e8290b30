//! Flat-top kernels in closed form, their Fourier-sum oracle, and the von
//! Mises baseline kernel.
//!
//! A flat-top kernel is defined through its Fourier coefficients: exactly 1
//! for `|t| ≤ ⌊ν⌋`, tapering to 0 across the open band `(⌊ν⌋, c⌊ν⌋)`, and 0
//! beyond. With the linear taper the two named members are the wrapped sinc
//! (`c = 1`, empty band) and the wrapped trapezoid (`c ≥ 2`); both have
//! closed-form densities with a removable singularity at θ = 0.

use std::f64::consts::TAU;

use crate::circular::bessel_i;
use crate::{Error, Result};

/// Window below which `|sin(θ/2)|` is treated as the removable singularity
/// and the closed forms return their analytic limits. Inside this window the
/// limit differs from the exact value by far less than double-precision
/// noise.
const SINGULARITY_EPS: f64 = 1e-8;

/// Taper shape across the coefficient band `(⌊ν⌋, c⌊ν⌋)`.
///
/// Only the linear (trapezoid) taper ships; the risk formulas consume
/// coefficients generically, so adding a taper touches nothing but
/// [`FlatTopKernel::char_coeff`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Taper {
    /// Linear descent from 1 at `t = ⌊ν⌋` to 0 at `t = c⌊ν⌋`.
    #[default]
    Linear,
}

/// A flat-top kernel with smoothing parameter `ν ≥ 0` and integer flatness
/// factor `c ≥ 1`.
///
/// The smoothing parameter is stored as a real number, but every kernel
/// formula depends on it only through `⌊ν⌋`; theoretical bounds use ν itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatTopKernel {
    nu: f64,
    c: u32,
    taper: Taper,
}

impl FlatTopKernel {
    /// Creates a kernel with the linear taper.
    ///
    /// # Errors
    ///
    /// `nu` must be finite and non-negative; `c` must be at least 1.
    pub fn new(nu: f64, c: u32) -> Result<Self> {
        if !nu.is_finite() || nu < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "smoothing parameter nu must be finite and non-negative, got {nu}"
            )));
        }
        if c < 1 {
            return Err(Error::InvalidParameter(
                "flatness factor c must be at least 1".into(),
            ));
        }
        Ok(FlatTopKernel {
            nu,
            c,
            taper: Taper::Linear,
        })
    }

    /// Smoothing parameter ν.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Flatness factor c.
    pub fn c(&self) -> u32 {
        self.c
    }

    /// Coefficient cutoff `⌊ν⌋`.
    pub fn cutoff(&self) -> i64 {
        self.nu.floor() as i64
    }

    /// Largest index with a nonzero Fourier coefficient: 0 when `⌊ν⌋ = 0`,
    /// `⌊ν⌋` for the wrapped sinc, `c⌊ν⌋ − 1` for `c ≥ 2`.
    pub fn support_end(&self) -> usize {
        let m = self.cutoff();
        if m == 0 {
            0
        } else if self.c == 1 {
            m as usize
        } else {
            (self.c as i64 * m - 1) as usize
        }
    }

    /// Fourier coefficient `φ_t(K)`: 1 on the flat region `|t| ≤ ⌊ν⌋`, the
    /// taper value strictly inside (0, 1) on the open band
    /// `⌊ν⌋ < |t| < c⌊ν⌋`, and 0 beyond.
    ///
    /// When `⌊ν⌋ = 0` only `t = 0` survives, and for `c = 1` the band is
    /// empty — 1 up to `|t| = ⌊ν⌋`, 0 after (the sinc convention, which
    /// resolves the band formula's degenerate denominator).
    pub fn char_coeff(&self, t: i64) -> f64 {
        let m = self.cutoff();
        let a = t.abs();
        if a <= m {
            // Covers ⌊ν⌋ = 0 as well: only t = 0 passes.
            return 1.0;
        }
        if self.c == 1 {
            return 0.0;
        }
        if a >= self.c as i64 * m {
            return 0.0;
        }
        match self.taper {
            Taper::Linear => (self.c as f64 - a as f64 / m as f64) / (self.c as f64 - 1.0),
        }
    }

    /// Closed-form kernel density at θ.
    pub fn eval(&self, theta: f64) -> f64 {
        if self.c == 1 {
            eval_wsinc(theta, self.nu)
        } else {
            wtrap_value(theta, self.nu, self.c)
        }
    }

    /// Kernel density via its finite Fourier sum,
    /// `(2π)⁻¹ [1 + 2 Σ φ_t(K) cos(tθ)]` over the support — the oracle
    /// against which the closed forms are validated.
    pub fn fourier_eval(&self, theta: f64) -> f64 {
        let sum: f64 = (1..=self.support_end() as i64)
            .map(|t| self.char_coeff(t) * (t as f64 * theta).cos())
            .sum();
        (1.0 + 2.0 * sum) / TAU
    }

    /// Kernel roughness `∫ K² = (2π)⁻¹ Σ_t φ_t(K)²` over all nonzero
    /// coefficients.
    pub fn roughness(&self) -> f64 {
        let sum: f64 = (1..=self.support_end() as i64)
            .map(|t| self.char_coeff(t).powi(2))
            .sum();
        (1.0 + 2.0 * sum) / TAU
    }
}

/// Wrapped sinc kernel `sin((⌊ν⌋ + ½)θ) / (2π sin(θ/2))`, with the analytic
/// limit `(2⌊ν⌋ + 1)/(2π)` at the removable singularity; identically
/// `1/(2π)` when `⌊ν⌋ = 0`.
pub fn eval_wsinc(theta: f64, nu: f64) -> f64 {
    let m = nu.max(0.0).floor();
    if m == 0.0 {
        return 1.0 / TAU;
    }
    let s = (theta / 2.0).sin();
    if s.abs() < SINGULARITY_EPS {
        return (2.0 * m + 1.0) / TAU;
    }
    ((m + 0.5) * theta).sin() / (TAU * s)
}

/// Wrapped trapezoid kernel
/// `[sin²(c⌊ν⌋θ/2) − sin²(⌊ν⌋θ/2)] / [2π(c−1)⌊ν⌋ sin²(θ/2)]`, with the
/// analytic limit `(c+1)⌊ν⌋/(2π)` at the removable singularity; identically
/// `1/(2π)` when `⌊ν⌋ = 0`.
///
/// # Errors
///
/// The closed form divides by `c − 1`, so `c = 1` is rejected; use
/// [`eval_wsinc`] for the no-taper kernel.
pub fn eval_wtrap(theta: f64, nu: f64, c: u32) -> Result<f64> {
    if c < 2 {
        return Err(Error::InvalidParameter(
            "trapezoid closed form needs c >= 2; the c = 1 kernel is the wrapped sinc".into(),
        ));
    }
    Ok(wtrap_value(theta, nu, c))
}

fn wtrap_value(theta: f64, nu: f64, c: u32) -> f64 {
    let m = nu.max(0.0).floor();
    if m == 0.0 {
        return 1.0 / TAU;
    }
    let c = f64::from(c);
    let s = (theta / 2.0).sin();
    if s.abs() < SINGULARITY_EPS {
        return (c + 1.0) * m / TAU;
    }
    let high = (c * m * theta / 2.0).sin();
    let low = (m * theta / 2.0).sin();
    (high * high - low * low) / (TAU * (c - 1.0) * m * s * s)
}

/// The von Mises kernel `e^{κ cos θ} / (2π I_0(κ))`, the second-order
/// baseline. Unlike the flat-top family its Fourier coefficients
/// `I_t(κ)/I_0(κ)` never vanish, so it has no finite spectral support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VonMisesKernel {
    kappa: f64,
    ln_i0: f64,
}

impl VonMisesKernel {
    /// Creates a von Mises kernel with concentration `κ > 0`.
    ///
    /// # Errors
    ///
    /// Rejects non-positive or non-finite κ, and κ large enough to overflow
    /// `I_0(κ)` (κ > 705).
    pub fn new(kappa: f64) -> Result<Self> {
        if !kappa.is_finite() || kappa <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "von Mises concentration must be finite and positive, got {kappa}"
            )));
        }
        let ln_i0 = bessel_i(0, kappa)?.ln();
        Ok(VonMisesKernel { kappa, ln_i0 })
    }

    /// Concentration κ.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Kernel density at θ, evaluated in log space so large κ cannot
    /// overflow the exponential.
    pub fn eval(&self, theta: f64) -> f64 {
        (self.kappa * theta.cos() - self.ln_i0 - TAU.ln()).exp()
    }
}

/// Either kernel family, as consumed by the estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    /// Flat-top kernel (wrapped sinc or wrapped trapezoid).
    FlatTop(FlatTopKernel),
    /// Von Mises kernel.
    VonMises(VonMisesKernel),
}

impl Kernel {
    /// Kernel density at θ.
    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            Kernel::FlatTop(k) => k.eval(theta),
            Kernel::VonMises(k) => k.eval(theta),
        }
    }

    /// Largest nonzero Fourier index, or `None` for the von Mises kernel,
    /// whose spectral support is unbounded.
    pub fn spectral_support(&self) -> Option<usize> {
        match self {
            Kernel::FlatTop(k) => Some(k.support_end()),
            Kernel::VonMises(_) => None,
        }
    }
}

impl From<FlatTopKernel> for Kernel {
    fn from(k: FlatTopKernel) -> Self {
        Kernel::FlatTop(k)
    }
}

impl From<VonMisesKernel> for Kernel {
    fn from(k: VonMisesKernel) -> Self {
        Kernel::VonMises(k)
    }
}

#[cfg(test)]
mod tests {
    // Reference constants carry their full independently computed
    // precision; the compiler rounding them to f64 is expected.
    #![allow(clippy::excessive_precision)]

    use super::*;
    use crate::circular::{circle_grid, trapezoid_integral};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn kernel(nu: f64, c: u32) -> FlatTopKernel {
        FlatTopKernel::new(nu, c).unwrap()
    }

    #[test]
    fn coefficient_branches() {
        let k = kernel(4.0, 2);
        assert_eq!(k.char_coeff(3), 1.0);
        assert_eq!(k.char_coeff(4), 1.0);
        assert_abs_diff_eq!(k.char_coeff(5), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(k.char_coeff(6), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(k.char_coeff(7), 0.25, epsilon = 1e-15);
        assert_eq!(k.char_coeff(8), 0.0);
        assert_eq!(k.char_coeff(100), 0.0);
    }

    #[test]
    fn coefficient_symmetry_and_band() {
        for &(nu, c) in &[(0.0, 1), (0.9, 2), (1.0, 1), (3.5, 2), (4.0, 3), (7.2, 4)] {
            let k = kernel(nu, c);
            for t in 0..=40 {
                assert_eq!(k.char_coeff(t), k.char_coeff(-t));
                let v = k.char_coeff(t);
                let (m, cm) = (k.cutoff(), k.cutoff() * i64::from(c));
                if t > m && t < cm {
                    assert!(
                        v > 0.0 && v < 1.0,
                        "band coefficient out of (0,1): t={t}, nu={nu}, c={c}, value {v}"
                    );
                }
            }
        }
    }

    #[test]
    fn sinc_convention_has_no_band() {
        let k = kernel(4.0, 1);
        assert_eq!(k.char_coeff(4), 1.0);
        assert_eq!(k.char_coeff(5), 0.0);
        assert_eq!(k.support_end(), 4);
        // Sub-unit smoothing keeps only the constant coefficient.
        let tiny = kernel(0.7, 2);
        assert_eq!(tiny.char_coeff(0), 1.0);
        assert_eq!(tiny.char_coeff(1), 0.0);
        assert_eq!(tiny.support_end(), 0);
    }

    #[test]
    fn wsinc_closed_form_values() {
        assert_abs_diff_eq!(eval_wsinc(0.0, 4.0), 9.0 / TAU, epsilon = 1e-14);
        assert_abs_diff_eq!(eval_wsinc(PI, 0.0), 1.0 / TAU, epsilon = 1e-15);
        // sin(5π/6)/(2π sin(π/6)) collapses to 1/(2π).
        assert_abs_diff_eq!(eval_wsinc(PI / 3.0, 2.0), 1.0 / TAU, epsilon = 1e-14);
    }

    #[test]
    fn wtrap_closed_form_values() {
        assert_abs_diff_eq!(eval_wtrap(0.0, 4.0, 2).unwrap(), 12.0 / TAU, epsilon = 1e-14);
        assert_abs_diff_eq!(
            eval_wtrap(PI / 2.0, 0.0, 2).unwrap(),
            1.0 / TAU,
            epsilon = 1e-15
        );
        let k = kernel(4.0, 2);
        assert_abs_diff_eq!(
            eval_wtrap(1.0, 4.0, 2).unwrap(),
            k.fourier_eval(1.0),
            epsilon = 1e-10
        );
        assert!(eval_wtrap(1.0, 4.0, 1).is_err());
    }

    #[test]
    fn fourier_sum_spot_values() {
        assert_abs_diff_eq!(kernel(4.0, 1).fourier_eval(0.0), 9.0 / TAU, epsilon = 1e-13);
        // 1 + 2(4·1 + 0.75 + 0.5 + 0.25) = 12.
        assert_abs_diff_eq!(kernel(4.0, 2).fourier_eval(0.0), 12.0 / TAU, epsilon = 1e-13);
        assert_abs_diff_eq!(kernel(0.0, 3).fourier_eval(2.2), 1.0 / TAU, epsilon = 1e-15);
    }

    #[test]
    fn closed_forms_match_fourier_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let theta: f64 = rng.random::<f64>() * TAU;
            let nu: f64 = rng.random::<f64>() * 12.0;
            let c = rng.random_range(1..=4u32);
            let k = kernel(nu, c);
            let closed = k.eval(theta);
            assert_abs_diff_eq!(closed, k.fourier_eval(theta), epsilon = 1e-10);
        }
    }

    #[test]
    fn kernels_integrate_to_one() {
        let grid = circle_grid(2048);
        for &nu in &[0.0, 0.5, 1.0, 2.7, 4.0, 10.0] {
            for c in 1..=3u32 {
                let k = kernel(nu, c);
                let values: Vec<f64> = grid.iter().map(|&t| k.eval(t)).collect();
                let mass = trapezoid_integral(&values).unwrap();
                assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn smoothing_depends_only_on_cutoff() {
        let a = kernel(4.0, 2);
        let b = kernel(4.9, 2);
        for &theta in circle_grid(64).iter() {
            assert_eq!(a.eval(theta), b.eval(theta));
            assert_eq!(a.fourier_eval(theta), b.fourier_eval(theta));
        }
    }

    #[test]
    fn roughness_spot_values() {
        assert_abs_diff_eq!(kernel(4.0, 1).roughness(), 9.0 / TAU, epsilon = 1e-14);
        assert_abs_diff_eq!(kernel(4.0, 2).roughness(), 10.75 / TAU, epsilon = 1e-14);
        assert_abs_diff_eq!(kernel(0.0, 2).roughness(), 1.0 / TAU, epsilon = 1e-15);
    }

    #[test]
    fn roughness_bound_with_taper() {
        // The cν/π bound needs the coefficients to stop short of c⌊ν⌋, which
        // the taper guarantees for c ≥ 2; the no-taper kernel keeps a unit
        // coefficient at the cutoff itself and its roughness is exactly
        // (2⌊ν⌋+1)/(2π).
        for &nu in &[1.0, 1.5, 2.0, 3.3, 4.0, 7.9, 12.0] {
            for c in 2..=4u32 {
                let k = kernel(nu, c);
                assert!(
                    k.roughness() <= f64::from(c) * nu / PI,
                    "roughness bound failed at nu={nu}, c={c}"
                );
            }
            let sinc = kernel(nu, 1);
            let m = sinc.cutoff() as f64;
            assert_abs_diff_eq!(sinc.roughness(), (2.0 * m + 1.0) / TAU, epsilon = 1e-14);
        }
    }

    #[test]
    fn kernel_construction_errors() {
        assert!(FlatTopKernel::new(-0.1, 2).is_err());
        assert!(FlatTopKernel::new(f64::NAN, 2).is_err());
        assert!(FlatTopKernel::new(1.0, 0).is_err());
    }

    #[test]
    fn von_mises_kernel_values() {
        let nearly_flat = VonMisesKernel::new(1e-12).unwrap();
        assert_abs_diff_eq!(nearly_flat.eval(0.0), 1.0 / TAU, epsilon = 1e-10);

        // e^{-1} / (2π I_0(1)), from a 40-digit reference evaluation.
        let k = VonMisesKernel::new(1.0).unwrap();
        assert_relative_eq!(k.eval(PI), 0.046245485762777705692, max_relative = 1e-12);

        let grid = circle_grid(2048);
        for &kappa in &[0.5, 5.0, 80.0] {
            let k = VonMisesKernel::new(kappa).unwrap();
            let values: Vec<f64> = grid.iter().map(|&t| k.eval(t)).collect();
            assert_abs_diff_eq!(trapezoid_integral(&values).unwrap(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn von_mises_kernel_construction_errors() {
        assert!(VonMisesKernel::new(0.0).is_err());
        assert!(VonMisesKernel::new(-1.0).is_err());
        assert!(VonMisesKernel::new(f64::NAN).is_err());
        assert!(matches!(
            VonMisesKernel::new(800.0),
            Err(Error::BesselOverflow { .. })
        ));
    }

    #[test]
    fn kernel_enum_dispatch() {
        let flat: Kernel = kernel(4.0, 2).into();
        assert_eq!(flat.spectral_support(), Some(7));
        assert_abs_diff_eq!(flat.eval(0.0), 12.0 / TAU, epsilon = 1e-14);

        let vm: Kernel = VonMisesKernel::new(2.0).unwrap().into();
        assert_eq!(vm.spectral_support(), None);
    }
}
