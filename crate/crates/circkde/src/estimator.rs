//! The wrapped kernel density estimator: fitting, pointwise and grid
//! evaluation, and nonnegativity correction.
//!
//! The estimate is `f̂(θ) = n⁻¹ Σ_i K(θ − Θ_i)`. Two evaluation paths are
//! provided and must agree: a direct sum over the sample using the kernel's
//! closed form, and a Fourier path
//! `(2π)⁻¹ [1 + 2 Σ_{t≥1} φ_t(K) · Re(φ̂_t e^{−itθ})]`
//! driven by the sample's empirical characteristic coefficients `φ̂_t`. The
//! Fourier path is exact for flat-top kernels (finite spectral support) and
//! costs O(c⌊ν⌋) per point after an O(n·c⌊ν⌋) precompute, so it is the
//! default there; the von Mises kernel has infinite support and always
//! evaluates directly.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::circular::{circle_grid, ecf_series, trapezoid_integral, wrap_angle, CharSeq};
use crate::kernels::Kernel;
use crate::{Error, Result};

/// How evaluated grids handle the negative dips a flat-top kernel can
/// produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Correction {
    /// Report the raw estimate (integrates to 1, may dip negative).
    #[default]
    None,
    /// Clip to max(0, f̂); cheap but inflates total mass.
    Clip,
    /// Shift down by the ξ ≥ 0 that restores unit mass after clipping:
    /// max(0, f̂ − ξ) with ∫ = 1.
    ClipRenormalize,
}

/// A fitted kernel density estimate over a sample of angles.
///
/// Immutable after [`DensityEstimate::fit`]; evaluation from multiple
/// threads is safe.
#[derive(Debug, Clone)]
pub struct DensityEstimate {
    sample: Vec<f64>,
    kernel: Kernel,
    /// Empirical characteristic coefficients up to the kernel's spectral
    /// support; present exactly when the kernel is flat-top.
    cached_ecf: Option<CharSeq>,
    correction: Correction,
}

impl DensityEstimate {
    /// Fits the estimator to a sample.
    ///
    /// Angles may be any finite reals; they are reduced into [0, 2π). For a
    /// flat-top kernel the sample's empirical characteristic coefficients
    /// are precomputed up to the kernel's spectral support.
    ///
    /// # Errors
    ///
    /// Rejects an empty sample and non-finite angles.
    pub fn fit(sample: &[f64], kernel: impl Into<Kernel>, correction: Correction) -> Result<Self> {
        let kernel = kernel.into();
        if sample.is_empty() {
            return Err(Error::SampleTooSmall { needed: 1, got: 0 });
        }
        let sample: Vec<f64> = sample
            .iter()
            .map(|&theta| wrap_angle(theta))
            .collect::<Result<_>>()?;
        let cached_ecf = match kernel.spectral_support() {
            Some(t_max) => Some(ecf_series(&sample, t_max)?),
            None => None,
        };
        Ok(DensityEstimate {
            sample,
            kernel,
            cached_ecf,
            correction,
        })
    }

    /// The fitted sample, reduced to [0, 2π).
    pub fn sample(&self) -> &[f64] {
        &self.sample
    }

    /// The kernel in use.
    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    /// The correction mode applied by [`DensityEstimate::density_grid`].
    pub fn correction(&self) -> Correction {
        self.correction
    }

    /// Raw estimate at θ by the direct sum `n⁻¹ Σ_i K(θ − Θ_i)`; O(n).
    pub fn eval_direct(&self, theta: f64) -> f64 {
        let total: f64 = self
            .sample
            .iter()
            .map(|&point| self.kernel.eval(theta - point))
            .sum();
        total / self.sample.len() as f64
    }

    /// Raw estimate at θ through the kernel's Fourier coefficients; exact
    /// for flat-top kernels and O(c⌊ν⌋) per point.
    ///
    /// # Errors
    ///
    /// The von Mises kernel has no finite spectral support; use
    /// [`DensityEstimate::eval_direct`] for it.
    pub fn eval_fourier(&self, theta: f64) -> Result<f64> {
        let Kernel::FlatTop(kernel) = &self.kernel else {
            return Err(Error::InfiniteSupportKernel);
        };
        let ecf = self
            .cached_ecf
            .as_ref()
            .expect("coefficients cached for flat-top kernels at fit time");
        let mut sum = 0.0;
        for t in 1..=kernel.support_end() {
            let rotation = Complex64::from_polar(1.0, -(t as f64) * theta);
            sum += kernel.char_coeff(t as i64) * (ecf.get(t as i64) * rotation).re;
        }
        Ok((1.0 + 2.0 * sum) / TAU)
    }

    /// The cached empirical coefficients; present exactly when the kernel
    /// is flat-top.
    pub(crate) fn cached_coeffs(&self) -> Option<&CharSeq> {
        self.cached_ecf.as_ref()
    }

    /// Raw estimate at θ by the preferred path: Fourier for flat-top
    /// kernels, direct for the von Mises kernel.
    pub fn eval(&self, theta: f64) -> f64 {
        match self.kernel {
            Kernel::FlatTop(_) => self
                .eval_fourier(theta)
                .expect("flat-top kernels always evaluate through Fourier"),
            Kernel::VonMises(_) => self.eval_direct(theta),
        }
    }

    /// Raw estimate on the uniform grid `θ_k = 2πk/G` (endpoint excluded).
    pub fn eval_grid(&self, grid_size: usize) -> Vec<f64> {
        circle_grid(grid_size)
            .into_iter()
            .map(|theta| self.eval(theta))
            .collect()
    }

    /// Estimate on a grid with the fitted correction mode applied.
    ///
    /// # Errors
    ///
    /// Grids below 8 points are rejected.
    pub fn density_grid(&self, grid_size: usize) -> Result<Vec<f64>> {
        self.correct_nonneg(self.correction, grid_size)
    }

    /// Estimate on a grid corrected by `mode`.
    ///
    /// `Clip` returns max(0, f̂). `ClipRenormalize` bisects for the smallest
    /// ξ ≥ 0 with ∫ max(0, f̂ − ξ) dθ = 1 ± 1e-9 and returns max(0, f̂ − ξ);
    /// ξ always exists because the clipped mass starts at
    /// ∫ max(0, f̂) ≥ ∫ f̂ = 1 and decreases continuously to 0 in ξ. When f̂
    /// is already nonnegative the output equals the raw estimate (ξ = 0).
    ///
    /// # Errors
    ///
    /// Grids below 8 points are rejected.
    pub fn correct_nonneg(&self, mode: Correction, grid_size: usize) -> Result<Vec<f64>> {
        if grid_size < 8 {
            return Err(Error::GridTooSmall {
                needed: 8,
                got: grid_size,
            });
        }
        let raw = self.eval_grid(grid_size);
        match mode {
            Correction::None => Ok(raw),
            Correction::Clip => Ok(raw.iter().map(|&v| v.max(0.0)).collect()),
            Correction::ClipRenormalize => {
                let clipped_mass = |shift: f64| -> f64 {
                    let values: Vec<f64> = raw.iter().map(|&v| (v - shift).max(0.0)).collect();
                    trapezoid_integral(&values).expect("grid size checked above")
                };
                let mut lo = 0.0;
                if clipped_mass(lo) <= 1.0 + 1e-10 {
                    // Nothing was clipped away (or only a negligible sliver):
                    // the raw estimate already carries unit mass.
                    return Ok(raw.iter().map(|&v| v.max(0.0)).collect());
                }
                let mut hi = raw.iter().cloned().fold(0.0, f64::max);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let mass = clipped_mass(mid);
                    if (mass - 1.0).abs() <= 1e-10 {
                        lo = mid;
                        break;
                    }
                    if mass > 1.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(raw.iter().map(|&v| (v - lo).max(0.0)).collect())
            }
        }
    }
}
