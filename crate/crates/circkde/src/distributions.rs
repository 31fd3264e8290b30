//! Circular distributions and the 20-scenario simulation catalog.
//!
//! Eight families are provided: uniform, von Mises, wrapped normal, wrapped
//! Cauchy, cardioid, triangular, wrapped skew-normal, and wrapped stable.
//! Each offers pointwise density evaluation, characteristic coefficients
//! `φ_t` (closed form everywhere except the wrapped skew-normal, which goes
//! through numeric quadrature), and seeded random sampling. Mixtures of them
//! form [`ScenarioSpec`]s, and [`scenario_catalog`] lists the twenty standard
//! benchmark mixtures M1–M20.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Cauchy, Distribution, Normal, StandardNormal};

use crate::circular::{bessel_i, fourier_coeffs_numeric, wrap_angle, CharSeq};
use crate::{Error, Result};

/// Largest triangular concentration, 4/π².
pub const TRIANGULAR_RHO_MAX: f64 = 4.0 / (PI * PI);

/// Coefficient magnitudes are chased below this squared threshold when
/// choosing a truncation index.
const ENVELOPE_SQ_FLOOR: f64 = 1e-16;

/// Hard ceiling for suggested truncation indices.
const MAX_SUGGESTED_INDEX: usize = 8192;

/// Number of wraps `|k| ≤ 5` summed for the wrapped skew-normal density;
/// keeps the truncation error below 1e-12 for the catalog's scales (η ≤ 1).
const WSN_WRAPS: i32 = 5;

/// A parametric distribution on the circle.
///
/// Use the constructor functions (`uniform`, `von_mises`, …) to get parameter
/// validation; the variants themselves are exposed for matching.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CircularDist {
    /// Uniform density 1/(2π).
    Uniform,
    /// Von Mises with mean direction μ and concentration κ.
    VonMises { mu: f64, kappa: f64 },
    /// Wrapped normal with mean direction μ and concentration ρ = e^{−σ²/2}.
    WrappedNormal { mu: f64, rho: f64 },
    /// Wrapped Cauchy with mean direction μ and concentration ρ = e^{−γ}.
    WrappedCauchy { mu: f64, rho: f64 },
    /// Cardioid with mean direction μ and concentration ρ ∈ [0, 1/2].
    Cardioid { mu: f64, rho: f64 },
    /// Triangular with concentration ρ ∈ [0, 4/π²], centered at 0.
    Triangular { rho: f64 },
    /// Wrapped skew-normal with location ξ, scale η, and skewness λ.
    WrappedSkewNormal { xi: f64, eta: f64, lambda: f64 },
    /// Wrapped α-stable with mean direction μ, concentration τ, stability α,
    /// and skewness β.
    WrappedStable {
        mu: f64,
        tau: f64,
        alpha: f64,
        beta: f64,
    },
}

impl CircularDist {
    /// The circular uniform distribution.
    pub fn uniform() -> Self {
        CircularDist::Uniform
    }

    /// Von Mises distribution vM(μ, κ).
    ///
    /// # Errors
    ///
    /// κ must be positive, finite, and small enough that `I_0(κ)` stays in
    /// range (κ ≤ 705); μ must be finite.
    pub fn von_mises(mu: f64, kappa: f64) -> Result<Self> {
        if !kappa.is_finite() || kappa <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "von Mises concentration must be positive, got {kappa}"
            )));
        }
        if kappa > 705.0 {
            return Err(Error::BesselOverflow { order: 0, x: kappa });
        }
        Ok(CircularDist::VonMises {
            mu: wrap_angle(mu)?,
            kappa,
        })
    }

    /// Wrapped normal distribution WN(μ, ρ) with `φ_t = ρ^{t²} e^{itμ}`.
    ///
    /// # Errors
    ///
    /// ρ must lie in [0, 1); μ must be finite.
    pub fn wrapped_normal(mu: f64, rho: f64) -> Result<Self> {
        check_rho(rho, 1.0, "wrapped normal")?;
        Ok(CircularDist::WrappedNormal {
            mu: wrap_angle(mu)?,
            rho,
        })
    }

    /// Wrapped Cauchy distribution WC(μ, ρ) with `φ_t = ρ^{|t|} e^{itμ}`.
    ///
    /// # Errors
    ///
    /// ρ must lie in [0, 1); μ must be finite.
    pub fn wrapped_cauchy(mu: f64, rho: f64) -> Result<Self> {
        check_rho(rho, 1.0, "wrapped Cauchy")?;
        Ok(CircularDist::WrappedCauchy {
            mu: wrap_angle(mu)?,
            rho,
        })
    }

    /// Cardioid distribution C(μ, ρ) with density `(1 + 2ρcos(θ−μ))/(2π)`.
    ///
    /// # Errors
    ///
    /// ρ must lie in [0, 1/2]; μ must be finite.
    pub fn cardioid(mu: f64, rho: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&rho) {
            return Err(Error::InvalidParameter(format!(
                "cardioid concentration must lie in [0, 1/2], got {rho}"
            )));
        }
        Ok(CircularDist::Cardioid {
            mu: wrap_angle(mu)?,
            rho,
        })
    }

    /// Triangular distribution with density
    /// `(4 − π²ρ + 2πρ|π − θ|)/(8π)` on `[0, 2π)`.
    ///
    /// # Errors
    ///
    /// ρ must lie in [0, 4/π²].
    pub fn triangular(rho: f64) -> Result<Self> {
        if !(0.0..=TRIANGULAR_RHO_MAX).contains(&rho) {
            return Err(Error::InvalidParameter(format!(
                "triangular concentration must lie in [0, 4/pi^2], got {rho}"
            )));
        }
        Ok(CircularDist::Triangular { rho })
    }

    /// Wrapped skew-normal distribution WSN(ξ, η, λ): the linear skew-normal
    /// with location ξ, scale η > 0, skewness λ, wrapped onto the circle.
    ///
    /// # Errors
    ///
    /// η must be positive and finite; ξ and λ finite.
    pub fn wrapped_skew_normal(xi: f64, eta: f64, lambda: f64) -> Result<Self> {
        if !eta.is_finite() || eta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "skew-normal scale must be positive, got {eta}"
            )));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "skew-normal skewness must be finite, got {lambda}"
            )));
        }
        Ok(CircularDist::WrappedSkewNormal {
            xi: wrap_angle(xi)?,
            eta,
            lambda,
        })
    }

    /// Wrapped α-stable distribution with
    /// `φ_t = exp{−τ|t|^α [1 − iβ·sgn(t)·tan(απ/2)] + iμt}` for α ≠ 1 and
    /// `φ_t = exp(−τ|t| + iμt)` for α = 1 (the concentration enters as
    /// `e^{−τ}`, matching the ρ-parametrization of the wrapped normal and
    /// Cauchy special cases α = 2 and α = 1).
    ///
    /// # Errors
    ///
    /// Requires τ > 0, α ∈ (0, 2], β ∈ [−1, 1], μ finite.
    pub fn wrapped_stable(mu: f64, tau: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !tau.is_finite() || tau <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "stable concentration must be positive, got {tau}"
            )));
        }
        if !alpha.is_finite() || alpha <= 0.0 || alpha > 2.0 {
            return Err(Error::InvalidParameter(format!(
                "stability index must lie in (0, 2], got {alpha}"
            )));
        }
        if !(-1.0..=1.0).contains(&beta) {
            return Err(Error::InvalidParameter(format!(
                "stable skewness must lie in [-1, 1], got {beta}"
            )));
        }
        Ok(CircularDist::WrappedStable {
            mu: wrap_angle(mu)?,
            tau,
            alpha,
            beta,
        })
    }

    /// Density at θ (any finite angle; reduction mod 2π is implicit in the
    /// formulas).
    pub fn density(&self, theta: f64) -> f64 {
        match *self {
            CircularDist::Uniform => 1.0 / TAU,
            CircularDist::VonMises { mu, kappa } => {
                let ln_i0 = bessel_i(0, kappa)
                    .expect("validated concentration")
                    .ln();
                (kappa * (theta - mu).cos() - ln_i0 - TAU.ln()).exp()
            }
            CircularDist::WrappedNormal { mu, rho } => {
                // Fourier series 1 + 2 Σ ρ^{t²} cos(tΔ), truncated at 1e-14.
                let delta = theta - mu;
                let mut sum = 1.0;
                let mut t = 1.0;
                loop {
                    let coeff = rho.powf(t * t);
                    if coeff < 1e-14 {
                        break;
                    }
                    sum += 2.0 * coeff * (t * delta).cos();
                    t += 1.0;
                }
                sum / TAU
            }
            CircularDist::WrappedCauchy { mu, rho } => {
                (1.0 - rho * rho) / (TAU * (1.0 + rho * rho - 2.0 * rho * (theta - mu).cos()))
            }
            CircularDist::Cardioid { mu, rho } => (1.0 + 2.0 * rho * (theta - mu).cos()) / TAU,
            CircularDist::Triangular { rho } => {
                let theta = theta.rem_euclid(TAU);
                (4.0 - PI * PI * rho + 2.0 * PI * rho * (PI - theta).abs()) / (8.0 * PI)
            }
            CircularDist::WrappedSkewNormal { xi, eta, lambda } => {
                let theta = theta.rem_euclid(TAU);
                let mut sum = 0.0;
                for k in -WSN_WRAPS..=WSN_WRAPS {
                    let z = (theta - xi + TAU * f64::from(k)) / eta;
                    sum += skew_normal_pdf(z, lambda) / eta;
                }
                sum
            }
            CircularDist::WrappedStable { tau, alpha, .. } => {
                // Fourier series with |φ_t| = e^{−τ t^α}, truncated at 1e-14.
                let mut sum = 1.0;
                let mut t = 1i64;
                loop {
                    let phi = self.char_fn(t);
                    sum += 2.0 * (phi * Complex64::from_polar(1.0, -(t as f64) * theta)).re;
                    if (tau * (t as f64).powf(alpha)).exp().recip() < 1e-14 {
                        break;
                    }
                    t += 1;
                }
                sum / TAU
            }
        }
    }

    /// Characteristic coefficient `φ_t = ∫ f(θ) e^{itθ} dθ`.
    ///
    /// Closed form for every kind except the wrapped skew-normal, which is
    /// integrated numerically per call (prefer [`CircularDist::char_seq`]
    /// when many indices are needed).
    pub fn char_fn(&self, t: i64) -> Complex64 {
        if t == 0 {
            return Complex64::ONE;
        }
        let a = t.unsigned_abs();
        let af = a as f64;
        match *self {
            CircularDist::Uniform => Complex64::ZERO,
            CircularDist::VonMises { mu, kappa } => {
                let ratio = bessel_i(a as u32, kappa).expect("validated concentration")
                    / bessel_i(0, kappa).expect("validated concentration");
                Complex64::from_polar(ratio, t as f64 * mu)
            }
            CircularDist::WrappedNormal { mu, rho } => {
                Complex64::from_polar(rho.powf(af * af), t as f64 * mu)
            }
            CircularDist::WrappedCauchy { mu, rho } => {
                Complex64::from_polar(rho.powf(af), t as f64 * mu)
            }
            CircularDist::Cardioid { mu, rho } => {
                if a == 1 {
                    Complex64::from_polar(rho, t as f64 * mu)
                } else {
                    Complex64::ZERO
                }
            }
            CircularDist::Triangular { rho } => {
                if a % 2 == 1 {
                    Complex64::new(rho / (af * af), 0.0)
                } else {
                    Complex64::ZERO
                }
            }
            CircularDist::WrappedSkewNormal { .. } => {
                let grid = (8 * a as usize).max(512);
                let mut sum = Complex64::ZERO;
                for j in 0..grid {
                    let theta = TAU * j as f64 / grid as f64;
                    sum += self.density(theta) * Complex64::from_polar(1.0, t as f64 * theta);
                }
                sum * TAU / grid as f64
            }
            CircularDist::WrappedStable {
                mu,
                tau,
                alpha,
                beta,
            } => {
                let magnitude = (-tau * af.powf(alpha)).exp();
                let skew_phase = if (alpha - 1.0).abs() < 1e-12 || alpha == 2.0 {
                    // α = 1 has no skew term; tan(π) is exactly 0 at α = 2.
                    0.0
                } else {
                    tau * af.powf(alpha) * beta * (t.signum() as f64) * (alpha * FRAC_PI_2).tan()
                };
                Complex64::from_polar(magnitude, skew_phase + t as f64 * mu)
            }
        }
    }

    /// Coefficients `φ_0..φ_T` as a [`CharSeq`], with an analytic bound on
    /// the discarded energy `Σ_{t>T} |φ_t|²` attached whenever the support
    /// extends past `T`.
    ///
    /// The wrapped skew-normal has no closed form and is integrated
    /// numerically on a `max(4T, 1024)`-point grid; its tail bound comes from
    /// the Gaussian envelope `|φ_t|² ≤ 4.2·exp(−η²t²/(1+λ²))` of the
    /// skew-normal characteristic function.
    ///
    /// # Errors
    ///
    /// Numeric integration can reject a non-normalizing density (wrapped
    /// skew-normal with extreme scale).
    pub fn char_seq(&self, max_index: usize) -> Result<CharSeq> {
        if let CircularDist::WrappedSkewNormal { eta, lambda, .. } = *self {
            let grid = (4 * max_index).max(1024);
            let seq = fourier_coeffs_numeric(|theta| self.density(theta), max_index, grid)?;
            return Ok(seq.with_tail_sq_bound(wsn_tail_sq(eta, lambda, max_index)));
        }
        let coeffs: Vec<Complex64> = (0..=max_index as i64).map(|t| self.char_fn(t)).collect();
        let (truncated, tail) = self.tail_sq_beyond(max_index);
        let seq = CharSeq::new(coeffs, truncated)?;
        Ok(if truncated {
            seq.with_tail_sq_bound(tail)
        } else {
            seq
        })
    }

    /// Whether coefficients survive beyond `max_index`, and an upper bound on
    /// their one-sided energy if so.
    fn tail_sq_beyond(&self, max_index: usize) -> (bool, f64) {
        let t1 = max_index as f64 + 1.0;
        match *self {
            CircularDist::Uniform => (false, 0.0),
            CircularDist::Cardioid { rho, .. } => {
                if max_index >= 1 || rho == 0.0 {
                    (false, 0.0)
                } else {
                    (true, rho * rho)
                }
            }
            CircularDist::VonMises { kappa, .. } => {
                // Bessel ratios I_{t+1}/I_t decrease in t, so the tail is
                // dominated by a geometric series from the last kept term.
                let i0 = bessel_i(0, kappa).expect("validated concentration");
                let last = bessel_i(max_index as u32, kappa).expect("validated order") / i0;
                let next = bessel_i(max_index as u32 + 1, kappa).expect("validated order") / i0;
                if last == 0.0 {
                    return (true, 0.0);
                }
                let q = (next / last).powi(2);
                (true, last * last * q / (1.0 - q))
            }
            CircularDist::WrappedNormal { rho, .. } => {
                if rho == 0.0 {
                    return (false, 0.0);
                }
                // t² ≥ (T+1)² + 2(T+1)(t−T−1) gives geometric domination.
                let head = rho.powf(2.0 * t1 * t1);
                let q = rho.powf(4.0 * t1);
                (true, head / (1.0 - q))
            }
            CircularDist::WrappedCauchy { rho, .. } => {
                if rho == 0.0 {
                    return (false, 0.0);
                }
                // Exact geometric sum Σ_{t>T} ρ^{2t}.
                (true, rho.powf(2.0 * t1) / (1.0 - rho * rho))
            }
            CircularDist::Triangular { rho } => {
                if rho == 0.0 {
                    return (false, 0.0);
                }
                let bound = if max_index == 0 {
                    // Σ_odd t^{-4} = π⁴/96.
                    rho * rho * PI.powi(4) / 96.0
                } else {
                    // Σ_{t>T} t^{-4} < ∫_T^∞ x^{-4} dx = 1/(3T³).
                    rho * rho / (3.0 * (max_index as f64).powi(3))
                };
                (true, bound)
            }
            CircularDist::WrappedSkewNormal { eta, lambda, .. } => {
                (true, wsn_tail_sq(eta, lambda, max_index))
            }
            CircularDist::WrappedStable { tau, alpha, .. } => {
                (true, decreasing_tail_sq(|t| (-2.0 * tau * t.powf(alpha)).exp(), max_index))
            }
        }
    }

    /// Squared-magnitude envelope used to pick truncation indices.
    fn char_sq_envelope(&self, t: usize) -> f64 {
        let tf = t as f64;
        match *self {
            CircularDist::Uniform => 0.0,
            CircularDist::Cardioid { .. } => 0.0,
            CircularDist::VonMises { kappa, .. } => {
                let i0 = bessel_i(0, kappa).expect("validated concentration");
                (bessel_i(t as u32, kappa).expect("validated order") / i0).powi(2)
            }
            CircularDist::WrappedNormal { rho, .. } => rho.powf(2.0 * tf * tf),
            CircularDist::WrappedCauchy { rho, .. } => rho.powf(2.0 * tf),
            CircularDist::Triangular { rho } => rho * rho / tf.powi(4),
            CircularDist::WrappedSkewNormal { eta, lambda, .. } => {
                4.2 * (-eta * eta * tf * tf / (1.0 + lambda * lambda)).exp()
            }
            CircularDist::WrappedStable { tau, alpha, .. } => (-2.0 * tau * tf.powf(alpha)).exp(),
        }
    }

    /// A truncation index beyond which `|φ_t|²` provably stays below 1e-16,
    /// found by doubling (capped at 8192, which covers every catalog
    /// scenario with orders of magnitude to spare).
    pub fn suggested_max_index(&self) -> usize {
        match self {
            CircularDist::Uniform | CircularDist::Cardioid { .. } => 1,
            _ => {
                let mut t = 8;
                while t < MAX_SUGGESTED_INDEX && self.char_sq_envelope(t) >= ENVELOPE_SQ_FLOOR {
                    t *= 2;
                }
                t
            }
        }
    }

    /// One random draw.
    ///
    /// Methods: uniform directly; von Mises by Best–Fisher rejection;
    /// wrapped normal/Cauchy by wrapping a linear variate; cardioid by
    /// rejection against the uniform envelope; triangular by closed-form
    /// inverse CDF; wrapped skew-normal through the two-normal
    /// representation, wrapped.
    ///
    /// # Errors
    ///
    /// Wrapped stable sampling exists only for α = 2 (a wrapped normal) and
    /// α = 1 (a wrapped Cauchy; β does not enter its characteristic
    /// function); other α are rejected.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        match *self {
            CircularDist::Uniform => Ok(rng.random::<f64>() * TAU),
            CircularDist::VonMises { mu, kappa } => Ok(sample_von_mises(rng, mu, kappa)),
            CircularDist::WrappedNormal { mu, rho } => {
                if rho < 1e-10 {
                    return Ok(rng.random::<f64>() * TAU);
                }
                let sigma = (-2.0 * rho.ln()).sqrt();
                let normal = Normal::new(mu, sigma).expect("validated scale");
                wrap_angle(normal.sample(rng))
            }
            CircularDist::WrappedCauchy { mu, rho } => {
                if rho < 1e-10 {
                    return Ok(rng.random::<f64>() * TAU);
                }
                let gamma = -rho.ln();
                let cauchy = Cauchy::new(mu, gamma).expect("validated scale");
                wrap_angle(cauchy.sample(rng))
            }
            CircularDist::Cardioid { mu, rho } => {
                // Accept θ ~ U with probability (1 + 2ρcos(θ−μ))/(1 + 2ρ).
                loop {
                    let theta = rng.random::<f64>() * TAU;
                    let u: f64 = rng.random();
                    if u * (1.0 + 2.0 * rho) <= 1.0 + 2.0 * rho * (theta - mu).cos() {
                        return Ok(theta);
                    }
                }
            }
            CircularDist::Triangular { rho } => {
                let u: f64 = rng.random();
                Ok(sample_triangular(u, rho))
            }
            CircularDist::WrappedSkewNormal { xi, eta, lambda } => {
                let delta = lambda / (1.0 + lambda * lambda).sqrt();
                let z0: f64 = rng.sample(StandardNormal);
                let z1: f64 = rng.sample(StandardNormal);
                let w = delta * z0.abs() + (1.0 - delta * delta).sqrt() * z1;
                wrap_angle(xi + eta * w)
            }
            CircularDist::WrappedStable {
                mu,
                tau,
                alpha,
                beta,
            } => {
                if alpha == 2.0 {
                    // φ_t = e^{−τt²}: a wrapped normal with ρ = e^{−τ}.
                    let normal = Normal::new(mu, (2.0 * tau).sqrt()).expect("validated scale");
                    wrap_angle(normal.sample(rng))
                } else if alpha == 1.0 {
                    // φ_t = e^{−τ|t|}: a wrapped Cauchy with scale τ.
                    let cauchy = Cauchy::new(mu, tau).expect("validated scale");
                    wrap_angle(cauchy.sample(rng))
                } else {
                    Err(Error::UnsupportedSampling { alpha, beta })
                }
            }
        }
    }

    /// `n ≥ 1` independent draws.
    ///
    /// # Errors
    ///
    /// Rejects `n = 0` and propagates [`CircularDist::sample_one`] errors.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::SampleTooSmall { needed: 1, got: 0 });
        }
        (0..n).map(|_| self.sample_one(rng)).collect()
    }
}

impl fmt::Display for CircularDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CircularDist::Uniform => write!(f, "uniform"),
            CircularDist::VonMises { mu, kappa } => write!(f, "vM(mu={mu:.4}, kappa={kappa})"),
            CircularDist::WrappedNormal { mu, rho } => write!(f, "WN(mu={mu:.4}, rho={rho})"),
            CircularDist::WrappedCauchy { mu, rho } => write!(f, "WC(mu={mu:.4}, rho={rho})"),
            CircularDist::Cardioid { mu, rho } => write!(f, "C(mu={mu:.4}, rho={rho})"),
            CircularDist::Triangular { rho } => write!(f, "TR(rho={rho})"),
            CircularDist::WrappedSkewNormal { xi, eta, lambda } => {
                write!(f, "WSN(xi={xi:.4}, eta={eta}, lambda={lambda})")
            }
            CircularDist::WrappedStable {
                mu,
                tau,
                alpha,
                beta,
            } => write!(f, "WS(mu={mu:.4}, tau={tau}, alpha={alpha}, beta={beta})"),
        }
    }
}

fn check_rho(rho: f64, sup: f64, kind: &str) -> Result<()> {
    if !rho.is_finite() || rho < 0.0 || rho >= sup {
        return Err(Error::InvalidParameter(format!(
            "{kind} concentration must lie in [0, {sup}), got {rho}"
        )));
    }
    Ok(())
}

/// Linear skew-normal density 2φ(z)Φ(λz).
fn skew_normal_pdf(z: f64, lambda: f64) -> f64 {
    let phi = (-z * z / 2.0).exp() / TAU.sqrt();
    let cdf = 0.5 * (1.0 + libm::erf(lambda * z / std::f64::consts::SQRT_2));
    2.0 * phi * cdf
}

/// Gaussian-envelope bound on the wrapped skew-normal's one-sided discarded
/// energy `Σ_{t>T} |φ_t|²`, from `|φ_t|² ≤ 4.2·exp(−at²)`, `a = η²/(1+λ²)`.
fn wsn_tail_sq(eta: f64, lambda: f64, max_index: usize) -> f64 {
    let a = eta * eta / (1.0 + lambda * lambda);
    let t1 = max_index as f64 + 1.0;
    let q = (-2.0 * a * t1).exp();
    if q >= 1.0 {
        return f64::INFINITY;
    }
    4.2 * (-a * t1 * t1).exp() / (1.0 - q)
}

/// Bound on `Σ_{t>T} h(t)` for decreasing `h`, by doubling blocks:
/// each block `(2^k T, 2^{k+1} T]` contributes at most `2^k T · h(2^k T + 1)`.
fn decreasing_tail_sq<H: Fn(f64) -> f64>(h: H, max_index: usize) -> f64 {
    if max_index == 0 {
        return h(1.0) + decreasing_tail_sq(h, 1);
    }
    let mut total = 0.0;
    let mut start = max_index as f64;
    for _ in 0..200 {
        let block = start * h(start + 1.0);
        total += block;
        if block < 1e-300 {
            break;
        }
        start *= 2.0;
    }
    total
}

/// Best–Fisher rejection sampler for the von Mises distribution.
fn sample_von_mises<R: Rng + ?Sized>(rng: &mut R, mu: f64, kappa: f64) -> f64 {
    if kappa < 1e-10 {
        return rng.random::<f64>() * TAU;
    }
    let a = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
    let b = (a - (2.0 * a).sqrt()) / (2.0 * kappa);
    let r = (1.0 + b * b) / (2.0 * b);
    loop {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        let z = (PI * u1).cos();
        let f = (1.0 + r * z) / (r + z);
        let c = kappa * (r - f);
        if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
            let u3: f64 = rng.random();
            let theta = if u3 > 0.5 {
                mu + f.acos()
            } else {
                mu - f.acos()
            };
            return theta.rem_euclid(TAU);
        }
    }
}

/// Closed-form inverse CDF of the triangular distribution.
///
/// On `[0, π]` the CDF is `[(4 + π²ρ)θ − πρθ²]/(8π)`; solving the quadratic
/// and rationalizing gives a form that is exact at ρ = 0 as well. The upper
/// half follows by symmetry.
fn sample_triangular(u: f64, rho: f64) -> f64 {
    let invert_lower = |u: f64| {
        let b = 4.0 + PI * PI * rho;
        let disc = (b * b - 32.0 * PI * PI * rho * u).max(0.0);
        16.0 * PI * u / (b + disc.sqrt())
    };
    if u <= 0.5 {
        invert_lower(u)
    } else {
        (TAU - invert_lower(1.0 - u)).rem_euclid(TAU)
    }
}

/// A finite mixture of circular distributions, identified by a catalog id.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    id: String,
    components: Vec<(f64, CircularDist)>,
}

impl ScenarioSpec {
    /// Builds a mixture from `(weight, component)` pairs.
    ///
    /// # Errors
    ///
    /// Weights must be positive and sum to 1 within 1e-12.
    pub fn new(id: impl Into<String>, components: Vec<(f64, CircularDist)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter(
                "scenario needs at least one component".into(),
            ));
        }
        if components.iter().any(|&(w, _)| !w.is_finite() || w <= 0.0) {
            return Err(Error::InvalidParameter(
                "mixture weights must be positive".into(),
            ));
        }
        let total: f64 = components.iter().map(|&(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "mixture weights must sum to 1, got {total}"
            )));
        }
        Ok(ScenarioSpec {
            id: id.into(),
            components,
        })
    }

    /// Catalog id, e.g. "M7".
    pub fn id(&self) -> &str {
        &self.id
    }

    /// Weighted components.
    pub fn components(&self) -> &[(f64, CircularDist)] {
        &self.components
    }

    /// Mixture density: the weighted sum of component densities.
    pub fn density(&self, theta: f64) -> f64 {
        self.components
            .iter()
            .map(|&(w, ref d)| w * d.density(theta))
            .sum()
    }

    /// Mixture coefficient: the weighted sum of component coefficients.
    pub fn char_fn(&self, t: i64) -> Complex64 {
        self.components
            .iter()
            .map(|&(w, ref d)| w * d.char_fn(t))
            .sum()
    }

    /// Mixture coefficients up to `max_index`, with the tail bound combined
    /// across components (`|Σ w_i φ_i|² ≤ Σ w_i |φ_i|²` termwise).
    ///
    /// # Errors
    ///
    /// Propagates component coefficient errors.
    pub fn char_seq(&self, max_index: usize) -> Result<CharSeq> {
        let mut coeffs = vec![Complex64::ZERO; max_index + 1];
        let mut truncated = false;
        let mut tail = 0.0;
        for &(w, ref dist) in &self.components {
            let part = dist.char_seq(max_index)?;
            for (t, c) in coeffs.iter_mut().enumerate() {
                *c += w * part.get(t as i64);
            }
            truncated |= part.truncated();
            tail += w * part.tail_sq_bound().unwrap_or(f64::INFINITY);
        }
        let seq = CharSeq::new(coeffs, truncated)?;
        Ok(if truncated {
            seq.with_tail_sq_bound(tail)
        } else {
            seq
        })
    }

    /// Largest suggested truncation index across components.
    pub fn suggested_max_index(&self) -> usize {
        self.components
            .iter()
            .map(|(_, d)| d.suggested_max_index())
            .max()
            .unwrap_or(1)
    }

    /// One draw: pick a component by weight, then sample it.
    ///
    /// # Errors
    ///
    /// Propagates component sampling errors.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let mut u = rng.random::<f64>();
        for &(w, ref dist) in &self.components {
            if u < w {
                return dist.sample_one(rng);
            }
            u -= w;
        }
        // Rounding can push u past the final cumulative weight.
        self.components[self.components.len() - 1].1.sample_one(rng)
    }

    /// `n ≥ 1` independent draws.
    ///
    /// # Errors
    ///
    /// Rejects `n = 0` and propagates component sampling errors.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::SampleTooSmall { needed: 1, got: 0 });
        }
        (0..n).map(|_| self.sample_one(rng)).collect()
    }

    /// Human-readable composition, e.g. `0.500 vM(mu=0.0000, kappa=4) + …`.
    pub fn description(&self) -> String {
        self.components
            .iter()
            .map(|(w, d)| format!("{w:.3} {d}"))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// The twenty standard benchmark scenarios M1–M20.
pub fn scenario_catalog() -> Vec<ScenarioSpec> {
    let vm = |mu: f64, kappa: f64| CircularDist::von_mises(mu, kappa).expect("catalog params");
    let wn = |mu: f64, rho: f64| CircularDist::wrapped_normal(mu, rho).expect("catalog params");
    let wc = |mu: f64, rho: f64| CircularDist::wrapped_cauchy(mu, rho).expect("catalog params");
    let card = |mu: f64, rho: f64| CircularDist::cardioid(mu, rho).expect("catalog params");
    let wsn =
        |xi: f64, eta: f64, lam: f64| CircularDist::wrapped_skew_normal(xi, eta, lam).expect("catalog params");
    let single = |id: &str, d: CircularDist| ScenarioSpec::new(id, vec![(1.0, d)]).expect("catalog");
    let mix = |id: &str, parts: Vec<(f64, CircularDist)>| ScenarioSpec::new(id, parts).expect("catalog");

    vec![
        single("M1", CircularDist::uniform()),
        single("M2", vm(PI, 1.0)),
        single("M3", wn(PI, 0.9)),
        single("M4", card(PI, 0.5)),
        single("M5", wc(PI, 0.8)),
        single("M6", wsn(PI, 1.0, 20.0)),
        mix("M7", vec![(0.5, vm(0.0, 4.0)), (0.5, vm(PI, 4.0))]),
        mix("M8", vec![(0.5, vm(2.0, 5.0)), (0.5, vm(4.0, 5.0))]),
        mix(
            "M9",
            vec![(0.25, vm(0.0, 2.0)), (0.75, vm(PI / 3.0_f64.sqrt(), 2.0))],
        ),
        mix(
            "M10",
            vec![(0.8, vm(PI, 5.0)), (0.2, wc(4.0 * PI / 3.0, 0.9))],
        ),
        mix(
            "M11",
            vec![
                (1.0 / 3.0, vm(PI / 3.0, 6.0)),
                (1.0 / 3.0, vm(PI, 6.0)),
                (1.0 / 3.0, vm(5.0 * PI / 3.0, 6.0)),
            ],
        ),
        mix(
            "M12",
            vec![
                (0.4, vm(PI / 2.0, 4.0)),
                (0.2, vm(PI, 5.0)),
                (0.4, vm(3.0 * PI / 2.0, 4.0)),
            ],
        ),
        mix(
            "M13",
            vec![
                (0.4, vm(0.5, 6.0)),
                (0.4, vm(3.0, 6.0)),
                (0.2, vm(5.0, 24.0)),
            ],
        ),
        mix(
            "M14",
            vec![
                (0.25, vm(0.0, 12.0)),
                (0.25, vm(PI / 2.0, 12.0)),
                (0.25, vm(PI, 12.0)),
                (0.25, vm(3.0 * PI / 2.0, 12.0)),
            ],
        ),
        mix(
            "M15",
            vec![
                (0.3, wc(PI - 1.0, 0.6)),
                (0.25, wn(PI + 0.5, 0.9)),
                (0.25, vm(PI + 2.0, 3.0)),
                (0.2, wsn(6.0, 1.0, 3.0)),
            ],
        ),
        mix(
            "M16",
            vec![
                (0.2, vm(PI / 5.0, 18.0)),
                (0.2, vm(3.0 * PI / 5.0, 18.0)),
                (0.2, vm(PI, 18.0)),
                (0.2, vm(7.0 * PI / 5.0, 18.0)),
                (0.2, vm(9.0 * PI / 5.0, 18.0)),
            ],
        ),
        mix("M17", vec![(2.0 / 3.0, card(PI, 0.5)), (1.0 / 3.0, wc(PI, 0.9))]),
        mix(
            "M18",
            vec![
                (0.5, vm(PI, 1.0)),
                (1.0 / 6.0, vm(PI - 0.8, 30.0)),
                (1.0 / 6.0, vm(PI, 30.0)),
                (1.0 / 6.0, vm(PI + 0.8, 30.0)),
            ],
        ),
        mix(
            "M19",
            vec![
                (4.0 / 9.0, vm(2.0, 3.0)),
                (5.0 / 36.0, vm(4.0, 3.0)),
                (5.0 / 36.0, vm(3.5, 50.0)),
                (5.0 / 36.0, vm(4.0, 50.0)),
                (5.0 / 36.0, vm(4.5, 50.0)),
            ],
        ),
        mix(
            "M20",
            vec![
                (1.0 / 3.0, wsn(0.0, 0.7, 20.0)),
                (1.0 / 3.0, wsn(PI, 0.7, 20.0)),
                (1.0 / 6.0, wc(3.0 * PI / 4.0, 0.9)),
                (1.0 / 6.0, wc(7.0 * PI / 4.0, 0.9)),
            ],
        ),
    ]
}

/// Looks up a catalog scenario by id ("M1" through "M20").
///
/// # Errors
///
/// Unknown ids are rejected.
pub fn scenario(id: &str) -> Result<ScenarioSpec> {
    scenario_catalog()
        .into_iter()
        .find(|s| s.id() == id)
        .ok_or_else(|| Error::UnknownScenario(id.to_string()))
}
