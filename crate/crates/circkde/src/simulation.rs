//! Monte Carlo harness: integrated squared error, replicated scenario runs,
//! convergence studies over growing sample sizes, and report serialization.
//!
//! Replications are independent random streams of one seeded generator, so a
//! run is reproducible bit for bit regardless of how work is scheduled across
//! threads.

use std::f64::consts::PI;
use std::fs::File;
use std::io;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::circular::{circle_grid, trapezoid_integral, CharSeq};
use crate::distributions::{scenario, ScenarioSpec};
use crate::error::Error;
use crate::estimator::{Correction, DensityEstimate};
use crate::kernels::{FlatTopKernel, Kernel, VonMisesKernel};
use crate::mise::{optimal_nu_exp, tail_contribution};
use crate::selectors::{
    default_kappa_grid, er_selector, lscv_flat_top, lscv_von_mises, DEFAULT_ER_CAP,
    DEFAULT_ER_SCALE, DEFAULT_ER_WINDOW, DEFAULT_LSCV_CAP,
};
use crate::Result;

/// Default quadrature grid size for integrated squared error.
pub const DEFAULT_ISE_GRID: usize = 1024;

/// How the integrated squared error of one fit is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IseMethod {
    /// Trapezoid rule for `∫ (f̂ − f)²` on a uniform circular grid.
    Quadrature,
    /// Spectral sum `π⁻¹ Σ_{t≥1} |φ_t(K) φ̂_t − φ_t(f)|²`, available for
    /// flat-top kernels and truths with a certified coefficient tail.
    Parseval,
}

/// Kernel family of a simulated estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelFamily {
    /// Wrapped sinc (flat-top with c = 1).
    Wsinc,
    /// Wrapped trapezoid with flatness factor c.
    Wtrap {
        /// Flatness factor of the taper band.
        c: u32,
    },
    /// Von Mises kernel, smoothed by a concentration κ.
    VonMises,
}

/// How the smoothing parameter of a simulated estimator is chosen on each
/// replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ParamRule {
    /// Use this value on every replication (ν for flat-top kernels, κ for
    /// the von Mises kernel).
    Fixed(f64),
    /// Least-squares cross-validation with the default search range.
    Lscv,
    /// The empirical coefficient-noise rule with default threshold, window,
    /// and cap.
    Er,
    /// Theoretical rule `ν = ⌊(τ⁻¹ log n)^{1/α}⌋` for exponentially decaying
    /// coefficients; flat-top kernels only.
    ExpRule {
        /// Exponential decay rate of the target's coefficients.
        tau: f64,
        /// Decay exponent of the target's coefficients.
        alpha: f64,
    },
}

/// One estimator entering a simulation: a kernel family plus a rule for its
/// smoothing parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatorConfig {
    /// Kernel family.
    pub family: KernelFamily,
    /// Smoothing-parameter rule.
    pub rule: ParamRule,
}

impl EstimatorConfig {
    /// Validates a family/rule combination.
    ///
    /// # Errors
    ///
    /// The von Mises kernel admits only [`ParamRule::Fixed`] (a
    /// concentration) and [`ParamRule::Lscv`]; fixed flat-top values must be
    /// finite and non-negative, fixed concentrations positive.
    pub fn new(family: KernelFamily, rule: ParamRule) -> Result<Self> {
        match (family, rule) {
            (KernelFamily::VonMises, ParamRule::Er) => {
                return Err(Error::InvalidParameter(
                    "the empirical rule tracks spectral cutoffs and applies only to flat-top kernels"
                        .into(),
                ));
            }
            (KernelFamily::VonMises, ParamRule::ExpRule { .. }) => {
                return Err(Error::InvalidParameter(
                    "the exponential-decay rule selects a cutoff and applies only to flat-top kernels"
                        .into(),
                ));
            }
            (KernelFamily::VonMises, ParamRule::Fixed(kappa)) => {
                VonMisesKernel::new(kappa)?;
            }
            (_, ParamRule::Fixed(nu)) => {
                let c = if let KernelFamily::Wtrap { c } = family {
                    c
                } else {
                    1
                };
                FlatTopKernel::new(nu, c)?;
            }
            _ => {}
        }
        Ok(EstimatorConfig { family, rule })
    }

    /// Parses the command-line grammar `kernel:selector-or-value[:c]`.
    ///
    /// The kernel token is `wsinc`, `wtrap`, or `vonmises`; the second token
    /// is `er`, `lscv`, `nu=<value>` (flat-top) or `kappa=<value>` (von
    /// Mises); an optional third token sets the trapezoid's flatness factor
    /// (`wtrap` only, default 2). Examples: `wsinc:er`, `wtrap:lscv:2`,
    /// `wsinc:nu=4`, `vonmises:kappa=8`.
    ///
    /// # Errors
    ///
    /// Any token outside the grammar yields [`Error::BadEstimatorSpec`] with
    /// the offending spec and a reason.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = |reason: String| Error::BadEstimatorSpec {
            spec: spec.to_owned(),
            reason,
        };
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err(bad(
                "expected kernel:selector-or-value[:c], e.g. wsinc:er or wtrap:lscv:2".into(),
            ));
        }
        let family = match parts[0] {
            "wsinc" => KernelFamily::Wsinc,
            "wtrap" => {
                let c = match parts.get(2) {
                    None => 2,
                    Some(raw) => match raw.parse::<u32>() {
                        Ok(c) if c >= 1 => c,
                        _ => {
                            return Err(bad(format!(
                                "flatness factor must be an integer ≥ 1, got '{raw}'"
                            )))
                        }
                    },
                };
                KernelFamily::Wtrap { c }
            }
            "vonmises" => KernelFamily::VonMises,
            other => return Err(bad(format!("unknown kernel family '{other}'"))),
        };
        if parts.len() == 3 && !matches!(family, KernelFamily::Wtrap { .. }) {
            return Err(bad(format!(
                "a flatness factor only applies to wtrap, not '{}'",
                parts[0]
            )));
        }
        let rule = if parts[1] == "er" {
            ParamRule::Er
        } else if parts[1] == "lscv" {
            ParamRule::Lscv
        } else if let Some(raw) = parts[1].strip_prefix("nu=") {
            if family == KernelFamily::VonMises {
                return Err(bad("the von Mises kernel takes kappa=<value>, not nu=".into()));
            }
            match raw.parse::<f64>() {
                Ok(nu) => ParamRule::Fixed(nu),
                Err(_) => return Err(bad(format!("cannot parse smoothing value '{raw}'"))),
            }
        } else if let Some(raw) = parts[1].strip_prefix("kappa=") {
            if family != KernelFamily::VonMises {
                return Err(bad("flat-top kernels take nu=<value>, not kappa=".into()));
            }
            match raw.parse::<f64>() {
                Ok(kappa) => ParamRule::Fixed(kappa),
                Err(_) => return Err(bad(format!("cannot parse concentration '{raw}'"))),
            }
        } else {
            return Err(bad(format!(
                "unknown selector '{}': use er, lscv, nu=<value>, or kappa=<value>",
                parts[1]
            )));
        };
        EstimatorConfig::new(family, rule).map_err(|e| bad(e.to_string()))
    }

    /// Kernel label used in reports: `wsinc`, `wtrap:<c>`, or `vonmises`.
    pub fn estimator_label(&self) -> String {
        match self.family {
            KernelFamily::Wsinc => "wsinc".into(),
            KernelFamily::Wtrap { c } => format!("wtrap:{c}"),
            KernelFamily::VonMises => "vonmises".into(),
        }
    }

    /// Selector label used in reports: `er`, `lscv`, `nu=<v>`/`kappa=<v>`,
    /// or `exp(tau=<τ>;alpha=<α>)`.
    pub fn selector_label(&self) -> String {
        match self.rule {
            ParamRule::Er => "er".into(),
            ParamRule::Lscv => "lscv".into(),
            ParamRule::Fixed(value) => {
                if self.family == KernelFamily::VonMises {
                    format!("kappa={value}")
                } else {
                    format!("nu={value}")
                }
            }
            ParamRule::ExpRule { tau, alpha } => format!("exp(tau={tau};alpha={alpha})"),
        }
    }

    /// Selects the smoothing parameter on `sample` and fits the estimate
    /// (no non-negativity correction — simulations score the raw estimate).
    ///
    /// Returns the fit, the selected parameter, and whether the selection
    /// ended pinned at its search boundary.
    ///
    /// # Errors
    ///
    /// Propagates selector and fitting failures.
    pub fn fit(&self, sample: &[f64]) -> Result<(DensityEstimate, f64, bool)> {
        match self.family {
            KernelFamily::Wsinc | KernelFamily::Wtrap { .. } => {
                let c = if let KernelFamily::Wtrap { c } = self.family {
                    c
                } else {
                    1
                };
                let (nu, at_boundary) = match self.rule {
                    ParamRule::Fixed(nu) => (nu, false),
                    ParamRule::Lscv => {
                        let result = lscv_flat_top(sample, c, DEFAULT_LSCV_CAP)?;
                        (result.chosen, result.at_boundary)
                    }
                    ParamRule::Er => {
                        let result =
                            er_selector(sample, DEFAULT_ER_SCALE, DEFAULT_ER_WINDOW, DEFAULT_ER_CAP)?;
                        (result.chosen, result.at_boundary)
                    }
                    ParamRule::ExpRule { tau, alpha } => {
                        (optimal_nu_exp(tau, alpha, sample.len())? as f64, false)
                    }
                };
                let kernel = FlatTopKernel::new(nu, c)?;
                let fit = DensityEstimate::fit(sample, kernel, Correction::None)?;
                Ok((fit, nu, at_boundary))
            }
            KernelFamily::VonMises => {
                let (kappa, at_boundary) = match self.rule {
                    ParamRule::Fixed(kappa) => (kappa, false),
                    ParamRule::Lscv => {
                        let result = lscv_von_mises(sample, &default_kappa_grid())?;
                        (result.chosen, result.at_boundary)
                    }
                    ParamRule::Er | ParamRule::ExpRule { .. } => {
                        return Err(Error::InvalidParameter(
                            "cutoff rules apply only to flat-top kernels".into(),
                        ));
                    }
                };
                let kernel = VonMisesKernel::new(kappa)?;
                let fit = DensityEstimate::fit(sample, kernel, Correction::None)?;
                Ok((fit, kappa, at_boundary))
            }
        }
    }
}

/// Integrated squared error `∫ (f̂ − f)²` of a raw fit against a known truth.
///
/// `Quadrature` evaluates both densities on a `grid_size`-point uniform grid
/// and applies the periodic trapezoid rule. `Parseval` computes the exact
/// spectral sum `π⁻¹ Σ_{t≥1} |φ_t(K) φ̂_t − φ_t(f)|²`, truncated at the
/// larger of the kernel's support and the truth's certified coefficient
/// range; it is exact for flat-top kernels because every omitted term is
/// covered by the truth's tail bound.
///
/// # Errors
///
/// `Parseval` refuses the von Mises kernel ([`Error::InfiniteSupportKernel`])
/// and truths whose neglected coefficient tail cannot be certified below
/// the accuracy gate ([`Error::TailBoundExceeded`]). `Quadrature` requires
/// at least 8 grid points.
pub fn ise(
    estimate: &DensityEstimate,
    truth: &ScenarioSpec,
    grid_size: usize,
    method: IseMethod,
) -> Result<f64> {
    match method {
        IseMethod::Quadrature => {
            let thetas = circle_grid(grid_size);
            let truth_vals: Vec<f64> = thetas.iter().map(|&t| truth.density(t)).collect();
            ise_quadrature(estimate, &thetas, &truth_vals)
        }
        IseMethod::Parseval => {
            let seq = truth.char_seq(truth.suggested_max_index())?;
            tail_contribution(&seq)?;
            ise_parseval(estimate, &seq)
        }
    }
}

/// Trapezoid-rule ISE against precomputed truth values on `thetas`.
fn ise_quadrature(estimate: &DensityEstimate, thetas: &[f64], truth_vals: &[f64]) -> Result<f64> {
    let sq_diff: Vec<f64> = thetas
        .iter()
        .zip(truth_vals)
        .map(|(&theta, &f)| (estimate.eval(theta) - f).powi(2))
        .collect();
    trapezoid_integral(&sq_diff)
}

/// Spectral ISE against a truth coefficient sequence whose tail has already
/// passed the accuracy gate.
fn ise_parseval(estimate: &DensityEstimate, truth_seq: &CharSeq) -> Result<f64> {
    let Kernel::FlatTop(kernel) = estimate.kernel() else {
        return Err(Error::InfiniteSupportKernel);
    };
    let ecf = estimate
        .cached_coeffs()
        .expect("flat-top fits cache their empirical coefficients");
    let support = kernel.support_end();
    let t_max = support.max(truth_seq.max_index());
    let mut sum = 0.0;
    for t in 1..=t_max {
        let smoothed = kernel.char_coeff(t as i64) * ecf.get(t as i64);
        sum += (smoothed - truth_seq.get(t as i64)).norm_sqr();
    }
    Ok(sum / PI)
}

/// A replicated simulation of one scenario at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    /// Catalog scenario to sample from.
    pub scenario_id: String,
    /// Sample size per replication.
    pub n: usize,
    /// Number of replications.
    pub reps: usize,
    /// Estimators fitted to each replication's sample.
    pub estimators: Vec<EstimatorConfig>,
    /// Base seed; replication r uses the seed's stream r.
    pub seed: u64,
    /// Quadrature grid size for the ISE.
    pub ise_grid: usize,
    /// ISE computation method.
    pub ise_method: IseMethod,
}

impl SimulationConfig {
    /// A configuration with the default ISE settings (1024-point
    /// quadrature).
    pub fn new(
        scenario_id: impl Into<String>,
        n: usize,
        reps: usize,
        estimators: Vec<EstimatorConfig>,
        seed: u64,
    ) -> Self {
        SimulationConfig {
            scenario_id: scenario_id.into(),
            n,
            reps,
            estimators,
            seed,
            ise_grid: DEFAULT_ISE_GRID,
            ise_method: IseMethod::Quadrature,
        }
    }
}

/// One successful replication of one estimator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepOutcome {
    /// Replication index, 0-based.
    pub rep: usize,
    /// Integrated squared error of the raw fit.
    pub ise: f64,
    /// Smoothing parameter used on this replication.
    pub selected_param: f64,
    /// Whether the selector ended pinned at its search boundary.
    pub at_boundary: bool,
}

/// Aggregated results for one estimator across all replications.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorSummary {
    /// Kernel label (`wsinc`, `wtrap:<c>`, `vonmises`).
    pub estimator: String,
    /// Selector label (`er`, `lscv`, `nu=<v>`, …).
    pub selector: String,
    /// Mean ISE over successful replications, ×10⁴.
    pub mean_ise_e4: f64,
    /// Standard error of the mean ISE (sd/√reps), ×10⁴.
    pub se_ise_e4: f64,
    /// Per-replication outcomes in replication order.
    pub outcomes: Vec<RepOutcome>,
    /// Distinct selected parameters with their frequencies.
    pub selected_histogram: Vec<(f64, usize)>,
    /// Number of replications whose selection hit its boundary.
    pub boundary_hits: usize,
    /// Number of replications that failed for this estimator.
    pub failures: usize,
}

/// Full record of a replicated simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    /// Scenario identifier.
    pub scenario: String,
    /// Sample size per replication.
    pub n: usize,
    /// Number of replications attempted.
    pub reps: usize,
    /// Base seed.
    pub seed: u64,
    /// One summary per configured estimator, in configuration order.
    pub estimators: Vec<EstimatorSummary>,
    /// Human-readable notes for every failed replication.
    pub failures: Vec<String>,
}

/// Serialization format for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// One row per estimator × replication:
    /// `scenario,n,estimator,selector,rep,ise,selected_param`.
    Csv,
    /// The full report as pretty-printed JSON.
    Json,
}

/// Runs a replicated simulation.
///
/// Each replication r draws its sample from stream r of the seeded
/// generator, shares that sample across all estimators, and scores each raw
/// fit by the configured ISE method. Replications run in parallel; the
/// report is identical regardless of thread count. A failing replication is
/// recorded in the report and never aborts the run.
///
/// # Errors
///
/// Rejects an unknown scenario, zero replications, a quadrature grid below
/// 8 points, and (when any estimator selects its parameter from data) a
/// sample size below 2. With `Parseval` scoring, truths without a
/// certifiable coefficient tail are rejected up front.
pub fn run_scenario(config: &SimulationConfig) -> Result<SimReport> {
    if config.reps == 0 {
        return Err(Error::InvalidParameter(
            "a simulation needs at least one replication".into(),
        ));
    }
    if config.n == 0 {
        return Err(Error::SampleTooSmall { needed: 1, got: 0 });
    }
    let data_driven = config.estimators.iter().any(|e| {
        matches!(e.rule, ParamRule::Lscv | ParamRule::Er)
    });
    if data_driven && config.n < 2 {
        return Err(Error::SampleTooSmall {
            needed: 2,
            got: config.n,
        });
    }
    let spec = scenario(&config.scenario_id)?;

    // Truth quantities are shared across replications.
    let truth_cache = match config.ise_method {
        IseMethod::Quadrature => {
            if config.ise_grid < 8 {
                return Err(Error::GridTooSmall {
                    needed: 8,
                    got: config.ise_grid,
                });
            }
            let thetas = circle_grid(config.ise_grid);
            let vals: Vec<f64> = thetas.iter().map(|&t| spec.density(t)).collect();
            TruthCache::Grid { thetas, vals }
        }
        IseMethod::Parseval => {
            let seq = spec.char_seq(spec.suggested_max_index())?;
            tail_contribution(&seq)?;
            TruthCache::Seq(seq)
        }
    };

    let per_rep: Vec<Vec<std::result::Result<RepOutcome, String>>> = (0..config.reps)
        .into_par_iter()
        .map(|rep| run_rep(config, &spec, &truth_cache, rep))
        .collect();

    let mut summaries = Vec::with_capacity(config.estimators.len());
    let mut failures = Vec::new();
    for (idx, estimator) in config.estimators.iter().enumerate() {
        let mut outcomes = Vec::new();
        let mut failed = 0usize;
        for (rep, rep_results) in per_rep.iter().enumerate() {
            match &rep_results[idx] {
                Ok(outcome) => outcomes.push(outcome.clone()),
                Err(reason) => {
                    failed += 1;
                    failures.push(format!(
                        "rep {rep}, {}:{}: {reason}",
                        estimator.estimator_label(),
                        estimator.selector_label()
                    ));
                }
            }
        }
        let ises: Vec<f64> = outcomes.iter().map(|o| o.ise).collect();
        let (mean, se) = mean_and_se(&ises);
        let selected: Vec<f64> = outcomes.iter().map(|o| o.selected_param).collect();
        let boundary_hits = outcomes.iter().filter(|o| o.at_boundary).count();
        summaries.push(EstimatorSummary {
            estimator: estimator.estimator_label(),
            selector: estimator.selector_label(),
            mean_ise_e4: mean * 1e4,
            se_ise_e4: se * 1e4,
            outcomes,
            selected_histogram: histogram(&selected),
            boundary_hits,
            failures: failed,
        });
    }
    Ok(SimReport {
        scenario: config.scenario_id.clone(),
        n: config.n,
        reps: config.reps,
        seed: config.seed,
        estimators: summaries,
        failures,
    })
}

/// Shared truth quantities for the configured ISE method.
enum TruthCache {
    Grid { thetas: Vec<f64>, vals: Vec<f64> },
    Seq(CharSeq),
}

/// One replication: draw the sample from its own stream, fit every
/// estimator, and score each fit. Failures are carried as messages so the
/// run can aggregate them without aborting.
fn run_rep(
    config: &SimulationConfig,
    spec: &ScenarioSpec,
    truth: &TruthCache,
    rep: usize,
) -> Vec<std::result::Result<RepOutcome, String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(rep as u64);
    let sample = match spec.sample(&mut rng, config.n) {
        Ok(sample) => sample,
        Err(e) => {
            let msg = format!("sampling failed: {e}");
            return config.estimators.iter().map(|_| Err(msg.clone())).collect();
        }
    };
    config
        .estimators
        .iter()
        .map(|estimator| {
            let (fit, selected_param, at_boundary) = estimator.fit(&sample)?;
            let ise = match truth {
                TruthCache::Grid { thetas, vals } => ise_quadrature(&fit, thetas, vals)?,
                TruthCache::Seq(seq) => ise_parseval(&fit, seq)?,
            };
            Ok(RepOutcome {
                rep,
                ise,
                selected_param,
                at_boundary,
            })
        })
        .map(|r: Result<RepOutcome>| r.map_err(|e| e.to_string()))
        .collect()
}

/// One sample size of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergencePoint {
    /// Sample size.
    pub n: usize,
    /// Mean ISE over the replications at this size.
    pub mean_ise: f64,
}

/// Mean ISE against sample size, with the fitted log-log slope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    /// Scenario identifier.
    pub scenario: String,
    /// Kernel label.
    pub estimator: String,
    /// Selector label.
    pub selector: String,
    /// Mean ISE per sample size, in input order.
    pub points: Vec<ConvergencePoint>,
    /// Least-squares slope of log mean-ISE against log n; `None` when the
    /// study is degenerate or has fewer than two points.
    pub slope: Option<f64>,
    /// Whether some mean ISE is exactly zero (the estimator recovers the
    /// truth exactly), making the log-log slope undefined.
    pub degenerate: bool,
}

/// Measures how the mean ISE of one estimator decays as n grows.
///
/// Sample size index i and replication r draw from stream `(i << 32) | r`,
/// so every (size, replication) pair is an independent stream of the same
/// seed. The slope is the least-squares fit of log mean-ISE on log n; a
/// study with an exactly zero mean (exact recovery of the truth) is flagged
/// degenerate instead of fitting a slope.
///
/// # Errors
///
/// Rejects an empty size list, zero replications, and unknown scenarios;
/// a replication failure aborts the study with its cause.
pub fn convergence_study(
    scenario_id: &str,
    n_list: &[usize],
    estimator: &EstimatorConfig,
    reps: usize,
    seed: u64,
) -> Result<ConvergenceReport> {
    if n_list.is_empty() {
        return Err(Error::InvalidParameter(
            "a convergence study needs at least one sample size".into(),
        ));
    }
    if reps == 0 {
        return Err(Error::InvalidParameter(
            "a convergence study needs at least one replication".into(),
        ));
    }
    let spec = scenario(scenario_id)?;
    let thetas = circle_grid(DEFAULT_ISE_GRID);
    let truth_vals: Vec<f64> = thetas.iter().map(|&t| spec.density(t)).collect();

    let mut points = Vec::with_capacity(n_list.len());
    for (idx, &n) in n_list.iter().enumerate() {
        let ises: Vec<f64> = (0..reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(((idx as u64) << 32) | rep as u64);
                let sample = spec.sample(&mut rng, n)?;
                let (fit, _, _) = estimator.fit(&sample)?;
                ise_quadrature(&fit, &thetas, &truth_vals)
            })
            .collect::<Result<_>>()?;
        let mean = ises.iter().sum::<f64>() / ises.len() as f64;
        points.push(ConvergencePoint { n, mean_ise: mean });
    }

    let degenerate = points.iter().any(|p| p.mean_ise <= 0.0);
    let slope = if degenerate || points.len() < 2 {
        None
    } else {
        let pairs: Vec<(f64, f64)> = points
            .iter()
            .map(|p| ((p.n as f64).ln(), p.mean_ise.ln()))
            .collect();
        Some(lsq_slope(&pairs))
    };
    Ok(ConvergenceReport {
        scenario: scenario_id.to_owned(),
        estimator: estimator.estimator_label(),
        selector: estimator.selector_label(),
        points,
        slope,
        degenerate,
    })
}

/// Writes a simulation report to disk.
///
/// CSV output has the header
/// `scenario,n,estimator,selector,rep,ise,selected_param` and one row per
/// successful estimator × replication (header only when there is nothing to
/// report); numbers are written in shortest round-trip form. JSON output is
/// the whole report.
///
/// # Errors
///
/// File-system failures carry the offending path.
pub fn emit_report(report: &SimReport, format: ReportFormat, path: &Path) -> Result<()> {
    let io_err = |source: io::Error| Error::Io {
        path: path.display().to_string(),
        source,
    };
    match format {
        ReportFormat::Csv => {
            let mut writer = csv::Writer::from_path(path).map_err(|e| io_err(flatten_csv(e)))?;
            writer
                .write_record([
                    "scenario",
                    "n",
                    "estimator",
                    "selector",
                    "rep",
                    "ise",
                    "selected_param",
                ])
                .map_err(|e| io_err(flatten_csv(e)))?;
            for summary in &report.estimators {
                for outcome in &summary.outcomes {
                    writer
                        .write_record([
                            report.scenario.as_str(),
                            &report.n.to_string(),
                            &summary.estimator,
                            &summary.selector,
                            &outcome.rep.to_string(),
                            &outcome.ise.to_string(),
                            &outcome.selected_param.to_string(),
                        ])
                        .map_err(|e| io_err(flatten_csv(e)))?;
                }
            }
            writer.flush().map_err(io_err)
        }
        ReportFormat::Json => {
            let file = File::create(path).map_err(io_err)?;
            serde_json::to_writer_pretty(file, report)
                .map_err(|e| io_err(io::Error::other(e.to_string())))
        }
    }
}

/// Unwraps a CSV error into its underlying I/O error, or synthesizes one.
fn flatten_csv(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => io::Error::other(format!("{other:?}")),
    }
}

/// Mean and standard error (sd/√k) of a list; zeros when the list is too
/// short to estimate them.
fn mean_and_se(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Distinct values with their frequencies, ascending.
fn histogram(values: &[f64]) -> Vec<(f64, usize)> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("selected parameters are finite"));
    let mut out: Vec<(f64, usize)> = Vec::new();
    for v in sorted {
        match out.last_mut() {
            Some((value, count)) if *value == v => *count += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

/// Least-squares slope of y on x.
fn lsq_slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (k * sxy - sx * sy) / (k * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::CircularDist;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;
    use std::fs;
    use std::path::PathBuf;

    fn fit_flat_top(sample: &[f64], nu: f64, c: u32) -> DensityEstimate {
        let kernel = FlatTopKernel::new(nu, c).unwrap();
        DensityEstimate::fit(sample, kernel, Correction::None).unwrap()
    }

    fn temp_path(name: &str) -> PathBuf {
        std::env::temp_dir().join(format!("circkde-sim-{}-{name}", std::process::id()))
    }

    #[test]
    fn single_point_error_against_uniform_truth() {
        // One observation, ν = 1, c = 1, uniform truth: the estimate is
        // (1 + 2cos(θ − Θ))/2π, so ∫ (f̂ − f)² = (1/π²) ∫ cos² = 1/π.
        let truth = scenario("M1").unwrap();
        let fit = fit_flat_top(&[1.3], 1.0, 1);
        let quad = ise(&fit, &truth, 1024, IseMethod::Quadrature).unwrap();
        let spectral = ise(&fit, &truth, 1024, IseMethod::Parseval).unwrap();
        assert_relative_eq!(quad, 1.0 / PI, max_relative = 1e-12);
        assert_relative_eq!(spectral, 1.0 / PI, max_relative = 1e-14);
    }

    #[test]
    fn flat_kernel_recovers_uniform_truth_exactly() {
        let truth = scenario("M1").unwrap();
        let fit = fit_flat_top(&[0.4, 2.0, 5.5], 0.0, 1);
        assert_eq!(ise(&fit, &truth, 1024, IseMethod::Quadrature).unwrap(), 0.0);
        assert_eq!(ise(&fit, &truth, 1024, IseMethod::Parseval).unwrap(), 0.0);
    }

    #[test]
    fn quadrature_and_spectral_routes_agree() {
        // Both integrands are trigonometric polynomials well under the grid's
        // resolution, so the two routes agree to rounding error.
        let truth = scenario("M4").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sample = truth.sample(&mut rng, 50).unwrap();
        for (nu, c) in [(3.0, 1), (2.0, 2), (5.0, 3)] {
            let fit = fit_flat_top(&sample, nu, c);
            let quad = ise(&fit, &truth, 1024, IseMethod::Quadrature).unwrap();
            let spectral = ise(&fit, &truth, 1024, IseMethod::Parseval).unwrap();
            assert_relative_eq!(quad, spectral, max_relative = 1e-9);
        }
    }

    #[test]
    fn spectral_route_refuses_von_mises_kernel() {
        let truth = scenario("M4").unwrap();
        let kernel = VonMisesKernel::new(2.0).unwrap();
        let fit = DensityEstimate::fit(&[0.1, 1.0, 2.0], kernel, Correction::None).unwrap();
        let err = ise(&fit, &truth, 1024, IseMethod::Parseval).unwrap_err();
        assert!(matches!(err, Error::InfiniteSupportKernel));
        // The quadrature route still works through direct evaluation.
        assert!(ise(&fit, &truth, 64, IseMethod::Quadrature).unwrap() >= 0.0);
    }

    #[test]
    fn spectral_route_refuses_uncertifiable_truth_tails() {
        // α = 0.3 coefficients decay like exp(−2t^0.3): far too slowly for
        // the neglected tail to pass the accuracy gate at any usable depth.
        let heavy = CircularDist::wrapped_stable(0.0, 1.0, 0.3, 0.0).unwrap();
        let truth = ScenarioSpec::new("heavy", vec![(1.0, heavy)]).unwrap();
        let fit = fit_flat_top(&[0.2, 1.2, 4.0], 2.0, 1);
        let err = ise(&fit, &truth, 1024, IseMethod::Parseval).unwrap_err();
        assert!(matches!(err, Error::TailBoundExceeded { .. }));
    }

    #[test]
    fn spec_strings_parse_into_configs() {
        let cases = [
            ("wsinc:er", KernelFamily::Wsinc, ParamRule::Er),
            ("wsinc:lscv", KernelFamily::Wsinc, ParamRule::Lscv),
            ("wsinc:nu=4", KernelFamily::Wsinc, ParamRule::Fixed(4.0)),
            ("wtrap:er", KernelFamily::Wtrap { c: 2 }, ParamRule::Er),
            ("wtrap:lscv:3", KernelFamily::Wtrap { c: 3 }, ParamRule::Lscv),
            (
                "wtrap:nu=2.5:2",
                KernelFamily::Wtrap { c: 2 },
                ParamRule::Fixed(2.5),
            ),
            ("vonmises:lscv", KernelFamily::VonMises, ParamRule::Lscv),
            (
                "vonmises:kappa=8",
                KernelFamily::VonMises,
                ParamRule::Fixed(8.0),
            ),
        ];
        for (spec, family, rule) in cases {
            let parsed = EstimatorConfig::parse(spec).unwrap();
            assert_eq!(parsed.family, family, "{spec}");
            assert_eq!(parsed.rule, rule, "{spec}");
        }
        assert_eq!(
            EstimatorConfig::parse("wtrap:er:4").unwrap().estimator_label(),
            "wtrap:4"
        );
        assert_eq!(EstimatorConfig::parse("wsinc:nu=4").unwrap().selector_label(), "nu=4");
        assert_eq!(
            EstimatorConfig::parse("vonmises:kappa=8").unwrap().selector_label(),
            "kappa=8"
        );
    }

    #[test]
    fn malformed_spec_strings_are_rejected() {
        let bad = [
            "wsinc",
            "er",
            "bogus:er",
            "wsinc:bogus",
            "wsinc:nu=",
            "wsinc:nu=-1",
            "wsinc:kappa=3",
            "vonmises:er",
            "vonmises:nu=2",
            "vonmises:kappa=0",
            "wtrap:er:0",
            "wtrap:er:1.5",
            "wsinc:er:2",
            "wtrap:lscv:2:9",
        ];
        for spec in bad {
            let err = EstimatorConfig::parse(spec).unwrap_err();
            assert!(
                matches!(err, Error::BadEstimatorSpec { .. }),
                "{spec} gave {err:?}"
            );
        }
    }

    #[test]
    fn exponential_rule_tracks_sample_size() {
        let config = EstimatorConfig::new(
            KernelFamily::Wsinc,
            ParamRule::ExpRule {
                tau: -f64::ln(0.8),
                alpha: 1.0,
            },
        )
        .unwrap();
        let truth = scenario("M5").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sample = truth.sample(&mut rng, 1600).unwrap();
        let (_, nu, _) = config.fit(&sample).unwrap();
        assert_eq!(nu, 33.0);
    }

    #[test]
    fn runs_are_deterministic() {
        let config = SimulationConfig::new(
            "M4",
            40,
            10,
            vec![
                EstimatorConfig::parse("wsinc:er").unwrap(),
                EstimatorConfig::parse("wtrap:lscv:2").unwrap(),
            ],
            99,
        );
        let first = run_scenario(&config).unwrap();
        let second = run_scenario(&config).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn report_statistics_are_internally_consistent() {
        let config = SimulationConfig::new(
            "M4",
            40,
            12,
            vec![
                EstimatorConfig::parse("wsinc:er").unwrap(),
                EstimatorConfig::parse("wsinc:lscv").unwrap(),
            ],
            5,
        );
        let report = run_scenario(&config).unwrap();
        assert_eq!(report.estimators.len(), 2);
        for summary in &report.estimators {
            assert_eq!(summary.outcomes.len() + summary.failures, 12);
            assert!(summary.outcomes.iter().all(|o| o.ise >= 0.0));
            let mean = summary.outcomes.iter().map(|o| o.ise).sum::<f64>()
                / summary.outcomes.len() as f64;
            assert_relative_eq!(summary.mean_ise_e4, mean * 1e4, max_relative = 1e-12);
            let hist_total: usize = summary.selected_histogram.iter().map(|(_, k)| k).sum();
            assert_eq!(hist_total, summary.outcomes.len());
            assert!(summary.boundary_hits <= summary.outcomes.len());
        }
        assert!(report.failures.is_empty());
    }

    #[test]
    fn flat_kernel_on_uniform_scenario_is_exact_every_rep() {
        let config = SimulationConfig::new(
            "M1",
            30,
            5,
            vec![EstimatorConfig::parse("wsinc:nu=0").unwrap()],
            1,
        );
        let report = run_scenario(&config).unwrap();
        let summary = &report.estimators[0];
        assert!(summary.outcomes.iter().all(|o| o.ise == 0.0));
        assert_eq!(summary.mean_ise_e4, 0.0);
        assert_eq!(summary.se_ise_e4, 0.0);
    }

    #[test]
    fn standard_error_shrinks_with_replication() {
        let base = vec![EstimatorConfig::parse("wsinc:nu=1").unwrap()];
        let small = run_scenario(&SimulationConfig::new("M4", 50, 100, base.clone(), 17)).unwrap();
        let large = run_scenario(&SimulationConfig::new("M4", 50, 400, base, 17)).unwrap();
        let ratio = small.estimators[0].se_ise_e4 / large.estimators[0].se_ise_e4;
        // Quadrupling the replication count should halve the standard error.
        assert!((1.6..=2.4).contains(&ratio), "se ratio {ratio}");
    }

    #[test]
    fn parseval_scoring_matches_quadrature_scoring() {
        let estimators = vec![EstimatorConfig::parse("wsinc:er").unwrap()];
        let mut config = SimulationConfig::new("M4", 60, 6, estimators, 23);
        let quad = run_scenario(&config).unwrap();
        config.ise_method = IseMethod::Parseval;
        let spectral = run_scenario(&config).unwrap();
        for (a, b) in quad.estimators[0]
            .outcomes
            .iter()
            .zip(&spectral.estimators[0].outcomes)
        {
            assert_relative_eq!(a.ise, b.ise, max_relative = 1e-9);
            assert_eq!(a.selected_param, b.selected_param);
        }
    }

    #[test]
    fn selector_failures_are_recorded_not_fatal() {
        // A fixed ν needs no pairs, so n = 1 runs; the ER estimator in the
        // same run needs n ≥ 2 and is rejected up front instead.
        let fixed_only = SimulationConfig::new(
            "M4",
            1,
            3,
            vec![EstimatorConfig::parse("wsinc:nu=2").unwrap()],
            3,
        );
        assert_eq!(run_scenario(&fixed_only).unwrap().failures.len(), 0);

        let with_selector = SimulationConfig::new(
            "M4",
            1,
            3,
            vec![EstimatorConfig::parse("wsinc:er").unwrap()],
            3,
        );
        let err = run_scenario(&with_selector).unwrap_err();
        assert!(matches!(err, Error::SampleTooSmall { needed: 2, .. }));
    }

    #[test]
    fn convergence_study_recovers_the_parametric_rate() {
        // Cardioid truth with ν = 1 has zero bias, so the mean ISE is pure
        // variance and decays like 1/n.
        let estimator = EstimatorConfig::parse("wsinc:nu=1").unwrap();
        let report =
            convergence_study("M4", &[50, 100, 200, 400], &estimator, 80, 5).unwrap();
        assert!(!report.degenerate);
        let slope = report.slope.unwrap();
        assert!((-1.25..=-0.75).contains(&slope), "slope {slope}");
        for window in report.points.windows(2) {
            assert!(window[1].mean_ise < window[0].mean_ise);
        }
    }

    #[test]
    fn convergence_study_flags_exact_recovery() {
        let estimator = EstimatorConfig::parse("wsinc:nu=0").unwrap();
        let report = convergence_study("M1", &[50, 100], &estimator, 5, 2).unwrap();
        assert!(report.degenerate);
        assert_eq!(report.slope, None);
        assert!(report.points.iter().all(|p| p.mean_ise == 0.0));
    }

    #[test]
    fn csv_report_round_trips() {
        let config = SimulationConfig::new(
            "M4",
            30,
            6,
            vec![EstimatorConfig::parse("wsinc:er").unwrap()],
            13,
        );
        let report = run_scenario(&config).unwrap();
        let path = temp_path("round-trip.csv");
        emit_report(&report, ReportFormat::Csv, &path).unwrap();

        let mut reader = csv::Reader::from_path(&path).unwrap();
        assert_eq!(
            reader.headers().unwrap(),
            &csv::StringRecord::from(vec![
                "scenario",
                "n",
                "estimator",
                "selector",
                "rep",
                "ise",
                "selected_param",
            ])
        );
        let mut ises = Vec::new();
        for record in reader.records() {
            let record = record.unwrap();
            assert_eq!(&record[0], "M4");
            assert_eq!(&record[1], "30");
            assert_eq!(&record[2], "wsinc");
            assert_eq!(&record[3], "er");
            ises.push(record[5].parse::<f64>().unwrap());
        }
        assert_eq!(ises.len(), 6);
        let mean = ises.iter().sum::<f64>() / ises.len() as f64;
        assert_relative_eq!(
            mean * 1e4,
            report.estimators[0].mean_ise_e4,
            max_relative = 1e-12
        );
        fs::remove_file(&path).ok();
    }

    #[test]
    fn json_report_carries_the_full_record() {
        let config = SimulationConfig::new(
            "M1",
            20,
            3,
            vec![EstimatorConfig::parse("wsinc:nu=0").unwrap()],
            4,
        );
        let report = run_scenario(&config).unwrap();
        let path = temp_path("report.json");
        emit_report(&report, ReportFormat::Json, &path).unwrap();
        let value: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(value["scenario"], "M1");
        assert_eq!(value["n"], 20);
        assert_eq!(value["estimators"][0]["outcomes"].as_array().unwrap().len(), 3);
        fs::remove_file(&path).ok();
    }

    #[test]
    fn empty_estimator_list_yields_header_only_csv() {
        let config = SimulationConfig::new("M1", 20, 3, Vec::new(), 4);
        let report = run_scenario(&config).unwrap();
        let path = temp_path("empty.csv");
        emit_report(&report, ReportFormat::Csv, &path).unwrap();
        let contents = fs::read_to_string(&path).unwrap();
        assert_eq!(contents.lines().count(), 1);
        assert!(contents.starts_with("scenario,n,estimator,selector"));
        fs::remove_file(&path).ok();
    }

    #[test]
    fn bad_run_configurations_are_rejected() {
        let est = vec![EstimatorConfig::parse("wsinc:nu=1").unwrap()];
        assert!(matches!(
            run_scenario(&SimulationConfig::new("M99", 20, 3, est.clone(), 0)).unwrap_err(),
            Error::UnknownScenario(_)
        ));
        assert!(matches!(
            run_scenario(&SimulationConfig::new("M1", 20, 0, est.clone(), 0)).unwrap_err(),
            Error::InvalidParameter(_)
        ));
        let mut tiny_grid = SimulationConfig::new("M1", 20, 3, est, 0);
        tiny_grid.ise_grid = 4;
        assert!(matches!(
            run_scenario(&tiny_grid).unwrap_err(),
            Error::GridTooSmall { .. }
        ));
        assert!(matches!(
            convergence_study("M1", &[], &EstimatorConfig::parse("wsinc:nu=0").unwrap(), 3, 0)
                .unwrap_err(),
            Error::InvalidParameter(_)
        ));
    }

    #[test]
    fn boundary_hits_are_counted() {
        // Near-degenerate data drives the empirical rule to its cap on
        // every replication once the threshold is unreachable; with the
        // default cap that is hard to trigger, so verify histogram/boundary
        // bookkeeping on a mixture scenario where ER picks small cutoffs.
        let config = SimulationConfig::new(
            "M4",
            60,
            8,
            vec![EstimatorConfig::parse("wsinc:er").unwrap()],
            21,
        );
        let report = run_scenario(&config).unwrap();
        let summary = &report.estimators[0];
        let histogram_params: Vec<f64> =
            summary.selected_histogram.iter().map(|(v, _)| *v).collect();
        for outcome in &summary.outcomes {
            assert!(histogram_params.contains(&outcome.selected_param));
        }
        assert_abs_diff_eq!(
            summary.outcomes.iter().filter(|o| o.at_boundary).count() as f64,
            summary.boundary_hits as f64
        );
    }
}
