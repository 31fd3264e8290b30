//! The README's two library snippets, kept compiling: fit a density to a
//! simulated sample with a data-driven cutoff, then evaluate one
//! configuration's exact error decomposition.

use circkde::distributions::scenario;
use circkde::estimator::{Correction, DensityEstimate};
use circkde::kernels::FlatTopKernel;
use circkde::mise::exact_mise;
use circkde::selectors::{er_selector, DEFAULT_ER_CAP, DEFAULT_ER_SCALE, DEFAULT_ER_WINDOW};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> circkde::Result<()> {
    // Draw a sample from a catalog scenario (or bring your own angles).
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let sample = scenario("M4")?.sample(&mut rng, 500)?;

    // Read the cutoff off the data, then fit a wrapped-sinc estimate.
    let picked = er_selector(&sample, DEFAULT_ER_SCALE, DEFAULT_ER_WINDOW, DEFAULT_ER_CAP)?;
    let kernel = FlatTopKernel::new(picked.chosen, 1)?;
    let fit = DensityEstimate::fit(&sample, kernel, Correction::None)?;

    println!("nu = {}", picked.chosen);
    println!("density at pi = {:.4}", fit.eval(std::f64::consts::PI));

    // Exact error analysis works on characteristic-coefficient series
    // instead of samples.
    let spec = circkde::distributions::scenario("M5")?;
    let coeffs = spec.char_seq(spec.suggested_max_index())?;
    let report = exact_mise(&coeffs, &FlatTopKernel::new(5.0, 1)?, 200)?;
    println!("isb={:.3e} iv={:.3e} mise={:.3e}", report.isb, report.iv, report.mise);
    Ok(())
}
