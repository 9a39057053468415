//! End-to-end dilation pipeline: scale supercritical data down to small
//! scales, randomize the unit-cube decomposition on the dilated grid, evolve
//! each sample, and tabulate how the smallness and success fractions respond
//! to the scale parameter.
//!
//! Run with `cargo run --release --example dilated_pipeline`.

use std::f64::consts::PI;

use randnls::evolve::{EvolveParams, Nonlinearity};
use randnls::experiments::{dilation_pipeline, PipelineConfig};
use randnls::grid::Grid;
use randnls::random::{power_law_field, Distribution, RandomizationSpec};
use randnls::window::WindowKind;

fn main() -> randnls::Result<()> {
    // Zero-mean power-law data probed at negative regularity s = -0.25. In
    // d = 2 the homogeneous scaling exponent is (d-2)/2 - s = 1/4 > 0, so
    // dilating to smaller mu shrinks the Ḣ^s size of the deterministic
    // profile — slowly, as mu^(1/4).
    let grid = Grid::new(2, 32, 8.0 * PI)?;
    let phi = power_law_field(grid, 3, 1e-3, 0.6, 0.2, true);
    let spec = RandomizationSpec::new(Distribution::ComplexGaussian, 4242);

    let mut evolve = EvolveParams::new(Nonlinearity::Defocusing, 0.02, 0.4);
    evolve.sample_every = 2;
    let mut cfg = PipelineConfig::new(-0.25, 24, evolve);
    cfg.eta2 = 0.15;
    cfg.epsilon = 0.05;

    let mu_list = [1.0, 0.5, 0.25];
    let (reports, samples) =
        dilation_pipeline(&phi, WindowKind::RaisedCosine, &spec, &mu_list, &cfg)?;

    println!(
        "dilation pipeline: d = 2, s = {}, {} samples per scale\n",
        cfg.s, cfg.n_samples
    );
    println!(
        "{:>6} {:>14} {:>14} {:>10} {:>10} {:>10} {:>8} {:>8} {:>8}",
        "mu",
        "Hs measured",
        "Hs predicted",
        "mean Hs",
        "min Hs",
        "max Hs",
        "small",
        "success",
        "blowup"
    );
    for r in &reports {
        println!(
            "{:>6} {:>14.6e} {:>14.6e} {:>10.4} {:>10.4} {:>10.4} {:>8.3} {:>8.3} {:>8.3}",
            r.mu,
            r.scaling_measured,
            r.scaling_predicted,
            r.mean_hs,
            r.min_hs,
            r.max_hs,
            r.smallness_fraction,
            r.success_fraction,
            r.blowup_fraction,
        );
    }

    // The deterministic dilation obeys the exact homogeneous scaling law, so
    // measured and predicted sizes agree to rounding. The per-sample gates:
    // "small" means the randomized H^s size cleared eta2, "success" means the
    // perturbed evolution finished with conserved mass and settling
    // scattering increments. As mu shrinks, the mu^(1/4) decay pushes more
    // samples under the smallness gate.
    let worst = reports
        .iter()
        .map(|r| ((r.scaling_measured - r.scaling_predicted) / r.scaling_predicted).abs())
        .fold(0.0_f64, f64::max);
    println!("\nworst relative scaling-law error: {worst:.3e}");

    let failures = samples.iter().filter(|s| !s.success).count();
    println!(
        "samples: {} total, {} failures ({} blowup, {} mass drift, {} trend)",
        samples.len(),
        failures,
        samples.iter().filter(|s| s.blowup).count(),
        samples.iter().filter(|s| !s.blowup && !s.mass_ok).count(),
        samples
            .iter()
            .filter(|s| !s.blowup && s.mass_ok && !s.trend_ok)
            .count(),
    );
    println!(
        "(at this amplitude the correction is tiny, so the per-step scattering\n\
         increments are nearly constant and the 5% settle gate is strict;\n\
         trend failures are marginal cases, not instabilities)"
    );
    Ok(())
}
