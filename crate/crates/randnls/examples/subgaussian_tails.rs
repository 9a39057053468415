//! Monte Carlo tail curves for randomized data: sample a statistic across
//! independent randomizations, build the empirical survival function, and fit
//! log P(X > λ) against λ². Sub-Gaussian concentration shows up as a clean
//! negative slope; the same-seed scaling structure makes the slope quarter
//! exactly when the data doubles.
//!
//! Run with `cargo run --example subgaussian_tails`.

use std::f64::consts::PI;

use num_complex::Complex64;
use randnls::experiments::{tail_experiment, Statistic};
use randnls::field::Field;
use randnls::grid::Grid;
use randnls::random::{Distribution, RandomizationSpec};
use randnls::window::{WindowKind, WindowLadder};

fn main() -> randnls::Result<()> {
    let grid = Grid::new(2, 32, 4.0 * PI)?;
    let ladder = WindowLadder::new(grid, WindowKind::RaisedCosine);
    let phi = Field::gaussian_bump(grid, 1.0, 1.0);
    let spec = RandomizationSpec::new(Distribution::ComplexGaussian, 77);
    let n = 1000;

    let statistic = Statistic::Sobolev { s: 0.75 };
    let (est, _) = tail_experiment(&phi, &ladder, &spec, &statistic, n)?;

    println!("‖φ^ω‖_H^0.75 over {n} Gaussian randomizations:");
    println!("{:>12} {:>12} {:>14}", "λ", "P(X > λ)", "log P / λ²");
    for (lambda, survival) in est.thresholds.iter().zip(&est.survival).step_by(4) {
        let diag = if *survival > 0.0 {
            format!("{:>14.4}", survival.ln() / (lambda * lambda))
        } else {
            format!("{:>14}", "-")
        };
        println!("{lambda:>12.4} {survival:>12.4} {diag}");
    }
    let fit = &est.fit;
    println!(
        "\nfit over survival ∈ [{:.1e}, 0.5]: slope {:.4}, R² = {:.4} ({} points in [{:.3}, {:.3}])",
        10.0 / n as f64,
        fit.slope,
        fit.r_squared,
        fit.n_points,
        fit.fit_window.0,
        fit.fit_window.1
    );

    // Doubling the datum doubles every sample exactly, so the fitted rate
    // drops by exactly 4: c ~ 1/‖φ‖².
    let doubled = phi.scale(Complex64::new(2.0, 0.0));
    let (est2, _) = tail_experiment(&doubled, &ladder, &spec, &statistic, n)?;
    println!(
        "\nsame seed, doubled datum: slope {:.4} (ratio {:.6}, exactly 4)",
        est2.fit.slope,
        fit.slope / est2.fit.slope
    );
    Ok(())
}
