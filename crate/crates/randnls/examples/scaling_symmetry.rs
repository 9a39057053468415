//! Dyadic rescaling u(x) ↦ μ⁻¹ u(x/μ) maps the box [0,L)^d onto [0,μL)^d and
//! multiplies every homogeneous Sobolev norm by exactly μ^((d-2)/2 - s).
//! Because the companion grid reindexes the same coefficients, the law holds
//! to machine precision, not just to discretization accuracy.
//!
//! Run with `cargo run --example scaling_symmetry`.

use std::f64::consts::PI;

use randnls::evolve::scale_field;
use randnls::grid::Grid;
use randnls::norms::{critical_indices, sobolev_norm};
use randnls::random::power_law_field;

fn main() -> randnls::Result<()> {
    let d = 3usize;
    let grid = Grid::new(d, 32, 8.0 * PI)?;
    let phi = power_law_field(grid, 11, 1.0, 0.9, 0.25, false);
    let indices = critical_indices(d);
    println!(
        "d = {d}: scaling-critical s = {}, probabilistic threshold s_d = {}\n",
        indices.s_crit, indices.s_d
    );

    println!(
        "{:>6} {:>6} {:>14} {:>14} {:>12}",
        "μ", "s", "measured", "predicted", "rel. error"
    );
    for mu in [0.5, 0.25, 2.0] {
        let scaled = scale_field(&phi, mu)?;
        for s in [0.0, indices.s_d, indices.s_crit, 1.0] {
            let base = sobolev_norm(&phi, s, true)?;
            let measured = sobolev_norm(&scaled, s, true)? / base;
            let predicted = mu.powf((d as f64 - 2.0) / 2.0 - s);
            let rel = (measured - predicted).abs() / predicted;
            println!("{mu:>6} {s:>6} {measured:>14.8} {predicted:>14.8} {rel:>12.2e}");
        }
    }

    // At s = s_crit the norm is invariant: the symmetry the equation shares.
    let half = scale_field(&phi, 0.5)?;
    let ratio =
        sobolev_norm(&half, indices.s_crit, true)? / sobolev_norm(&phi, indices.s_crit, true)?;
    println!("\nat s = s_crit the rescaled norm ratio is {ratio:.15} (exactly 1)");

    // Non-dyadic factors are rejected: the companion grid must stay a
    // power-of-two spectral grid.
    match scale_field(&phi, 0.3) {
        Err(e) => println!("μ = 0.3 is rejected: {e}"),
        Ok(_) => unreachable!("non-dyadic scale accepted"),
    }
    Ok(())
}
