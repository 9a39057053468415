//! Unit-cube windows on the frequency lattice: the shifted window weights
//! sum to exactly 1 at every grid frequency, for both window shapes and for
//! dyadically dilated cube sizes, and the projections reassemble the field.
//!
//! Run with `cargo run --example partition_of_unity`.

use std::f64::consts::PI;

use randnls::field::Field;
use randnls::grid::Grid;
use randnls::window::{wiener_reconstruction_error, WindowKind, WindowLadder};

fn main() -> randnls::Result<()> {
    let grid = Grid::new(2, 64, 8.0 * PI)?;
    println!(
        "grid: {}² points on a box of length {:.3} (frequency spacing {:.3})\n",
        grid.points_per_axis(),
        grid.box_length(),
        grid.freq_spacing()
    );

    println!("max |Σ_n ψ((ξ-n)/μ) - 1| over all grid frequencies:");
    println!("{:<16} {:>8} {:>12}", "window", "μ", "deviation");
    for kind in [WindowKind::RaisedCosine, WindowKind::Smoothstep] {
        let ladder = WindowLadder::new(grid, kind);
        for mu in [1.0, 0.5, 0.25] {
            let dev = ladder.partition_deviation(mu)?;
            println!("{kind:<16?} {mu:>8} {dev:>12.3e}");
        }
    }

    // The windowed pieces reassemble the field exactly: Σ_n ψ(D-n)u = u.
    let u = Field::gaussian_bump(grid, 1.0, 1.0);
    println!("\nreassembly error ‖Σ_n ψ(D-n)u - u‖_∞ / ‖u‖_∞:");
    for kind in [WindowKind::RaisedCosine, WindowKind::Smoothstep] {
        let ladder = WindowLadder::new(grid, kind);
        for mu in [1.0, 0.5] {
            let err = wiener_reconstruction_error(&ladder, &u, mu)?;
            println!("{kind:<16?} μ={mu:<6} {err:.3e}");
        }
    }

    // The dyadic frequency-shell decomposition carries the same guarantee.
    let ladder = WindowLadder::new(grid, WindowKind::RaisedCosine);
    println!(
        "\ndyadic shells up to N = {}: max |Σ_N σ_N(ξ) - 1| = {:.3e}",
        ladder.lp_top(),
        ladder.lp_sum_deviation()
    );
    Ok(())
}
