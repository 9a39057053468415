//! p-variation machinery for step functions: the dynamic program matches the
//! brute-force supremum over partitions, restriction and coarsening only
//! shrink the norm, atomic decompositions give certified upper bounds, and
//! the discrete Y^s norm of a sampled free evolution collapses to a dyadic
//! Sobolev ladder.
//!
//! Run with `cargo run --example pvariation_norms`.

use std::f64::consts::PI;

use num_complex::Complex64;
use randnls::evolve::linear_propagate;
use randnls::grid::Grid;
use randnls::norms::lebesgue_norm;
use randnls::pvar::{discrete_ys_norm, AtomicRep, StepFunction};
use randnls::random::power_law_field;
use randnls::window::{WindowKind, WindowLadder};
use randnls::Trajectory;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn main() -> randnls::Result<()> {
    // The 0 → 1 → 0 square pulse: V² = √2, V¹ = 2.
    let pulse = StepFunction::new(
        vec![0.0, 1.0, 2.0, 3.0],
        vec![re(0.0), re(1.0), re(0.0)],
        false,
    )?;
    println!("square pulse 0→1→0:");
    for p in [1.0, 1.5, 2.0, 3.0] {
        println!(
            "  V^{p} = {:.10}   (brute force {:.10})",
            pulse.vp_norm(p)?,
            pulse.vp_bruteforce(p)?
        );
    }

    // Restriction and coarsening are contractions.
    let window = pulse.restrict(0.5, 2.5)?;
    let coarse = pulse.coarsen(&[0.0, 1.0])?;
    println!(
        "\nV² after restriction to [0.5, 2.5): {:.6}; after coarsening to {{0, 1}}: {:.6}",
        window.vp_norm(2.0)?,
        coarse.vp_norm(2.0)?
    );

    // A function vanishing at +∞ pays for its last value: constant c on
    // [0, ∞) with the vanishing flag has V^p = |c|.
    let tail = StepFunction::new(vec![0.0, f64::INFINITY], vec![re(0.7)], true)?;
    println!(
        "constant 0.7 on [0, ∞), vanishing at ∞: V² = {:.6}",
        tail.vp_norm(2.0)?
    );

    // Atomic upper bound: a two-atom representation certifies the norm.
    let atom1 = StepFunction::new(vec![0.0, 1.5, 3.0], vec![re(1.0), re(0.0)], false)?;
    let atom2 = StepFunction::new(vec![0.0, 1.5, 3.0], vec![re(0.0), re(1.0)], false)?;
    let rep = AtomicRep::new(2.0, vec![re(0.4), re(-0.2)], vec![atom1, atom2])?;
    let evaluated = rep.evaluate()?;
    println!(
        "\ntwo-atom representation: ℓ¹ weight {:.3} ≥ V² of its sum {:.3}",
        rep.weight_l1(),
        evaluated.vp_norm(2.0)?
    );
    let restricted = rep.restrict(0.0, 1.5)?;
    println!(
        "restricted to [0, 1.5): ℓ¹ weight {:.3} (never grows)",
        restricted.weight_l1()
    );

    // Y^s of a sampled free evolution: twisting by S(-t) freezes each dyadic
    // block, so the variation ladder recovers the weighted data norm.
    let grid = Grid::new(2, 32, 8.0 * PI)?;
    let ladder = WindowLadder::new(grid, WindowKind::RaisedCosine);
    let u0 = power_law_field(grid, 9, 1.0, 0.6, 0.2, false);
    let times: Vec<f64> = (0..=12).map(|k| k as f64 * 0.05).collect();
    let fields = times.iter().map(|&t| linear_propagate(&u0, t)).collect();
    let traj = Trajectory { times, fields };
    let s = 0.5;
    let ys = discrete_ys_norm(&traj, &ladder, s)?;
    let mut ladder_sq = 0.0;
    for n in ladder.lp_blocks() {
        let l2 = lebesgue_norm(&ladder.lp_project(&u0, n)?, 2.0)?;
        ladder_sq += (n as f64).powf(2.0 * s) * l2 * l2;
    }
    println!(
        "\nY^{s} of a free evolution: {ys:.10} vs dyadic ladder {:.10}",
        ladder_sq.sqrt()
    );
    Ok(())
}
