//! Acceptance suite: every shipped guarantee checked end to end, one
//! pass/fail line per criterion.
//!
//! Runs sequentially (several criteria assert wall-clock budgets), so the
//! target opts out of the default test harness. Usage:
//!
//! ```text
//! cargo test --test acceptance            # all criteria
//! cargo test --test acceptance tails      # criteria whose name contains "tails"
//! ```

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use randnls::evolve::{
    conserved_quantities, evolve_nls, evolve_perturbed, linear_propagate, scale_field,
    EvolveParams, Nonlinearity,
};
use randnls::experiments::{dilation_pipeline, tail_experiment, PipelineConfig, Statistic};
use randnls::field::Field;
use randnls::grid::Grid;
use randnls::harness::{self, Command, RunOptions};
use randnls::norms::{
    critical_indices, diagonal_admissible, is_admissible, lebesgue_norm, sobolev_norm,
    windowed_sobolev_sum,
};
use randnls::pvar::{discrete_ys_norm, AtomicRep, StepFunction};
use randnls::random::{power_law_field, Distribution, RandomizationSpec};
use randnls::window::{WindowKind, WindowLadder};
use randnls::Trajectory;

type Criterion = fn() -> Result<String, String>;

fn main() {
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();

    let criteria: Vec<(&str, Criterion)> = vec![
        ("partition_of_unity", c01_partition_of_unity),
        ("scaling_law", c02_scaling_law),
        ("randomization_expectation", c03_randomization_expectation),
        ("subgaussian_tails", c04_subgaussian_tails),
        ("linear_propagator", c05_linear_propagator),
        ("conservation", c06_conservation),
        ("strang_order", c07_strang_order),
        ("decomposition_consistency", c08_decomposition_consistency),
        ("vp_oracle", c09_vp_oracle),
        ("atomic_restriction", c10_atomic_restriction),
        ("ys_free_evolution", c11_ys_free_evolution),
        ("admissibility_indices", c12_admissibility_indices),
        ("dilation_pipeline", c13_dilation_pipeline),
        ("determinism", c14_determinism),
    ];
    let total = criteria.len();

    let mut failed = 0usize;
    let mut ran = 0usize;
    for (idx, (name, body)) in criteria.into_iter().enumerate() {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(body));
        let elapsed = start.elapsed().as_secs_f64();
        let label = format!("[{:2}/{total}] {name:<28}", idx + 1);
        match outcome {
            Ok(Ok(detail)) => println!("{label} PASS  {elapsed:7.2}s  {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("{label} FAIL  {elapsed:7.2}s  {why}");
            }
            Err(panic) => {
                failed += 1;
                let why = panic
                    .downcast_ref::<String>()
                    .map(String::as_str)
                    .or_else(|| panic.downcast_ref::<&str>().copied())
                    .unwrap_or("panicked");
                println!("{label} FAIL  {elapsed:7.2}s  panic: {why}");
            }
        }
    }

    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

// -- helpers ----------------------------------------------------------------

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn budget(elapsed: Duration, limit_s: f64, what: &str) -> Result<(), String> {
    let e = elapsed.as_secs_f64();
    ensure(
        e < limit_s,
        format!("{what} took {e:.2}s, budget {limit_s}s"),
    )
}

/// Standalone SplitMix64 for generating test corpora.
struct TestRng(u64);

impl TestRng {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    fn f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.f64()
    }

    fn usize_in(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() as usize) % (hi - lo + 1)
    }

    fn complex(&mut self) -> Complex64 {
        Complex64::new(self.range(-1.0, 1.0), self.range(-1.0, 1.0))
    }

    fn bool(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }
}

/// Random step function with at most `max_knots` knots; roughly half the
/// instances live on an unbounded domain.
fn random_step(rng: &mut TestRng, max_knots: usize) -> StepFunction<Complex64> {
    let n_knots = rng.usize_in(2, max_knots);
    let mut knots = Vec::with_capacity(n_knots);
    let mut t = rng.range(-2.0, 2.0);
    knots.push(t);
    for _ in 1..n_knots {
        t += rng.range(0.1, 2.0);
        knots.push(t);
    }
    let unbounded = rng.bool();
    if unbounded {
        *knots.last_mut().unwrap() = f64::INFINITY;
    }
    let values: Vec<Complex64> = (0..n_knots - 1).map(|_| rng.complex()).collect();
    let vanishes = unbounded && rng.bool();
    StepFunction::new(knots, values, vanishes).expect("generated step function is valid")
}

// -- criteria ---------------------------------------------------------------

/// Window weights over the shifted lattice sum to 1 at every grid frequency,
/// for dilations 1, 1/2, 1/4, within 1e-12, in under a second per grid.
fn c01_partition_of_unity() -> Result<String, String> {
    let grids = [
        Grid::new(2, 64, 8.0 * PI).unwrap(),
        Grid::new(3, 32, 8.0 * PI).unwrap(),
    ];
    let mut worst = 0.0f64;
    for grid in grids {
        let start = Instant::now();
        for kind in [WindowKind::RaisedCosine, WindowKind::Smoothstep] {
            let ladder = WindowLadder::new(grid, kind);
            for mu in [1.0, 0.5, 0.25] {
                let dev = ladder
                    .partition_deviation(mu)
                    .map_err(|e| format!("partition_deviation: {e}"))?;
                ensure(
                    dev <= 1e-12,
                    format!("deviation {dev:.3e} at d={} mu={mu} {kind:?}", grid.d()),
                )?;
                worst = worst.max(dev);
            }
        }
        budget(start.elapsed(), 1.0, &format!("d={} grid", grid.d()))?;
    }
    Ok(format!(
        "max deviation {worst:.2e} over 2 grids x 2 windows x 3 dilations"
    ))
}

/// Dyadic rescaling changes homogeneous Sobolev norms by exactly
/// mu^((d-2)/2 - s), to 1e-10 relative, in d = 3.
fn c02_scaling_law() -> Result<String, String> {
    let d = 3usize;
    let grid = Grid::new(d, 32, 8.0 * PI).unwrap();
    let phi = power_law_field(grid, 11, 1.0, 0.9, 0.25, false);
    let s_crit = critical_indices(d).s_crit;
    let mut worst = 0.0f64;
    for mu in [0.5, 0.25] {
        let scaled = scale_field(&phi, mu).map_err(|e| format!("scale_field: {e}"))?;
        for s in [0.0, 0.5, s_crit] {
            let base = sobolev_norm(&phi, s, true).map_err(|e| e.to_string())?;
            let got = sobolev_norm(&scaled, s, true).map_err(|e| e.to_string())?;
            let predicted = mu.powf((d as f64 - 2.0) / 2.0 - s) * base;
            let rel = (got - predicted).abs() / predicted;
            ensure(
                rel <= 1e-10,
                format!("mu={mu} s={s}: relative error {rel:.3e}"),
            )?;
            worst = worst.max(rel);
        }
    }
    Ok(format!(
        "max relative error {worst:.2e} (mu in {{1/2, 1/4}}, s in {{0, 1/2, s_crit}})"
    ))
}

/// Monte Carlo mean of ||phi^omega||²_{H^s} matches the windowed Sobolev sum
/// within 5% at 2000 samples on a 64² grid, in under two minutes.
fn c03_randomization_expectation() -> Result<String, String> {
    let start = Instant::now();
    let grid = Grid::new(2, 64, 4.0 * PI).unwrap();
    let phi = power_law_field(grid, 7, 1.0, 0.75, 0.25, false);
    let ladder = WindowLadder::new(grid, WindowKind::RaisedCosine);
    let spec = RandomizationSpec::new(Distribution::ComplexGaussian, 2026);
    let s = 0.75;

    let statistic = Statistic::Sobolev { s };
    let (_, samples) = tail_experiment(&phi, &ladder, &spec, &statistic, 2000)
        .map_err(|e| format!("tail_experiment: {e}"))?;
    let mc = samples.iter().map(|x| x * x).sum::<f64>() / samples.len() as f64;
    let expected = windowed_sobolev_sum(&phi, &ladder, s).map_err(|e| e.to_string())?;
    let rel = (mc - expected).abs() / expected;
    ensure(
        rel <= 0.05,
        format!(
            "MC mean {mc:.6e} vs windowed sum {expected:.6e}: off by {:.1}%",
            100.0 * rel
        ),
    )?;
    budget(start.elapsed(), 120.0, "expectation identity")?;
    Ok(format!(
        "MC/exact = {:.4} at 2000 samples, 64² grid",
        mc / expected
    ))
}

/// Tail curves of randomized statistics are sub-Gaussian: negative slope with
/// R² >= 0.9 for both the Sobolev-size and space-time statistics, and the
/// space-time slope scales like T^(-2/q) between horizons T and 2T (ratio
/// within 30% of 2^(2/q)).
fn c04_subgaussian_tails() -> Result<String, String> {
    let start = Instant::now();
    let grid = Grid::new(2, 32, 4.0 * PI).unwrap();
    let phi = power_law_field(grid, 5, 1.0, 0.75, 0.25, false);
    let ladder = WindowLadder::new(grid, WindowKind::RaisedCosine);
    let spec = RandomizationSpec::new(Distribution::ComplexGaussian, 77);
    let n = 800usize;

    // H^s size statistic.
    let (est_h, _) = tail_experiment(&phi, &ladder, &spec, &Statistic::Sobolev { s: 0.75 }, n)
        .map_err(|e| e.to_string())?;
    ensure(est_h.fit.valid, "H^s fit invalid")?;
    ensure(
        est_h.fit.slope < 0.0 && est_h.fit.r_squared >= 0.9,
        format!(
            "H^s fit slope {:.3} r² {:.3}",
            est_h.fit.slope, est_h.fit.r_squared
        ),
    )?;

    // Space-time statistic at horizons T and 2T on the diagonal admissible
    // pair; the sub-Gaussian rate scales like T^(-2/q).
    let q = diagonal_admissible(2); // q = r = 4 in d = 2
    let t_short = 0.5;
    let fits: Vec<_> = [(t_short, 16usize), (2.0 * t_short, 32usize)]
        .into_iter()
        .map(|(t_end, n_times)| {
            let stat = Statistic::Spacetime {
                q,
                r: q,
                t_end,
                n_times,
            };
            tail_experiment(&phi, &ladder, &spec, &stat, n).map(|(est, _)| est.fit)
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    for (i, fit) in fits.iter().enumerate() {
        ensure(
            fit.valid && fit.slope < 0.0 && fit.r_squared >= 0.9,
            format!(
                "space-time fit at horizon {}: slope {:.3} r² {:.3}",
                i + 1,
                fit.slope,
                fit.r_squared
            ),
        )?;
    }
    let ratio = fits[0].slope / fits[1].slope;
    let predicted = 2f64.powf(2.0 / q);
    let rel = (ratio - predicted).abs() / predicted;
    ensure(
        rel <= 0.30,
        format!(
            "slope ratio {ratio:.3} vs 2^(2/q) = {predicted:.3} ({:.0}% off)",
            100.0 * rel
        ),
    )?;
    budget(start.elapsed(), 600.0, "tail experiments")?;
    Ok(format!(
        "H^s r²={:.3}; slope ratio {ratio:.3} vs {predicted:.3} ({:.0}% off) at {n} samples",
        est_h.fit.r_squared,
        100.0 * rel
    ))
}

/// The free propagator is unitary on every Sobolev scale and satisfies the
/// group law, both to 1e-12.
fn c05_linear_propagator() -> Result<String, String> {
    let grid = Grid::new(2, 32, 4.0 * PI).unwrap();
    let u = power_law_field(grid, 13, 1.0, 0.75, 0.25, false);
    let mut worst = 0.0f64;
    for s in [0.0, 0.75, 2.0] {
        let before = sobolev_norm(&u, s, false).map_err(|e| e.to_string())?;
        for t in [0.1, 1.0, 17.3] {
            let after =
                sobolev_norm(&linear_propagate(&u, t), s, false).map_err(|e| e.to_string())?;
            let rel = (after - before).abs() / before;
            ensure(rel <= 1e-12, format!("unitarity s={s} t={t}: {rel:.3e}"))?;
            worst = worst.max(rel);
        }
    }
    // Group law and inverse.
    let composed = linear_propagate(&linear_propagate(&u, 0.4), 0.3);
    let direct = linear_propagate(&u, 0.7);
    let diff = composed.sub(&direct).map_err(|e| e.to_string())?;
    let rel_group = lebesgue_norm(&diff, 2.0).map_err(|e| e.to_string())?
        / lebesgue_norm(&direct, 2.0).map_err(|e| e.to_string())?;
    ensure(rel_group <= 1e-12, format!("group law: {rel_group:.3e}"))?;
    let round = linear_propagate(&linear_propagate(&u, 5.0), -5.0);
    let rel_inv = lebesgue_norm(&round.sub(&u).map_err(|e| e.to_string())?, 2.0)
        .map_err(|e| e.to_string())?
        / lebesgue_norm(&u, 2.0).map_err(|e| e.to_string())?;
    ensure(rel_inv <= 1e-12, format!("inverse: {rel_inv:.3e}"))?;
    Ok(format!(
        "unitarity {worst:.2e}, group law {rel_group:.2e}, inverse {rel_inv:.2e}"
    ))
}

/// Mass is conserved to 1e-10 relative over a thousand split steps and the
/// Hamiltonian drift shrinks at second order in dt.
fn c06_conservation() -> Result<String, String> {
    let grid = Grid::new(1, 64, 4.0 * PI).unwrap();
    let u0 = Field::gaussian_bump(grid, 0.8, 1.0);
    let nl = Nonlinearity::Defocusing;

    let params = EvolveParams::new(nl, 1e-3, 1.0); // 1000 steps, every one sampled
    let traj = evolve_nls(&u0, &params).map_err(|e| e.to_string())?;
    let mass0 = conserved_quantities(&traj.fields[0], nl).mass;
    let mut worst_mass = 0.0f64;
    for f in &traj.fields[1..] {
        let drift = (conserved_quantities(f, nl).mass - mass0).abs() / mass0;
        worst_mass = worst_mass.max(drift);
    }
    ensure(
        worst_mass < 1e-10,
        format!("relative mass drift {worst_mass:.3e} over 1000 steps"),
    )?;

    let h_drift = |dt: f64| -> Result<f64, String> {
        let params = EvolveParams::new(nl, dt, 0.5);
        let traj = evolve_nls(&u0, &params).map_err(|e| e.to_string())?;
        let h0 = conserved_quantities(&traj.fields[0], nl).hamiltonian;
        Ok(traj.fields[1..]
            .iter()
            .map(|f| (conserved_quantities(f, nl).hamiltonian - h0).abs())
            .fold(0.0, f64::max))
    };
    let coarse = h_drift(2e-3)?;
    let fine = h_drift(1e-3)?;
    let order = (coarse / fine).log2();
    ensure(
        (1.8..=2.2).contains(&order),
        format!("Hamiltonian drift order {order:.3} (drifts {coarse:.3e} / {fine:.3e})"),
    )?;
    Ok(format!(
        "mass drift {worst_mass:.2e}/1000 steps; H-drift order {order:.2}"
    ))
}

/// Second-order self-convergence for both solvers on smooth data, plus
/// exactness of the split step on the closed-form plane-wave solutions
/// (there the scheme commutes with the flow, so the error sits at rounding
/// level and beats any order bound).
fn c07_strang_order() -> Result<String, String> {
    // Exact plane-wave reference, both signs.
    let grid2 = Grid::new(2, 32, 4.0 * PI).unwrap();
    for nl in [Nonlinearity::Defocusing, Nonlinearity::Focusing] {
        let amp = Complex64::new(1.1, 0.0);
        let modes = [3i64, -1];
        let wave = Field::plane_wave(grid2, &modes, amp).map_err(|e| e.to_string())?;
        let params = EvolveParams::new(nl, 0.01, 1.0);
        let traj = evolve_nls(&wave, &params).map_err(|e| e.to_string())?;
        let xi_sq = {
            let h = grid2.freq_spacing();
            (h * 3.0).powi(2) + h * h
        };
        let phase = -(xi_sq + nl.kappa() * amp.norm_sqr()) * traj.final_time();
        let exact = wave.scale(Complex64::from_polar(1.0, phase));
        let err = lebesgue_norm(
            &traj
                .final_field()
                .unwrap()
                .sub(&exact)
                .map_err(|e| e.to_string())?,
            2.0,
        )
        .map_err(|e| e.to_string())?
            / lebesgue_norm(&exact, 2.0).map_err(|e| e.to_string())?;
        ensure(err <= 1e-12, format!("plane-wave error {err:.3e} ({nl:?})"))?;
    }

    // Richardson self-convergence on a smooth bump.
    let grid = Grid::new(1, 64, 4.0 * PI).unwrap();
    let u0 = Field::gaussian_bump(grid, 0.8, 1.0);
    let endpoint = |dt: f64| -> Result<Field, String> {
        let params = EvolveParams::new(Nonlinearity::Defocusing, dt, 0.4);
        let traj = evolve_nls(&u0, &params).map_err(|e| e.to_string())?;
        Ok(traj.fields.last().unwrap().clone())
    };
    let (u1, u2, u4) = (endpoint(4e-3)?, endpoint(2e-3)?, endpoint(1e-3)?);
    let e1 =
        lebesgue_norm(&u1.sub(&u2).map_err(|e| e.to_string())?, 2.0).map_err(|e| e.to_string())?;
    let e2 =
        lebesgue_norm(&u2.sub(&u4).map_err(|e| e.to_string())?, 2.0).map_err(|e| e.to_string())?;
    let order_full = (e1 / e2).log2();
    ensure(
        (1.8..=2.2).contains(&order_full),
        format!("evolve_nls self-convergence order {order_full:.3}"),
    )?;

    // Same study for the perturbed solver's correction.
    let z0 = u0.scale(Complex64::new(0.7, 0.0));
    let v0 = Field::gaussian_bump(grid, 0.3, 0.7);
    let correction = |dt: f64| -> Result<Field, String> {
        let params = EvolveParams::new(Nonlinearity::Defocusing, dt, 0.4);
        let pt = evolve_perturbed(&z0, &v0, &params).map_err(|e| e.to_string())?;
        Ok(pt.correction.last().unwrap().clone())
    };
    let (v1, v2, v4) = (correction(4e-3)?, correction(2e-3)?, correction(1e-3)?);
    let p1 =
        lebesgue_norm(&v1.sub(&v2).map_err(|e| e.to_string())?, 2.0).map_err(|e| e.to_string())?;
    let p2 =
        lebesgue_norm(&v2.sub(&v4).map_err(|e| e.to_string())?, 2.0).map_err(|e| e.to_string())?;
    let order_pert = (p1 / p2).log2();
    ensure(
        (1.8..=2.2).contains(&order_pert),
        format!("evolve_perturbed self-convergence order {order_pert:.3}"),
    )?;
    Ok(format!(
        "plane waves exact to 1e-12; orders: full {order_full:.2}, perturbed {order_pert:.2}"
    ))
}

/// The perturbed decomposition agrees with the direct solve. Freezing the
/// linear part at step midpoints makes the perturbed scheme algebraically
/// conjugate to the direct one, so at equal dt the two coincide to rounding;
/// the dt-dependent part of the consistency error is therefore measured
/// against a converged reference, where it falls by ~4x per dt halving.
fn c08_decomposition_consistency() -> Result<String, String> {
    let grid = Grid::new(1, 64, 4.0 * PI).unwrap();
    let z0 = Field::gaussian_bump(grid, 0.6, 1.0);
    let v0 = Field::gaussian_bump(grid, 0.25, 0.6);
    let u0 = z0.add(&v0).map_err(|e| e.to_string())?;
    let t_end = 0.4;

    let solve_pair = |dt: f64| -> Result<(Field, Field), String> {
        let params = EvolveParams::new(Nonlinearity::Defocusing, dt, t_end);
        let direct = evolve_nls(&u0, &params).map_err(|e| e.to_string())?;
        let pt = evolve_perturbed(&z0, &v0, &params).map_err(|e| e.to_string())?;
        let combined = pt.combined(pt.times.len() - 1).map_err(|e| e.to_string())?;
        Ok((combined, direct.fields.last().unwrap().clone()))
    };
    let rel_l2 = |a: &Field, b: &Field| -> Result<f64, String> {
        let num =
            lebesgue_norm(&a.sub(b).map_err(|e| e.to_string())?, 2.0).map_err(|e| e.to_string())?;
        let den = lebesgue_norm(b, 2.0).map_err(|e| e.to_string())?;
        Ok(num / den)
    };

    // Equal-dt conjugacy: (z + v) reproduces the direct discrete solution.
    let (combined, direct) = solve_pair(2e-3)?;
    let same_dt = rel_l2(&combined, &direct)?;
    ensure(
        same_dt <= 1e-12,
        format!("equal-dt mismatch {same_dt:.3e} above rounding"),
    )?;

    // Against a converged reference the decomposition error is second order.
    let params_ref = EvolveParams::new(Nonlinearity::Defocusing, 6.25e-5, t_end);
    let reference = evolve_nls(&u0, &params_ref)
        .map_err(|e| e.to_string())?
        .fields
        .last()
        .unwrap()
        .clone();
    let coarse = rel_l2(&solve_pair(2e-3)?.0, &reference)?;
    let fine = rel_l2(&solve_pair(1e-3)?.0, &reference)?;
    let ratio = coarse / fine;
    ensure(
        (3.5..=4.5).contains(&ratio),
        format!("error ratio {ratio:.3} (coarse {coarse:.3e}, fine {fine:.3e})"),
    )?;
    Ok(format!(
        "equal-dt mismatch {same_dt:.1e}; error vs reference {coarse:.2e} -> {fine:.2e}, ratio {ratio:.2}"
    ))
}

/// Dynamic program equals brute force on 1000 random step functions with at
/// most 12 knots, and the structural inequalities hold on the same corpus.
fn c09_vp_oracle() -> Result<String, String> {
    let mut rng = TestRng(0x0acc_e97a_11ce_0001);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let sf = random_step(&mut rng, 12);
        let p = rng.range(1.0, 4.0);
        let dp = sf.vp_norm(p).map_err(|e| e.to_string())?;
        let bf = sf.vp_bruteforce(p).map_err(|e| e.to_string())?;
        let diff = (dp - bf).abs();
        ensure(
            diff <= 1e-12 * bf.max(1.0),
            format!("instance {i}: DP {dp} vs brute force {bf}"),
        )?;
        worst = worst.max(diff / bf.max(1.0));

        // Monotone non-increasing in p.
        let p_hi = p + rng.range(0.1, 2.0);
        let dp_hi = sf.vp_norm(p_hi).map_err(|e| e.to_string())?;
        ensure(
            dp_hi <= dp + 1e-12,
            format!("instance {i}: V^{p_hi:.2} = {dp_hi} > V^{p:.2} = {dp}"),
        )?;

        // Restriction to a sub-window never grows the norm.
        let knots = sf.knots();
        if knots.len() >= 3 {
            let a = knots[0];
            let b = knots[knots.len() - 1];
            let mid = knots[1 + (rng.next_u64() as usize) % (knots.len() - 2)];
            for (lo, hi) in [(a, mid), (mid, b)] {
                let restricted = sf.restrict(lo, hi).map_err(|e| e.to_string())?;
                let sub = restricted.vp_norm(p).map_err(|e| e.to_string())?;
                ensure(
                    sub <= dp + 1e-12,
                    format!("instance {i}: restriction to [{lo},{hi}) grew {dp} -> {sub}"),
                )?;
            }
        }

        // Coarsening (subsampling the knot set) never grows the norm.
        let keep: Vec<f64> = sf.knots()[..sf.knots().len() - 1]
            .iter()
            .enumerate()
            .filter(|&(j, _)| j == 0 || rng.bool())
            .map(|(_, &t)| t)
            .collect();
        let coarse = sf.coarsen(&keep).map_err(|e| e.to_string())?;
        let cv = coarse.vp_norm(p).map_err(|e| e.to_string())?;
        ensure(
            cv <= dp + 1e-12,
            format!("instance {i}: coarsening grew {dp} -> {cv}"),
        )?;
    }
    Ok(format!(
        "1000 instances: DP = brute force (worst rel diff {worst:.1e}); p-, restriction-, coarsening-monotone"
    ))
}

/// Restricting an atomic representation contracts its ℓ¹ weight and the
/// restriction evaluates pointwise to the original function on the window.
fn c10_atomic_restriction() -> Result<String, String> {
    let mut rng = TestRng(0x0acc_e97a_11ce_0002);
    for i in 0..1000 {
        let p = rng.range(1.0, 3.0);
        let n_atoms = rng.usize_in(1, 5);
        // All atoms share the domain [0, 10] so any window intersects them.
        let atoms: Vec<StepFunction<Complex64>> = (0..n_atoms)
            .map(|_| {
                let n_knots = rng.usize_in(2, 8);
                let mut interior: Vec<f64> =
                    (0..n_knots - 2).map(|_| rng.range(0.5, 9.5)).collect();
                interior.sort_by(|a, b| a.partial_cmp(b).unwrap());
                interior.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
                let mut knots = vec![0.0];
                knots.extend(interior);
                knots.push(10.0);
                let raw: Vec<Complex64> = (0..knots.len() - 1).map(|_| rng.complex()).collect();
                let sf = StepFunction::new(knots.clone(), raw.clone(), false).unwrap();
                let mass = sf.value_mass(p).unwrap();
                let values: Vec<Complex64> = raw.iter().map(|v| v / mass).collect();
                StepFunction::new(knots, values, false).unwrap()
            })
            .collect();
        let weights: Vec<Complex64> = (0..n_atoms).map(|_| rng.complex()).collect();
        let rep = AtomicRep::new(p, weights, atoms).map_err(|e| format!("instance {i}: {e}"))?;

        let a = rng.range(0.5, 4.5);
        let b = a + rng.range(0.5, 5.0);
        let restricted = rep
            .restrict(a, b)
            .map_err(|e| format!("instance {i}: {e}"))?;
        ensure(
            restricted.weight_l1() <= rep.weight_l1() + 1e-12,
            format!(
                "instance {i}: weight grew {} -> {}",
                rep.weight_l1(),
                restricted.weight_l1()
            ),
        )?;

        let u = rep.evaluate().map_err(|e| e.to_string())?;
        let u_cut = restricted.evaluate().map_err(|e| e.to_string())?;
        let (lo, hi) = u_cut.domain();
        for k in 0..24 {
            let t = lo + (hi.min(10.0) - lo) * (k as f64 + 0.5) / 24.0;
            let full = u.value_at(t).ok_or("probe outside evaluated domain")?;
            let cut = u_cut.value_at(t).ok_or("probe outside restricted domain")?;
            ensure(
                (full - cut).norm() <= 1e-12,
                format!(
                    "instance {i}: value mismatch {:.3e} at t={t}",
                    (full - cut).norm()
                ),
            )?;
        }
    }
    Ok("1000 representations: ℓ¹ contraction exact; restriction evaluates to u·χ_I".into())
}

/// The discrete Y^s norm of a sampled free evolution collapses to the dyadic
/// Sobolev ladder of the data, to 1e-10.
fn c11_ys_free_evolution() -> Result<String, String> {
    let grid = Grid::new(2, 32, 8.0 * PI).unwrap();
    let ladder = WindowLadder::new(grid, WindowKind::RaisedCosine);
    let u0 = power_law_field(grid, 21, 1.0, 0.6, 0.2, false);
    let times: Vec<f64> = (0..=16).map(|k| k as f64 * 0.05).collect();
    let fields: Vec<Field> = times.iter().map(|&t| linear_propagate(&u0, t)).collect();
    let traj = Trajectory { times, fields };

    let mut details = Vec::new();
    for s in [0.25, 0.75] {
        let ys = discrete_ys_norm(&traj, &ladder, s).map_err(|e| e.to_string())?;
        let mut ladder_sq = 0.0f64;
        for n in ladder.lp_blocks() {
            let piece = ladder.lp_project(&u0, n).map_err(|e| e.to_string())?;
            let l2 = lebesgue_norm(&piece, 2.0).map_err(|e| e.to_string())?;
            ladder_sq += (n as f64).powf(2.0 * s) * l2 * l2;
        }
        let expected = ladder_sq.sqrt();
        let rel = (ys - expected).abs() / expected;
        ensure(
            rel <= 1e-10,
            format!("s={s}: Y^s {ys} vs ladder {expected} ({rel:.3e})"),
        )?;
        details.push(format!("s={s}: {rel:.1e}"));
    }
    Ok(format!(
        "free evolution collapses to the dyadic ladder ({})",
        details.join(", ")
    ))
}

/// Admissibility accepts the standard exponent pairs, rejects the forbidden
/// endpoint, and the critical indices come out exactly.
fn c12_admissibility_indices() -> Result<String, String> {
    for d in [3usize, 4, 5] {
        let qd = diagonal_admissible(d);
        ensure(
            is_admissible(qd, qd, d),
            format!("diagonal pair rejected at d={d}"),
        )?;
        let r = 2.0 * d as f64 / (d as f64 - 1.0);
        ensure(
            is_admissible(4.0, r, d),
            format!("(4, 2d/(d-1)) rejected at d={d}"),
        )?;
        ensure(
            is_admissible(f64::INFINITY, 2.0, d),
            format!("(inf, 2) rejected at d={d}"),
        )?;
    }
    ensure(
        !is_admissible(2.0, f64::INFINITY, 2),
        "forbidden endpoint (2, inf, 2) accepted",
    )?;

    for (d, s_crit, s_d) in [(3usize, 0.5, 0.25), (4, 1.0, 0.6), (5, 1.5, 1.0)] {
        let c = critical_indices(d);
        ensure(
            (c.s_crit - s_crit).abs() <= 1e-12 && (c.s_d - s_d).abs() <= 1e-12,
            format!(
                "critical_indices({d}) = ({}, {}) expected ({s_crit}, {s_d})",
                c.s_crit, c.s_d
            ),
        )?;
    }
    Ok("diagonal, (4, 2d/(d-1)), (inf, 2) pass for d in {3,4,5}; indices (0.5,0.25), (1.0,0.6), (1.5,1.0)".into())
}

/// The dilation pipeline reproduces the deterministic scaling decay exactly
/// and the Monte Carlo success fraction does not degrade as the dilation
/// shrinks (one violation tolerated), at 200 samples on a 64² grid.
fn c13_dilation_pipeline() -> Result<String, String> {
    let start = Instant::now();
    let grid = Grid::new(2, 64, 8.0 * PI).unwrap();
    let phi = power_law_field(grid, 3, 1.0, 0.75, 0.25, true);
    let spec = RandomizationSpec::new(Distribution::ComplexGaussian, 4242);
    let mut evolve = EvolveParams::new(Nonlinearity::Defocusing, 0.02, 0.4);
    evolve.sample_every = 2;
    let cfg = PipelineConfig::new(-0.25, 200, evolve);
    let mu_list = [1.0, 0.5, 0.25];

    let (reports, _samples) =
        dilation_pipeline(&phi, WindowKind::RaisedCosine, &spec, &mu_list, &cfg)
            .map_err(|e| e.to_string())?;

    let mut worst_scaling = 0.0f64;
    for r in &reports {
        let rel = (r.scaling_measured - r.scaling_predicted).abs() / r.scaling_predicted;
        ensure(
            rel <= 1e-10,
            format!(
                "mu={}: measured {} predicted {} ({rel:.3e})",
                r.mu, r.scaling_measured, r.scaling_predicted
            ),
        )?;
        worst_scaling = worst_scaling.max(rel);
    }

    let fractions: Vec<f64> = reports.iter().map(|r| r.success_fraction).collect();
    let violations = fractions.windows(2).filter(|w| w[1] < w[0] - 1e-12).count();
    ensure(
        violations <= 1,
        format!("success fractions {fractions:?} violate monotonicity {violations} times"),
    )?;
    budget(start.elapsed(), 1200.0, "pipeline")?;
    Ok(format!(
        "scaling exact ({worst_scaling:.1e}); success fractions {fractions:?} ({violations} violation(s))"
    ))
}

/// Rerunning an experiment config at worker counts 1 and 4 produces
/// byte-identical result files.
fn c14_determinism() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = serde_json::json!({
        "grid": {"dim": 1, "points": 32, "box_length": 4.0 * PI},
        "data": {"profile": "gaussian_bump", "amplitude": 1.0, "width": 1.0},
        "window_kind": "raised_cosine",
        "randomization": {"dist": "complex_gaussian", "seed": 999},
        "statistic": {"kind": "sobolev", "s": 0.5},
        "n_samples": 200
    });
    let config_path = dir.path().join("tail.json");
    std::fs::write(&config_path, config.to_string()).map_err(|e| e.to_string())?;

    let mut outputs = Vec::new();
    for (label, workers) in [("w1", 1usize), ("w4", 4), ("w4_again", 4)] {
        let out = dir.path().join(label);
        let opts = RunOptions {
            workers: Some(workers),
            seed_override: None,
            quiet: true,
        };
        harness::run(Command::Tail, &config_path, &out, &opts)
            .map_err(|f| format!("workers={workers}: {}", f.message()))?;
        outputs.push(std::fs::read(out.join("results.json")).map_err(|e| e.to_string())?);
    }
    ensure(
        outputs[0] == outputs[1],
        "results differ between 1 and 4 workers",
    )?;
    ensure(
        outputs[1] == outputs[2],
        "results differ between reruns at 4 workers",
    )?;
    Ok(format!(
        "tail run: {} result bytes identical across workers {{1, 4}} and reruns",
        outputs[0].len()
    ))
}
