//! Norms of fields and sampled trajectories.
//!
//! Physical-space integrals use the quadrature weight `(L/m)^d`; frequency
//! sums carry the Plancherel factor `L^d`, so `‖u‖_{L²}² = L^d Σ_k |c_k|²`
//! holds exactly for frequency coefficients. Space-time norms integrate the
//! sampled trajectory with the left-endpoint rectangle rule, and `p = ∞` is
//! `f64::INFINITY` throughout.
//!
//! Convention: homogeneous Sobolev norms drop the zero mode for every `s`,
//! and reject fields with nonzero mean when `s < 0` (the weight would be
//! infinite there).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolve::Trajectory;
use crate::field::Field;
use crate::grid::MAX_DIM;
use crate::window::WindowLadder;

/// Exponent/regularity bundle used by configs. `∞` is `f64::INFINITY`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormParams {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
    pub homogeneous: bool,
}

impl Default for NormParams {
    fn default() -> Self {
        NormParams {
            p: 2.0,
            q: 2.0,
            r: 2.0,
            s: 0.0,
            homogeneous: false,
        }
    }
}

fn check_exponent(name: &str, v: f64, min: f64) -> Result<()> {
    if v.is_nan() || v < min {
        return Err(Error::BadNormParameter(format!(
            "{name} must be in [{min}, inf], got {v}"
        )));
    }
    Ok(())
}

/// `L^p` norm by quadrature; `p = ∞` is the max of `|u|` over samples.
pub fn lebesgue_norm(u: &Field, p: f64) -> Result<f64> {
    check_exponent("p", p, 1.0)?;
    let phys = u.to_physical();
    if p.is_infinite() {
        return Ok(phys.data().iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    let w = u.grid().quad_weight();
    let sum: f64 = phys.data().iter().map(|z| z.norm().powf(p)).sum();
    Ok((w * sum).powf(1.0 / p))
}

/// `H^s` (inhomogeneous) or `Ḣ^s` (homogeneous) norm.
pub fn sobolev_norm(u: &Field, s: f64, homogeneous: bool) -> Result<f64> {
    if !s.is_finite() {
        return Err(Error::BadNormParameter(format!(
            "s must be finite, got {s}"
        )));
    }
    let hat = u.to_frequency();
    let grid = u.grid();
    let data = hat.data();
    if homogeneous && s < 0.0 {
        let zero_mode = data[0].norm();
        let scale: f64 = data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if zero_mode > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NonzeroMean);
        }
    }
    let mut acc = 0.0f64;
    for (flat, z) in data.iter().enumerate() {
        let xi2 = grid.freq_norm_sq(flat);
        let weight = if homogeneous {
            if flat == 0 {
                continue;
            }
            xi2.powf(s)
        } else {
            (1.0 + xi2).powf(s)
        };
        acc += weight * z.norm_sqr();
    }
    Ok((grid.volume() * acc).sqrt())
}

/// Modulation norm: `ℓ^q` over the unit-cube lattice of
/// `⟨n⟩^s ‖ψ(D-n)u‖_{L^p}`, truncated at the resolved band.
pub fn modulation_norm(u: &Field, ladder: &WindowLadder, p: f64, q: f64, s: f64) -> Result<f64> {
    check_exponent("p", p, 1.0)?;
    check_exponent("q", q, 1.0)?;
    if u.grid() != ladder.grid() {
        return Err(Error::GridMismatch);
    }
    let lat = ladder.lattice(1.0)?;
    let hat = u.to_frequency();
    let d = u.grid().d();
    let mut acc: f64 = 0.0;
    let mut worst: f64 = 0.0;
    let mut n = [0i64; MAX_DIM];
    for idx in 0..lat.len() {
        lat.point_of(idx, &mut n[..d]);
        let piece = ladder.wiener_project(&hat, &n[..d], 1.0)?;
        let piece_norm = lebesgue_norm(&piece, p)?;
        let n2: f64 = n[..d].iter().map(|&c| (c * c) as f64).sum();
        let weighted = (1.0 + n2).powf(s / 2.0) * piece_norm;
        if q.is_infinite() {
            worst = worst.max(weighted);
        } else {
            acc += weighted.powf(q);
        }
    }
    Ok(if q.is_infinite() {
        worst
    } else {
        acc.powf(1.0 / q)
    })
}

/// Besov norm on the dyadic ladder: `ℓ^q` over blocks of `N^s ‖P_N u‖_{L^p}`.
pub fn besov_norm(u: &Field, ladder: &WindowLadder, p: f64, q: f64, s: f64) -> Result<f64> {
    check_exponent("p", p, 1.0)?;
    check_exponent("q", q, 1.0)?;
    let hat = u.to_frequency();
    let mut acc: f64 = 0.0;
    let mut worst: f64 = 0.0;
    for block in ladder.lp_blocks() {
        let piece = ladder.lp_project(&hat, block)?;
        let weighted = (block as f64).powf(s) * lebesgue_norm(&piece, p)?;
        if q.is_infinite() {
            worst = worst.max(weighted);
        } else {
            acc += weighted.powf(q);
        }
    }
    Ok(if q.is_infinite() {
        worst
    } else {
        acc.powf(1.0 / q)
    })
}

/// `L^q_t L^r_x` of a sampled trajectory by the left-endpoint rectangle
/// rule; `q = ∞` takes the max over all samples.
pub fn spacetime_norm(traj: &Trajectory, q: f64, r: f64) -> Result<f64> {
    check_exponent("q", q, 1.0)?;
    check_exponent("r", r, 1.0)?;
    if traj.fields.is_empty() {
        return Err(Error::EmptyInput("trajectory has no samples"));
    }
    if q.is_infinite() {
        let mut worst = 0.0f64;
        for f in &traj.fields {
            worst = worst.max(lebesgue_norm(f, r)?);
        }
        return Ok(worst);
    }
    if traj.fields.len() < 2 {
        return Err(Error::EmptyInput(
            "finite-q space-time norm needs at least two samples",
        ));
    }
    let mut acc = 0.0f64;
    for k in 0..traj.fields.len() - 1 {
        let dt = traj.times[k + 1] - traj.times[k];
        acc += dt * lebesgue_norm(&traj.fields[k], r)?.powf(q);
    }
    Ok(acc.powf(1.0 / q))
}

/// Dyadically weighted fourth-power norm
/// `(Σ_N N^{d-2} ‖P_N u‖⁴_{L⁴_{t,x}})^{1/4}`.
pub fn z_norm(traj: &Trajectory, ladder: &WindowLadder) -> Result<f64> {
    if traj.fields.is_empty() {
        return Err(Error::EmptyInput("trajectory has no samples"));
    }
    let d = traj.fields[0].grid().d() as i32;
    let mut acc = 0.0f64;
    for block in ladder.lp_blocks() {
        let projected = Trajectory {
            times: traj.times.clone(),
            fields: traj
                .fields
                .iter()
                .map(|f| ladder.lp_project(f, block))
                .collect::<Result<Vec<_>>>()?,
        };
        let st = spacetime_norm(&projected, 4.0, 4.0)?;
        acc += (block as f64).powi(d - 2) * st.powi(4);
    }
    Ok(acc.powf(0.25))
}

/// The space-time exponents entering the smoothed max-norm along with the
/// dimension: `4`, `d+2`, and `6(d+2)/(d+4)`.
pub fn ws_exponents(d: usize) -> [f64; 3] {
    let df = d as f64;
    [4.0, df + 2.0, 6.0 * (df + 2.0) / (df + 4.0)]
}

/// Max over the three exponents of `‖⟨∇⟩^s u‖_{L^ρ_{t,x}}`.
pub fn ws_norm(traj: &Trajectory, s: f64) -> Result<f64> {
    if traj.fields.is_empty() {
        return Err(Error::EmptyInput("trajectory has no samples"));
    }
    let grid = traj.fields[0].grid();
    let smoothed = Trajectory {
        times: traj.times.clone(),
        fields: traj
            .fields
            .iter()
            .map(|f| {
                let mut hat = f.to_frequency();
                let data = hat.data_mut();
                for (flat, z) in data.iter_mut().enumerate() {
                    *z *= Complex64::new((1.0 + grid.freq_norm_sq(flat)).powf(s / 2.0), 0.0);
                }
                hat.into_physical()
            })
            .collect(),
    };
    let mut worst = 0.0f64;
    for rho in ws_exponents(grid.d()) {
        worst = worst.max(spacetime_norm(&smoothed, rho, rho)?);
    }
    Ok(worst)
}

/// Schrödinger admissibility: `2/q + d/r = d/2` with `2 ≤ q, r ≤ ∞`,
/// excluding the forbidden endpoint `(q, r, d) = (2, ∞, 2)`.
pub fn is_admissible(q: f64, r: f64, d: usize) -> bool {
    if q.is_nan() || r.is_nan() || q < 2.0 || r < 2.0 {
        return false;
    }
    if d == 2 && q == 2.0 && r.is_infinite() {
        return false;
    }
    let lhs = 2.0 / q + d as f64 / r;
    (lhs - d as f64 / 2.0).abs() <= 1e-12
}

/// The diagonal admissible exponent `q = r = 2(d+2)/d`.
pub fn diagonal_admissible(d: usize) -> f64 {
    2.0 * (d as f64 + 2.0) / d as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalIndices {
    /// Scaling-critical regularity `(d-2)/2`.
    pub s_crit: f64,
    /// Probabilistic threshold `(d-1)/(d+1)·s_crit`.
    pub s_d: f64,
}

pub fn critical_indices(d: usize) -> CriticalIndices {
    let df = d as f64;
    let s_crit = (df - 2.0) / 2.0;
    CriticalIndices {
        s_crit,
        s_d: (df - 1.0) / (df + 1.0) * s_crit,
    }
}

/// `Σ_n ‖ψ(D-n)u‖²_{H^s}` over the resolved unit lattice, evaluated
/// frequency-by-frequency (the lattice sum is separable per axis).
pub fn windowed_sobolev_sum(u: &Field, ladder: &WindowLadder, s: f64) -> Result<f64> {
    if u.grid() != ladder.grid() {
        return Err(Error::GridMismatch);
    }
    let lat = ladder.lattice(1.0)?;
    let hat = u.to_frequency();
    let grid = u.grid();
    let h = grid.freq_spacing();
    let d = grid.d();
    let data = hat.data();
    let mut acc = 0.0f64;
    let mut cands = [(0i64, 0.0f64); 2];
    grid.for_each_mode(|flat, modes| {
        let mut sq_cover = 1.0;
        for &m in &modes[..d] {
            let count = ladder.axis_candidates(h * m as f64, 1.0, &lat, &mut cands);
            sq_cover *= cands[..count].iter().map(|&(_, v)| v * v).sum::<f64>();
        }
        let xi2 = grid.freq_norm_sq(flat);
        acc += (1.0 + xi2).powf(s) * data[flat].norm_sqr() * sq_cover;
    });
    Ok(grid.volume() * acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::linear_propagate;
    use crate::grid::Grid;
    use crate::window::WindowKind;
    use std::f64::consts::PI;

    fn grid2() -> Grid {
        Grid::new(2, 32, 4.0 * PI).unwrap()
    }

    fn wave(grid: Grid, modes: &[i64], a: f64) -> Field {
        Field::plane_wave(grid, modes, Complex64::new(a, 0.0)).unwrap()
    }

    #[test]
    fn lebesgue_of_plane_wave() {
        let g = grid2();
        let u = wave(g, &[1, -3], 1.5);
        let v = g.volume();
        for p in [1.0, 2.0, 4.0] {
            let got = lebesgue_norm(&u, p).unwrap();
            let want = 1.5 * v.powf(1.0 / p);
            assert!((got - want).abs() < 1e-10 * want, "p={p}: {got} vs {want}");
        }
        let sup = lebesgue_norm(&u, f64::INFINITY).unwrap();
        assert!((sup - 1.5).abs() < 1e-12);
        assert!(lebesgue_norm(&u, 0.5).is_err());
    }

    #[test]
    fn sobolev_of_plane_wave() {
        let g = grid2();
        let u = wave(g, &[2, 0], 1.0); // ξ = (1, 0), |ξ| = 1
        let v = g.volume().sqrt();
        let h1 = sobolev_norm(&u, 1.0, false).unwrap();
        assert!((h1 - 2.0f64.sqrt() * v).abs() < 1e-12 * v);
        let hdot = sobolev_norm(&u, 0.5, true).unwrap();
        assert!((hdot - v).abs() < 1e-12 * v);
    }

    #[test]
    fn sobolev_zero_matches_lebesgue_two() {
        let g = grid2();
        let u = Field::gaussian_bump(g, 0.9, 1.1);
        let a = sobolev_norm(&u, 0.0, false).unwrap();
        let b = lebesgue_norm(&u, 2.0).unwrap();
        assert!((a - b).abs() < 1e-12 * b);
    }

    #[test]
    fn homogeneous_negative_s_rejects_mean() {
        let g = grid2();
        let bump = Field::gaussian_bump(g, 1.0, 1.0);
        assert!(matches!(
            sobolev_norm(&bump, -0.5, true),
            Err(Error::NonzeroMean)
        ));
        let meanless = wave(g, &[1, 0], 1.0);
        assert!(sobolev_norm(&meanless, -0.5, true).is_ok());
    }

    #[test]
    fn modulation_picks_single_cube_for_lattice_wave() {
        // ξ = (1, 0) sits exactly on lattice point n = (1, 0): ψ(0) = 1 and
        // every other resolved cube vanishes there.
        let g = Grid::new(2, 32, 2.0 * PI).unwrap(); // spacing 1
        let lad = WindowLadder::new(g, WindowKind::RaisedCosine);
        let u = wave(g, &[1, 0], 1.0);
        let m = modulation_norm(&u, &lad, 2.0, 2.0, 0.75).unwrap();
        let want = 2.0f64.powf(0.75 / 2.0) * lebesgue_norm(&u, 2.0).unwrap();
        assert!((m - want).abs() < 1e-10 * want, "{m} vs {want}");
    }

    #[test]
    fn modulation_l2_between_halved_and_full_mass() {
        let g = grid2();
        let lad = WindowLadder::new(g, WindowKind::RaisedCosine);
        let u = Field::gaussian_bump(g, 1.0, 0.9);
        let m = modulation_norm(&u, &lad, 2.0, 2.0, 0.0).unwrap();
        let l2 = lebesgue_norm(&u, 2.0).unwrap();
        let denom = m / l2;
        let lo = 2.0f64.powf(-(g.d() as f64) / 2.0);
        assert!(
            denom >= lo - 1e-9 && denom <= 1.0 + 1e-9,
            "M/L² ratio {denom} outside [{lo}, 1]"
        );
    }

    #[test]
    fn besov_single_block() {
        let g = Grid::new(2, 64, 2.0 * PI).unwrap(); // Nyq 32, blocks to 32
        let lad = WindowLadder::new(g, WindowKind::RaisedCosine);
        let u = wave(g, &[4, 0], 1.0); // |ξ| = 4 → only block 4
        let b = besov_norm(&u, &lad, 2.0, 2.0, 0.5).unwrap();
        let want = 4.0f64.powf(0.5) * lebesgue_norm(&u, 2.0).unwrap();
        assert!((b - want).abs() < 1e-10 * want);
    }

    #[test]
    fn besov_l2_ratio_window() {
        let g = grid2();
        let lad = WindowLadder::new(g, WindowKind::RaisedCosine);
        let mut worst_lo = f64::INFINITY;
        let mut worst_hi = 0.0f64;
        for seed in 0..20u64 {
            let u = crate::random::test_support::random_field(g, seed);
            let b = besov_norm(&u, &lad, 2.0, 2.0, 0.0).unwrap();
            let l2 = lebesgue_norm(&u, 2.0).unwrap();
            let ratio = b / l2;
            worst_lo = worst_lo.min(ratio);
            worst_hi = worst_hi.max(ratio);
        }
        let lo = 0.5f64.sqrt();
        assert!(
            worst_lo >= lo - 1e-9 && worst_hi <= 2.0f64.sqrt() + 1e-9,
            "Besov/L² ratios [{worst_lo}, {worst_hi}] escape [{lo}, √2]"
        );
    }

    #[test]
    fn spacetime_of_frozen_wave() {
        let g = grid2();
        let u = wave(g, &[1, 1], 2.0);
        let times: Vec<f64> = (0..9).map(|k| k as f64 * 0.125).collect();
        let traj = Trajectory {
            fields: times.iter().map(|&t| linear_propagate(&u, t)).collect(),
            times,
        };
        // Free evolution keeps |u| ≡ 2, so L^q L^r is T^{1/q}·2·V^{1/r}.
        let got = spacetime_norm(&traj, 4.0, 6.0).unwrap();
        let want = 1.0f64.powf(0.25) * 2.0 * g.volume().powf(1.0 / 6.0);
        assert!((got - want).abs() < 1e-10 * want, "{got} vs {want}");
        let sup = spacetime_norm(&traj, f64::INFINITY, f64::INFINITY).unwrap();
        assert!((sup - 2.0).abs() < 1e-10);
    }

    #[test]
    fn z_and_ws_norms_of_constant_wave() {
        let g = grid2();
        let lad = WindowLadder::new(g, WindowKind::RaisedCosine);
        let u = wave(g, &[2, 0], 1.0); // |ξ| = 1
        let times: Vec<f64> = (0..5).map(|k| k as f64 * 0.25).collect();
        let traj = Trajectory {
            fields: times.iter().map(|_| u.clone()).collect(),
            times,
        };
        // Single block N = 1, weight 1^{d-2} = 1.
        let z = z_norm(&traj, &lad).unwrap();
        let l4 = spacetime_norm(&traj, 4.0, 4.0).unwrap();
        assert!((z - l4).abs() < 1e-10 * l4);

        let s = 0.5;
        let w = ws_norm(&traj, s).unwrap();
        let smooth = 2.0f64.powf(s / 2.0);
        let mut want = 0.0f64;
        for rho in ws_exponents(g.d()) {
            want = want.max(smooth * g.volume().powf(1.0 / rho));
        }
        assert!((w - want).abs() < 1e-10 * want, "{w} vs {want}");
    }

    #[test]
    fn admissibility_table() {
        for d in 1..=4usize {
            let q = diagonal_admissible(d);
            assert!(is_admissible(q, q, d), "diagonal pair fails at d={d}");
            if d >= 2 {
                let r = 2.0 * d as f64 / (d as f64 - 1.0);
                assert!(is_admissible(4.0, r, d), "(4, 2d/(d-1)) fails at d={d}");
            }
            assert!(is_admissible(f64::INFINITY, 2.0, d));
        }
        assert!(!is_admissible(2.0, f64::INFINITY, 2));
        assert!(is_admissible(2.0, f64::INFINITY, 1) == (2.0 / 2.0 + 0.0 == 0.5));
        assert!(!is_admissible(3.0, 3.0, 3));
        assert!(!is_admissible(1.5, f64::INFINITY, 2));
    }

    #[test]
    fn critical_index_table() {
        let c3 = critical_indices(3);
        assert!((c3.s_crit - 0.5).abs() < 1e-15 && (c3.s_d - 0.25).abs() < 1e-15);
        let c4 = critical_indices(4);
        assert!((c4.s_crit - 1.0).abs() < 1e-15 && (c4.s_d - 0.6).abs() < 1e-15);
        let c5 = critical_indices(5);
        assert!((c5.s_crit - 1.5).abs() < 1e-15 && (c5.s_d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn windowed_sum_matches_direct_projection_sum() {
        let g = grid2();
        let lad = WindowLadder::new(g, WindowKind::RaisedCosine);
        let u = Field::gaussian_bump(g, 1.0, 1.0).into_frequency();
        let s = 0.25;
        let fast = windowed_sobolev_sum(&u, &lad, s).unwrap();
        let lat = lad.lattice(1.0).unwrap();
        let mut slow = 0.0;
        let mut n = [0i64; MAX_DIM];
        for idx in 0..lat.len() {
            lat.point_of(idx, &mut n[..2]);
            let piece = lad.wiener_project(&u, &n[..2], 1.0).unwrap();
            slow += sobolev_norm(&piece, s, false).unwrap().powi(2);
        }
        assert!(
            (fast - slow).abs() < 1e-10 * slow.max(1.0),
            "{fast} vs {slow}"
        );
    }
}
