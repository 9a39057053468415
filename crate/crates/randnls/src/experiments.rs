//! Monte Carlo experiments over randomized data: empirical tail curves with
//! sub-Gaussian fits, space-time constant scans, bilinear product-norm scans,
//! and a dilation pipeline that scales data to small size, randomizes on the
//! companion grid, and evolves the perturbed system.
//!
//! Samples are pure functions of `(seed, sample index)` and are aggregated in
//! index order, so every result is byte-identical for any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{
    conserved_quantities, evolve_perturbed, linear_propagate, scale_field, scattering_increments,
    EvolveParams, Trajectory,
};
use crate::field::{Field, Representation};
use crate::grid::Grid;
use crate::norms::{is_admissible, lebesgue_norm, sobolev_norm, spacetime_norm, ws_norm};
use crate::random::{randomize, Distribution, RandomizationSpec};
use crate::window::{WindowKind, WindowLadder};

/// Number of quantile-based thresholds in a tail estimate.
pub const N_THRESHOLDS: usize = 21;

/// Least-squares fit of log survival against λ².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubGaussianFit {
    pub valid: bool,
    /// Slope of `log P(X > λ)` against `λ²`; negative for sub-Gaussian tails.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// λ range actually used by the fit.
    pub fit_window: (f64, f64),
    pub n_points: usize,
}

impl SubGaussianFit {
    fn invalid() -> SubGaussianFit {
        SubGaussianFit {
            valid: false,
            slope: 0.0,
            intercept: 0.0,
            r_squared: 0.0,
            fit_window: (0.0, 0.0),
            n_points: 0,
        }
    }
}

/// Empirical tail of a statistic: thresholds are the empirical quantiles at
/// 21 levels log-spaced in `1 - q` from the median to `q = 0.999`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub thresholds: Vec<f64>,
    pub survival: Vec<f64>,
    pub n_samples: usize,
    pub fit: SubGaussianFit,
}

/// Fraction of samples strictly above `lambda`.
pub fn empirical_survival(samples: &[f64], lambda: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().filter(|&&x| x > lambda).count() as f64 / samples.len() as f64
}

/// Builds the empirical tail curve of raw statistic samples and fits it.
pub fn estimate_tail(samples: &[f64]) -> Result<TailEstimate> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("no statistic samples"));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::BadNormParameter(
            "statistic samples must be finite".into(),
        ));
    }
    let n = samples.len();
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let lo = 0.5f64.log10();
    let hi = 0.001f64.log10();
    let mut thresholds = Vec::with_capacity(N_THRESHOLDS);
    let mut survival = Vec::with_capacity(N_THRESHOLDS);
    for i in 0..N_THRESHOLDS {
        let t = i as f64 / (N_THRESHOLDS - 1) as f64;
        let q = 1.0 - 10f64.powf(lo + t * (hi - lo));
        let idx = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
        let lambda = sorted[idx];
        thresholds.push(lambda);
        // Strictly-above count via the sorted order.
        let above = sorted.partition_point(|&x| x <= lambda);
        survival.push((n - above) as f64 / n as f64);
    }
    let mut est = TailEstimate {
        thresholds,
        survival,
        n_samples: n,
        fit: SubGaussianFit::invalid(),
    };
    est.fit = fit_subgaussian(&est);
    Ok(est)
}

/// Least squares of `log survival` against `λ²` over the thresholds where
/// survival lies in `[10/n, 1/2]`. Fewer than 4 usable points, or a
/// degenerate threshold set, marks the fit invalid.
pub fn fit_subgaussian(est: &TailEstimate) -> SubGaussianFit {
    let floor = 10.0 / est.n_samples as f64;
    let pts: Vec<(f64, f64)> = est
        .thresholds
        .iter()
        .zip(&est.survival)
        .filter(|&(_, &s)| s >= floor && s <= 0.5)
        .map(|(&l, &s)| (l * l, s.ln()))
        .collect();
    if pts.len() < 4 {
        return SubGaussianFit::invalid();
    }
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    if sxx <= 0.0 {
        return SubGaussianFit::invalid();
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 0.0 };
    SubGaussianFit {
        valid: true,
        slope,
        intercept,
        r_squared,
        fit_window: (pts[0].0.sqrt(), pts[pts.len() - 1].0.sqrt()),
        n_points: pts.len(),
    }
}

/// The scalar functional evaluated on each randomized sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Statistic {
    /// `‖S(t)φ^ω‖_{L^q_t L^r_x}` over `[0, t_end]` with `n_times` samples.
    Spacetime {
        q: f64,
        r: f64,
        t_end: f64,
        n_times: usize,
    },
    /// `‖φ^ω‖_{H^s}`.
    Sobolev { s: f64 },
    /// Max-exponent smoothed space-time size of the free evolution.
    SmoothedSpacetime { s: f64, t_end: f64, n_times: usize },
    /// `|Re c₀|` of the randomized field: with unit data concentrated at the
    /// zero mode this is exactly one real Gaussian part.
    RealPartAtZeroMode,
}

/// Free evolution sampled on `n_times` equal intervals spanning `[0, t_end]`
/// (so `n_times + 1` fields; the rectangle rule then covers exactly `t_end`).
fn linear_trajectory(u: &Field, t_end: f64, n_times: usize) -> Result<Trajectory> {
    if n_times == 0 || !(t_end > 0.0) {
        return Err(Error::BadTimeGrid {
            dt: t_end / n_times.max(1) as f64,
            t_end,
        });
    }
    let dt = t_end / n_times as f64;
    let times: Vec<f64> = (0..=n_times).map(|k| k as f64 * dt).collect();
    let fields = times.iter().map(|&t| linear_propagate(u, t)).collect();
    Ok(Trajectory { times, fields })
}

impl Statistic {
    pub fn evaluate(&self, sample: &Field) -> Result<f64> {
        match *self {
            Statistic::Spacetime {
                q,
                r,
                t_end,
                n_times,
            } => spacetime_norm(&linear_trajectory(sample, t_end, n_times)?, q, r),
            Statistic::Sobolev { s } => sobolev_norm(sample, s, false),
            Statistic::SmoothedSpacetime { s, t_end, n_times } => {
                ws_norm(&linear_trajectory(sample, t_end, n_times)?, s)
            }
            Statistic::RealPartAtZeroMode => {
                let grid = sample.grid();
                let zero = vec![0i64; grid.d()];
                Ok(sample.coefficient(&zero)?.re.abs())
            }
        }
    }
}

/// Draws `n_samples` independent randomizations of `phi`, evaluates the
/// statistic on each, and returns the tail estimate together with the raw
/// per-sample values (in sample order).
pub fn tail_experiment(
    phi: &Field,
    ladder: &WindowLadder,
    spec: &RandomizationSpec,
    statistic: &Statistic,
    n_samples: usize,
) -> Result<(TailEstimate, Vec<f64>)> {
    if n_samples == 0 {
        return Err(Error::EmptyInput("n_samples must be positive"));
    }
    let samples: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let omega = crate::random::randomize_dilated(phi, ladder, &spec.for_sample(i as u64))?;
            statistic.evaluate(&omega)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((estimate_tail(&samples)?, samples))
}

/// One row of a space-time constant scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrichartzScan {
    pub q: f64,
    pub r: f64,
    pub t_end: f64,
    pub n_times: usize,
    /// Ratio for each nonzero input, in order.
    pub per_datum: Vec<f64>,
    pub n_skipped: usize,
    pub sup: f64,
}

/// Max over the family of `‖S(t)φ‖_{L^q_t L^r_x} / ‖φ‖_{L²}` for an
/// admissible pair. Zero fields are skipped (and counted).
pub fn strichartz_scan(
    family: &[Field],
    q: f64,
    r: f64,
    t_end: f64,
    n_times: usize,
) -> Result<StrichartzScan> {
    if family.is_empty() {
        return Err(Error::EmptyInput("empty data family"));
    }
    let d = family[0].grid().d();
    if !is_admissible(q, r, d) {
        return Err(Error::BadNormParameter(format!(
            "(q, r) = ({q}, {r}) is not admissible in dimension {d}"
        )));
    }
    let mut per_datum = Vec::new();
    let mut n_skipped = 0usize;
    for phi in family {
        let size = lebesgue_norm(phi, 2.0)?;
        if size == 0.0 {
            n_skipped += 1;
            continue;
        }
        let traj = linear_trajectory(phi, t_end, n_times)?;
        per_datum.push(spacetime_norm(&traj, q, r)? / size);
    }
    if per_datum.is_empty() {
        return Err(Error::EmptyInput("all family members were zero"));
    }
    let sup = per_datum.iter().cloned().fold(0.0f64, f64::max);
    Ok(StrichartzScan {
        q,
        r,
        t_end,
        n_times,
        per_datum,
        n_skipped,
        sup,
    })
}

/// One row of the bilinear product-norm scan: low block `n1`, high block
/// `n2`, and the empirical max of the normalized product norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilinearRow {
    pub n1: u64,
    pub n2: u64,
    pub ratio: f64,
    pub n_samples: usize,
}

/// White noise in frequency: iid unit complex Gaussians per mode.
fn white_field(grid: Grid, seed: u64) -> Field {
    let mut f = Field::zeros(grid, Representation::Frequency);
    let d = grid.d();
    let mut modes = [0i64; crate::grid::MAX_DIM];
    for (flat, z) in f.data_mut().iter_mut().enumerate() {
        grid.modes_of_flat(flat, &mut modes[..d]);
        *z = Distribution::ComplexGaussian.coefficient(seed, &modes[..d]);
    }
    f
}

/// Empirical max over random block data of
/// `‖P_{n1}S(t)φ₁ · P_{n2}S(t)φ₂‖_{L²_{t,x}}` divided by
/// `n1^{(d-2)/2} (n1/n2)^{1/2} ‖φ₁‖ ‖φ₂‖`, per `(n1, n2)` pair with
/// `n1 ≤ n2 ≤` the top ladder block.
pub fn bilinear_scan(
    ladder: &WindowLadder,
    pairs: &[(u64, u64)],
    n_samples: usize,
    t_end: f64,
    n_times: usize,
    seed: u64,
) -> Result<Vec<BilinearRow>> {
    if n_samples == 0 || pairs.is_empty() {
        return Err(Error::EmptyInput("need pairs and at least one sample"));
    }
    let grid = ladder.grid();
    let d = grid.d() as f64;
    let blocks = ladder.lp_blocks();
    for &(n1, n2) in pairs {
        if n1 > n2 || !blocks.contains(&n1) || !blocks.contains(&n2) {
            return Err(Error::BadNormParameter(format!(
                "block pair ({n1}, {n2}) must satisfy n1 ≤ n2 and lie on the ladder (top {})",
                ladder.lp_top()
            )));
        }
    }
    let mut rows = Vec::with_capacity(pairs.len());
    for &(n1, n2) in pairs {
        let ratios: Vec<f64> = (0..n_samples)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let s1 = crate::random::derive_seed(seed, 2 * i as u64);
                let s2 = crate::random::derive_seed(seed, 2 * i as u64 + 1);
                let phi1 = ladder.lp_project(&white_field(grid, s1), n1)?;
                let phi2 = ladder.lp_project(&white_field(grid, s2), n2)?;
                let size1 = lebesgue_norm(&phi1, 2.0)?;
                let size2 = lebesgue_norm(&phi2, 2.0)?;
                if size1 == 0.0 || size2 == 0.0 {
                    return Ok(0.0);
                }
                let dt = t_end / n_times as f64;
                let times: Vec<f64> = (0..=n_times).map(|k| k as f64 * dt).collect();
                let fields = times
                    .iter()
                    .map(|&t| {
                        let a = linear_propagate(&phi1, t).into_physical();
                        let b = linear_propagate(&phi2, t).into_physical();
                        a.zip(&b, |x, y| x * y)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let product = spacetime_norm(&Trajectory { times, fields }, 2.0, 2.0)?;
                let predicted = (n1 as f64).powf((d - 2.0) / 2.0) * (n1 as f64 / n2 as f64).sqrt();
                Ok(product / (predicted * size1 * size2))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(BilinearRow {
            n1,
            n2,
            ratio: ratios.iter().cloned().fold(0.0f64, f64::max),
            n_samples,
        });
    }
    Ok(rows)
}

/// Dilation pipeline settings. `epsilon` is recorded in reports but drives no
/// computation; `eta2` is the smallness threshold on the measured `H^s` size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub s: f64,
    pub eta2: f64,
    pub epsilon: f64,
    pub n_samples: usize,
    pub evolve: EvolveParams,
    /// Allowed growth factor between early and late scattering increments.
    pub trend_slack: f64,
    /// Allowed relative drift of the conserved mass.
    pub mass_tolerance: f64,
}

impl PipelineConfig {
    pub fn new(s: f64, n_samples: usize, evolve: EvolveParams) -> PipelineConfig {
        PipelineConfig {
            s,
            eta2: 0.1,
            epsilon: 0.05,
            n_samples,
            evolve,
            trend_slack: 0.05,
            mass_tolerance: 1e-6,
        }
    }
}

/// Per-sample outcome of the dilation pipeline (one CSV row).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineSample {
    pub mu: f64,
    pub sample_index: usize,
    pub hs_size: f64,
    pub small: bool,
    pub blowup: bool,
    pub mass_ok: bool,
    pub trend_ok: bool,
    pub success: bool,
}

/// Aggregated per-scale report of the dilation pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationReport {
    pub mu: f64,
    pub window_kind: WindowKind,
    /// Homogeneous `Ḣ^s` size of the deterministic scaled data, measured.
    pub scaling_measured: f64,
    /// `μ^{(d-2)/2 - s}` times the size of the unscaled data.
    pub scaling_predicted: f64,
    pub mean_hs: f64,
    pub min_hs: f64,
    pub max_hs: f64,
    pub smallness_fraction: f64,
    pub success_fraction: f64,
    pub blowup_fraction: f64,
    pub n_samples: usize,
    pub eta2: f64,
    pub epsilon: f64,
}

/// Whether the scattering increments settle: the mean increment over the
/// last quartile of steps must not exceed the mean over the earlier steps by
/// more than the slack factor.
pub fn scattering_trend_ok(increments: &[f64], slack: f64) -> bool {
    if increments.len() < 4 {
        return false;
    }
    let split = increments.len() * 3 / 4;
    let early = &increments[..split];
    let late = &increments[split..];
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    mean(late) <= (1.0 + slack) * mean(early)
}

/// For each scale μ: scales the data onto the companion grid, randomizes
/// with unit cubes there, measures `H^s` smallness, evolves the perturbed
/// system with the linear part exact, and classifies each sample as a
/// success (finite, mass conserved, scattering increments settling).
pub fn dilation_pipeline(
    phi: &Field,
    kind: WindowKind,
    spec: &RandomizationSpec,
    mu_list: &[f64],
    cfg: &PipelineConfig,
) -> Result<(Vec<DilationReport>, Vec<PipelineSample>)> {
    if spec.mu != 1.0 {
        return Err(Error::BadDilation(spec.mu));
    }
    if mu_list.is_empty() || cfg.n_samples == 0 {
        return Err(Error::EmptyInput("need scales and samples"));
    }
    let d = phi.grid().d() as f64;
    let s_scatter = (d - 2.0) / 2.0;
    let base_hs = sobolev_norm(phi, cfg.s, true)?;

    let mut reports = Vec::with_capacity(mu_list.len());
    let mut all_samples = Vec::with_capacity(mu_list.len() * cfg.n_samples);
    for &mu in mu_list {
        let scaled = scale_field(phi, mu)?;
        let companion_ladder = WindowLadder::new(scaled.grid(), kind);
        let scaling_measured = sobolev_norm(&scaled, cfg.s, true)?;
        let scaling_predicted = mu.powf((d - 2.0) / 2.0 - cfg.s) * base_hs;

        let rows: Vec<PipelineSample> = (0..cfg.n_samples)
            .into_par_iter()
            .map(|i| -> Result<PipelineSample> {
                let omega = randomize(&scaled, &companion_ladder, &spec.for_sample(i as u64))?;
                let hs_size = sobolev_norm(&omega, cfg.s, false)?;
                let small = hs_size <= cfg.eta2;

                let v0 = Field::zeros(scaled.grid(), Representation::Frequency);
                let (blowup, mass_ok, trend_ok) = match evolve_perturbed(&omega, &v0, &cfg.evolve) {
                    Err(Error::NumericalBlowup { .. }) => (true, false, false),
                    Err(other) => return Err(other),
                    Ok(pert) => {
                        let traj = pert.into_trajectory()?;
                        let m0 =
                            conserved_quantities(&traj.fields[0], cfg.evolve.nonlinearity).mass;
                        let mass_ok = traj.fields.iter().all(|f| {
                            let m = conserved_quantities(f, cfg.evolve.nonlinearity).mass;
                            (m - m0).abs() <= cfg.mass_tolerance * m0.max(f64::MIN_POSITIVE)
                        });
                        let inc = scattering_increments(&traj, s_scatter)?;
                        (false, mass_ok, scattering_trend_ok(&inc, cfg.trend_slack))
                    }
                };
                let success = !blowup && mass_ok && trend_ok;
                Ok(PipelineSample {
                    mu,
                    sample_index: i,
                    hs_size,
                    small,
                    blowup,
                    mass_ok,
                    trend_ok,
                    success,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let n = rows.len() as f64;
        let mean_hs = rows.iter().map(|r| r.hs_size).sum::<f64>() / n;
        let min_hs = rows.iter().map(|r| r.hs_size).fold(f64::INFINITY, f64::min);
        let max_hs = rows.iter().map(|r| r.hs_size).fold(0.0f64, f64::max);
        reports.push(DilationReport {
            mu,
            window_kind: kind,
            scaling_measured,
            scaling_predicted,
            mean_hs,
            min_hs,
            max_hs,
            smallness_fraction: rows.iter().filter(|r| r.small).count() as f64 / n,
            success_fraction: rows.iter().filter(|r| r.success).count() as f64 / n,
            blowup_fraction: rows.iter().filter(|r| r.blowup).count() as f64 / n,
            n_samples: rows.len(),
            eta2: cfg.eta2,
            epsilon: cfg.epsilon,
        });
        all_samples.extend(rows);
    }
    Ok((reports, all_samples))
}
