//! Configuration-driven run harness behind the `randnls` binary.
//!
//! Every run reads one JSON config, validates it against the subcommand's
//! schema (errors name the offending `section.field`), executes the
//! corresponding pipeline, and writes artifacts into the output directory:
//!
//! * `manifest.json` — config, tool version, content hash, timestamps;
//! * `results.json`  — the measurement payload, free of timestamps and hash
//!   maps, so identical configs produce byte-identical bytes at any worker
//!   count;
//! * CSV files with the raw per-sample rows for plotting;
//! * optional `RNLS` field snapshots.
//!
//! Exit-code contract of the binary: `0` success, `1` unknown subcommand,
//! `2` config/validation failure, `3` numerical abort.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::evolve::{conserved_quantities, evolve_nls, EvolveParams, Nonlinearity, Trajectory};
use crate::experiments::{
    bilinear_scan, dilation_pipeline, strichartz_scan, tail_experiment, PipelineConfig, Statistic,
};
use crate::field::Field;
use crate::grid::Grid;
use crate::norms::{besov_norm, lebesgue_norm, modulation_norm, sobolev_norm};
use crate::pvar::StepFunction;
use crate::random::{power_law_field, randomize_dilated, Distribution, RandomizationSpec};
use crate::window::{WindowKind, WindowLadder};

/// The eight run pipelines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Norms,
    Randomize,
    Evolve,
    Tail,
    Strichartz,
    Bilinear,
    Pvar,
    Dilate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Norms => "norms",
            Command::Randomize => "randomize",
            Command::Evolve => "evolve",
            Command::Tail => "tail",
            Command::Strichartz => "strichartz",
            Command::Bilinear => "bilinear",
            Command::Pvar => "pvar",
            Command::Dilate => "dilate",
        }
    }
}

/// Flags shared by all subcommands.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub workers: Option<usize>,
    pub seed_override: Option<u64>,
    pub quiet: bool,
}

/// How a run failed, mapped to the exit-code contract by the binary.
#[derive(Debug)]
pub enum RunFailure {
    /// Config missing/invalid, schema violation, unusable output directory.
    Validation(String),
    /// The computation aborted on non-finite state.
    Numerical(String),
}

impl RunFailure {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunFailure::Validation(_) => 2,
            RunFailure::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            RunFailure::Validation(m) | RunFailure::Numerical(m) => m,
        }
    }
}

impl From<Error> for RunFailure {
    fn from(e: Error) -> RunFailure {
        match e {
            Error::NumericalBlowup { .. } => RunFailure::Numerical(e.to_string()),
            other => RunFailure::Validation(other.to_string()),
        }
    }
}

type RunResult<T> = std::result::Result<T, RunFailure>;

fn invalid(msg: impl Into<String>) -> RunFailure {
    RunFailure::Validation(msg.into())
}

/// Worker count: the flag wins, then the `RANDNLS_WORKERS` environment
/// variable, then the library default.
pub fn resolve_workers(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| {
        std::env::var("RANDNLS_WORKERS")
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|&n| n > 0)
    })
}

/// SHA-256 over the canonical (key-sorted) config JSON and the tool version.
pub fn content_hash(config: &Value) -> String {
    let mut hasher = Sha256::new();
    hasher.update(config.to_string().as_bytes());
    hasher.update(b"\0");
    hasher.update(env!("CARGO_PKG_VERSION").as_bytes());
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

// ---------------------------------------------------------------------------
// Schema helpers: every error names the offending `section.field`.
// ---------------------------------------------------------------------------

fn req<'a>(cfg: &'a Value, section: &str, field: &str) -> RunResult<&'a Value> {
    cfg.get(section)
        .and_then(|s| s.get(field))
        .ok_or_else(|| invalid(format!("{section}.{field}: missing required field")))
}

fn opt<'a>(cfg: &'a Value, section: &str, field: &str) -> Option<&'a Value> {
    cfg.get(section).and_then(|s| s.get(field))
}

fn as_f64(v: &Value, path: &str) -> RunResult<f64> {
    // Accept the string "inf" for unbounded exponents.
    if let Some(s) = v.as_str() {
        if s == "inf" {
            return Ok(f64::INFINITY);
        }
    }
    v.as_f64()
        .ok_or_else(|| invalid(format!("{path}: expected a number")))
}

fn req_f64(cfg: &Value, section: &str, field: &str) -> RunResult<f64> {
    as_f64(req(cfg, section, field)?, &format!("{section}.{field}"))
}

fn req_u64(cfg: &Value, section: &str, field: &str) -> RunResult<u64> {
    req(cfg, section, field)?
        .as_u64()
        .ok_or_else(|| invalid(format!("{section}.{field}: expected an unsigned integer")))
}

fn req_usize(cfg: &Value, section: &str, field: &str) -> RunResult<usize> {
    Ok(req_u64(cfg, section, field)? as usize)
}

fn req_str<'a>(cfg: &'a Value, section: &str, field: &str) -> RunResult<&'a str> {
    req(cfg, section, field)?
        .as_str()
        .ok_or_else(|| invalid(format!("{section}.{field}: expected a string")))
}

fn req_bool(cfg: &Value, section: &str, field: &str) -> RunResult<bool> {
    req(cfg, section, field)?
        .as_bool()
        .ok_or_else(|| invalid(format!("{section}.{field}: expected a boolean")))
}

fn req_section<'a>(cfg: &'a Value, section: &str) -> RunResult<&'a Value> {
    let v = cfg
        .get(section)
        .ok_or_else(|| invalid(format!("{section}: missing required section")))?;
    if !v.is_object() {
        return Err(invalid(format!("{section}: expected an object")));
    }
    Ok(v)
}

/// Rejects unknown fields so config typos fail loudly.
fn check_keys(cfg: &Value, section: &str, allowed: &[&str]) -> RunResult<()> {
    if let Some(obj) = cfg.get(section).and_then(|s| s.as_object()) {
        for key in obj.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(invalid(format!("{section}.{key}: unknown field")));
            }
        }
    }
    Ok(())
}

fn check_top_keys(cfg: &Value, allowed: &[&str]) -> RunResult<()> {
    let obj = cfg
        .as_object()
        .ok_or_else(|| invalid("config: expected a JSON object"))?;
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(invalid(format!("{key}: unknown section")));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Config builders.
// ---------------------------------------------------------------------------

fn build_grid(cfg: &Value) -> RunResult<Grid> {
    req_section(cfg, "grid")?;
    check_keys(cfg, "grid", &["dim", "points", "box_length"])?;
    let dim = req_usize(cfg, "grid", "dim")?;
    let points = req_usize(cfg, "grid", "points")?;
    let box_length = req_f64(cfg, "grid", "box_length")?;
    Grid::new(dim, points, box_length).map_err(|e| {
        let field = match e {
            Error::BadDimension(_) => "dim",
            Error::BadGridSize(_) => "points",
            Error::BoxTooSmall(_) => "box_length",
            _ => "dim",
        };
        invalid(format!("grid.{field}: {e}"))
    })
}

fn build_data(cfg: &Value, grid: Grid) -> RunResult<Field> {
    req_section(cfg, "data")?;
    let profile = req_str(cfg, "data", "profile")?;
    match profile {
        "gaussian_bump" => {
            check_keys(cfg, "data", &["profile", "amplitude", "width"])?;
            let amplitude = req_f64(cfg, "data", "amplitude")?;
            let width = req_f64(cfg, "data", "width")?;
            if !(width > 0.0) {
                return Err(invalid("data.width: must be positive"));
            }
            Ok(Field::gaussian_bump(grid, amplitude, width))
        }
        "power_law" => {
            check_keys(
                cfg,
                "data",
                &["profile", "amplitude", "s", "epsilon", "zero_mean", "seed"],
            )?;
            let amplitude = req_f64(cfg, "data", "amplitude")?;
            let s = req_f64(cfg, "data", "s")?;
            let epsilon = req_f64(cfg, "data", "epsilon")?;
            let zero_mean = req_bool(cfg, "data", "zero_mean")?;
            let seed = req_u64(cfg, "data", "seed")?;
            Ok(power_law_field(
                grid, seed, amplitude, s, epsilon, zero_mean,
            ))
        }
        "plane_wave" => {
            check_keys(cfg, "data", &["profile", "modes", "amplitude"])?;
            let modes = req(cfg, "data", "modes")?
                .as_array()
                .ok_or_else(|| invalid("data.modes: expected an array of integers"))?
                .iter()
                .map(|m| {
                    m.as_i64()
                        .ok_or_else(|| invalid("data.modes: expected an array of integers"))
                })
                .collect::<RunResult<Vec<i64>>>()?;
            let amplitude = req_f64(cfg, "data", "amplitude")?;
            Field::plane_wave(grid, &modes, Complex64::new(amplitude, 0.0))
                .map_err(|e| invalid(format!("data.modes: {e}")))
        }
        other => Err(invalid(format!(
            "data.profile: unknown profile \"{other}\" \
             (expected gaussian_bump, power_law, or plane_wave)"
        ))),
    }
}

fn build_window_kind(cfg: &Value) -> RunResult<WindowKind> {
    let kind = cfg
        .get("window_kind")
        .ok_or_else(|| invalid("window_kind: missing required field"))?
        .as_str()
        .ok_or_else(|| invalid("window_kind: expected a string"))?;
    match kind {
        "raised_cosine" => Ok(WindowKind::RaisedCosine),
        "smoothstep" => Ok(WindowKind::Smoothstep),
        other => Err(invalid(format!(
            "window_kind: unknown kind \"{other}\" (expected raised_cosine or smoothstep)"
        ))),
    }
}

fn build_randomization(cfg: &Value, seed_override: Option<u64>) -> RunResult<RandomizationSpec> {
    req_section(cfg, "randomization")?;
    check_keys(
        cfg,
        "randomization",
        &["dist", "seed", "mu", "lattice_radius"],
    )?;
    let dist = match req_str(cfg, "randomization", "dist")? {
        "complex_gaussian" => Distribution::ComplexGaussian,
        "rademacher" => Distribution::Rademacher,
        "uniform" => Distribution::Uniform,
        "ones" => Distribution::Ones,
        other => {
            return Err(invalid(format!(
                "randomization.dist: unknown distribution \"{other}\""
            )))
        }
    };
    let seed = match seed_override {
        Some(s) => s,
        None => req_u64(cfg, "randomization", "seed")?,
    };
    let mu = match opt(cfg, "randomization", "mu") {
        Some(v) => as_f64(v, "randomization.mu")?,
        None => 1.0,
    };
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(invalid("randomization.mu: must be positive and finite"));
    }
    let lattice_radius = match opt(cfg, "randomization", "lattice_radius") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_i64()
                .ok_or_else(|| invalid("randomization.lattice_radius: expected an integer"))?,
        ),
    };
    Ok(RandomizationSpec {
        dist,
        seed,
        mu,
        lattice_radius,
    })
}

fn build_evolution(cfg: &Value) -> RunResult<EvolveParams> {
    req_section(cfg, "evolution")?;
    check_keys(
        cfg,
        "evolution",
        &["nonlinearity", "dt", "t_end", "sample_every"],
    )?;
    let nonlinearity = match req_str(cfg, "evolution", "nonlinearity")? {
        "defocusing" => Nonlinearity::Defocusing,
        "focusing" => Nonlinearity::Focusing,
        other => {
            return Err(invalid(format!(
                "evolution.nonlinearity: unknown sign \"{other}\" \
                 (expected defocusing or focusing)"
            )))
        }
    };
    let dt = req_f64(cfg, "evolution", "dt")?;
    let t_end = req_f64(cfg, "evolution", "t_end")?;
    let sample_every = match opt(cfg, "evolution", "sample_every") {
        Some(v) => v
            .as_u64()
            .ok_or_else(|| invalid("evolution.sample_every: expected an unsigned integer"))?
            as usize,
        None => 1,
    };
    Ok(EvolveParams {
        nonlinearity,
        dt,
        t_end,
        sample_every,
    })
}

fn build_statistic(cfg: &Value) -> RunResult<Statistic> {
    req_section(cfg, "statistic")?;
    match req_str(cfg, "statistic", "kind")? {
        "spacetime" => {
            check_keys(cfg, "statistic", &["kind", "q", "r", "t_end", "n_times"])?;
            Ok(Statistic::Spacetime {
                q: req_f64(cfg, "statistic", "q")?,
                r: req_f64(cfg, "statistic", "r")?,
                t_end: req_f64(cfg, "statistic", "t_end")?,
                n_times: req_usize(cfg, "statistic", "n_times")?,
            })
        }
        "sobolev" => {
            check_keys(cfg, "statistic", &["kind", "s"])?;
            Ok(Statistic::Sobolev {
                s: req_f64(cfg, "statistic", "s")?,
            })
        }
        "smoothed_spacetime" => {
            check_keys(cfg, "statistic", &["kind", "s", "t_end", "n_times"])?;
            Ok(Statistic::SmoothedSpacetime {
                s: req_f64(cfg, "statistic", "s")?,
                t_end: req_f64(cfg, "statistic", "t_end")?,
                n_times: req_usize(cfg, "statistic", "n_times")?,
            })
        }
        "real_part_at_zero_mode" => {
            check_keys(cfg, "statistic", &["kind"])?;
            Ok(Statistic::RealPartAtZeroMode)
        }
        other => Err(invalid(format!(
            "statistic.kind: unknown statistic \"{other}\""
        ))),
    }
}

// ---------------------------------------------------------------------------
// Artifact writers.
// ---------------------------------------------------------------------------

fn write_json(path: &Path, payload: &impl Serialize) -> RunResult<()> {
    let mut text = serde_json::to_string_pretty(payload)
        .map_err(|e| invalid(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| invalid(format!("writing {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> RunResult<()> {
    fs::write(path, text).map_err(|e| invalid(format!("writing {}: {e}", path.display())))
}

fn unix_now() -> f64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Everything a finished run leaves behind.
#[derive(Debug)]
pub struct RunSummary {
    pub results_path: PathBuf,
    pub manifest_path: PathBuf,
    pub content_hash: String,
}

struct RunContext {
    command: Command,
    config: Value,
    config_path: PathBuf,
    out_dir: PathBuf,
    hash: String,
    quiet: bool,
    started: f64,
}

impl RunContext {
    fn results(&self, payload: Value) -> RunResult<RunSummary> {
        let results = json!({
            "command": self.command.name(),
            "tool_version": env!("CARGO_PKG_VERSION"),
            "content_hash": self.hash,
            "payload": payload,
        });
        let results_path = self.out_dir.join("results.json");
        write_json(&results_path, &results)?;

        let manifest = json!({
            "command": self.command.name(),
            "tool_version": env!("CARGO_PKG_VERSION"),
            "config_path": self.config_path.display().to_string(),
            "config": self.config,
            "out_dir": self.out_dir.display().to_string(),
            "content_hash": self.hash,
            "started_unix": self.started,
            "finished_unix": unix_now(),
        });
        let manifest_path = self.out_dir.join("manifest.json");
        write_json(&manifest_path, &manifest)?;

        if !self.quiet {
            println!("wrote {}", results_path.display());
        }
        Ok(RunSummary {
            results_path,
            manifest_path,
            content_hash: self.hash.clone(),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

/// Loads, validates, executes, and persists one run.
pub fn run(
    command: Command,
    config_path: &Path,
    out_dir: &Path,
    opts: &RunOptions,
) -> RunResult<RunSummary> {
    let raw = fs::read_to_string(config_path)
        .map_err(|e| invalid(format!("config {}: {e}", config_path.display())))?;
    let mut config: Value = serde_json::from_str(&raw).map_err(|e| {
        invalid(format!(
            "config {}: invalid JSON: {e}",
            config_path.display()
        ))
    })?;
    if !config.is_object() {
        return Err(invalid("config: expected a JSON object"));
    }
    if let Some(seed) = opts.seed_override {
        if let Some(r) = config.get_mut("randomization") {
            if r.is_object() {
                r["seed"] = json!(seed);
            }
        }
    }

    fs::create_dir_all(out_dir)
        .map_err(|e| invalid(format!("output directory {}: {e}", out_dir.display())))?;

    let ctx = RunContext {
        command,
        hash: content_hash(&config),
        config,
        config_path: config_path.to_path_buf(),
        out_dir: out_dir.to_path_buf(),
        quiet: opts.quiet,
        started: unix_now(),
    };

    let body = || match command {
        Command::Norms => run_norms(&ctx),
        Command::Randomize => run_randomize(&ctx, opts.seed_override),
        Command::Evolve => run_evolve(&ctx, opts.seed_override),
        Command::Tail => run_tail(&ctx, opts.seed_override),
        Command::Strichartz => run_strichartz(&ctx),
        Command::Bilinear => run_bilinear(&ctx),
        Command::Pvar => run_pvar(&ctx),
        Command::Dilate => run_dilate(&ctx, opts.seed_override),
    };

    match resolve_workers(opts.workers) {
        None => body(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| invalid(format!("workers: {e}")))?;
            pool.install(body)
        }
    }
}

// ---------------------------------------------------------------------------
// Per-command pipelines.
// ---------------------------------------------------------------------------

fn run_norms(ctx: &RunContext) -> RunResult<RunSummary> {
    let cfg = &ctx.config;
    check_top_keys(cfg, &["grid", "data", "norms", "window_kind"])?;
    let grid = build_grid(cfg)?;
    let field = build_data(cfg, grid)?;
    req_section(cfg, "norms")?;
    check_keys(
        cfg,
        "norms",
        &["lebesgue", "sobolev", "modulation", "besov"],
    )?;

    let mut rows: Vec<Value> = Vec::new();
    let mut csv = String::from("norm,params,value\n");

    if let Some(list) = opt(cfg, "norms", "lebesgue") {
        let list = list
            .as_array()
            .ok_or_else(|| invalid("norms.lebesgue: expected an array"))?;
        for p in list {
            let p = as_f64(p, "norms.lebesgue")?;
            let value = lebesgue_norm(&field, p)?;
            rows.push(json!({"norm": "lebesgue", "p": if p.is_infinite() { json!("inf") } else { json!(p) }, "value": value}));
            csv.push_str(&format!("lebesgue,p={p},{value}\n"));
        }
    }
    if let Some(list) = opt(cfg, "norms", "sobolev") {
        let list = list
            .as_array()
            .ok_or_else(|| invalid("norms.sobolev: expected an array"))?;
        for entry in list {
            let s = as_f64(
                entry
                    .get("s")
                    .ok_or_else(|| invalid("norms.sobolev: each entry needs \"s\""))?,
                "norms.sobolev.s",
            )?;
            let homogeneous = entry
                .get("homogeneous")
                .and_then(|h| h.as_bool())
                .unwrap_or(false);
            let value = sobolev_norm(&field, s, homogeneous)?;
            rows.push(
                json!({"norm": "sobolev", "s": s, "homogeneous": homogeneous, "value": value}),
            );
            csv.push_str(&format!(
                "sobolev,s={s} homogeneous={homogeneous},{value}\n"
            ));
        }
    }
    let needs_ladder =
        opt(cfg, "norms", "modulation").is_some() || opt(cfg, "norms", "besov").is_some();
    if needs_ladder {
        let kind = build_window_kind(cfg)?;
        let ladder = WindowLadder::new(grid, kind);
        for (name, key) in [("modulation", "modulation"), ("besov", "besov")] {
            if let Some(list) = opt(cfg, "norms", key) {
                let list = list
                    .as_array()
                    .ok_or_else(|| invalid(format!("norms.{key}: expected an array")))?;
                for entry in list {
                    let path = format!("norms.{key}");
                    let p = as_f64(
                        entry
                            .get("p")
                            .ok_or_else(|| invalid(format!("{path}: each entry needs \"p\"")))?,
                        &format!("{path}.p"),
                    )?;
                    let q = as_f64(
                        entry
                            .get("q")
                            .ok_or_else(|| invalid(format!("{path}: each entry needs \"q\"")))?,
                        &format!("{path}.q"),
                    )?;
                    let s = as_f64(
                        entry
                            .get("s")
                            .ok_or_else(|| invalid(format!("{path}: each entry needs \"s\"")))?,
                        &format!("{path}.s"),
                    )?;
                    let value = if name == "modulation" {
                        modulation_norm(&field, &ladder, p, q, s)?
                    } else {
                        besov_norm(&field, &ladder, p, q, s)?
                    };
                    rows.push(json!({"norm": name, "p": p, "q": q, "s": s, "value": value}));
                    csv.push_str(&format!("{name},p={p} q={q} s={s},{value}\n"));
                }
            }
        }
    }
    if rows.is_empty() {
        return Err(invalid(
            "norms: no norms requested (expected lebesgue, sobolev, modulation, or besov)",
        ));
    }
    write_text(&ctx.path("norms.csv"), &csv)?;
    ctx.results(json!({"values": rows}))
}

fn run_randomize(ctx: &RunContext, seed_override: Option<u64>) -> RunResult<RunSummary> {
    let cfg = &ctx.config;
    check_top_keys(
        cfg,
        &["grid", "data", "window_kind", "randomization", "snapshot"],
    )?;
    let grid = build_grid(cfg)?;
    let field = build_data(cfg, grid)?;
    let kind = build_window_kind(cfg)?;
    let spec = build_randomization(cfg, seed_override)?;
    let ladder = WindowLadder::new(grid, kind);

    let randomized = randomize_dilated(&field, &ladder, &spec)?;
    let truncation = ladder.truncation_loss(&field, spec.mu, spec.lattice_radius)?;
    let l2_in = lebesgue_norm(&field, 2.0)?;
    let l2_out = lebesgue_norm(&randomized, 2.0)?;

    let snapshot = cfg
        .get("snapshot")
        .map(|v| {
            v.as_bool()
                .ok_or_else(|| invalid("snapshot: expected a boolean"))
        })
        .transpose()?
        .unwrap_or(true);
    let mut snapshot_file = None;
    if snapshot {
        let path = ctx.path("randomized.rnls");
        randomized.write_snapshot_file(&path)?;
        snapshot_file = Some("randomized.rnls".to_string());
    }
    ctx.results(json!({
        "window_kind": kind,
        "randomization": spec,
        "l2_in": l2_in,
        "l2_out": l2_out,
        "truncation_loss": truncation,
        "snapshot": snapshot_file,
    }))
}

fn run_evolve(ctx: &RunContext, seed_override: Option<u64>) -> RunResult<RunSummary> {
    let cfg = &ctx.config;
    check_top_keys(
        cfg,
        &[
            "grid",
            "data",
            "evolution",
            "randomization",
            "window_kind",
            "snapshot",
        ],
    )?;
    let grid = build_grid(cfg)?;
    let mut field = build_data(cfg, grid)?;
    let params = build_evolution(cfg)?;
    let mut spec_json = json!(null);
    if cfg.get("randomization").is_some() {
        let kind = build_window_kind(cfg)?;
        let spec = build_randomization(cfg, seed_override)?;
        let ladder = WindowLadder::new(grid, kind);
        field = randomize_dilated(&field, &ladder, &spec)?;
        spec_json = json!({"window_kind": kind, "randomization": spec});
    }

    let traj: Trajectory = evolve_nls(&field, &params)?;
    let d = grid.d();
    let mut csv = String::from("time,mass");
    for axis in 0..d {
        csv.push_str(&format!(",momentum_{axis}"));
    }
    csv.push_str(",hamiltonian\n");
    let mut mass0 = 0.0;
    let mut max_mass_drift = 0.0f64;
    let mut h0 = 0.0;
    let mut max_h_drift = 0.0f64;
    for (k, (t, f)) in traj.times.iter().zip(&traj.fields).enumerate() {
        let q = conserved_quantities(f, params.nonlinearity);
        if k == 0 {
            mass0 = q.mass;
            h0 = q.hamiltonian;
        } else {
            max_mass_drift =
                max_mass_drift.max((q.mass - mass0).abs() / mass0.max(f64::MIN_POSITIVE));
            max_h_drift = max_h_drift.max((q.hamiltonian - h0).abs());
        }
        csv.push_str(&format!("{t},{}", q.mass));
        for p in &q.momentum {
            csv.push_str(&format!(",{p}"));
        }
        csv.push_str(&format!(",{}\n", q.hamiltonian));
    }
    write_text(&ctx.path("conserved.csv"), &csv)?;

    let snapshot = cfg
        .get("snapshot")
        .map(|v| {
            v.as_bool()
                .ok_or_else(|| invalid("snapshot: expected a boolean"))
        })
        .transpose()?
        .unwrap_or(true);
    let mut snapshot_file = None;
    if snapshot {
        let path = ctx.path("final.rnls");
        traj.fields.last().unwrap().write_snapshot_file(&path)?;
        snapshot_file = Some("final.rnls".to_string());
    }
    ctx.results(json!({
        "evolution": params,
        "randomized": spec_json,
        "n_samples": traj.times.len(),
        "final_time": traj.final_time(),
        "initial_mass": mass0,
        "max_relative_mass_drift": max_mass_drift,
        "initial_hamiltonian": h0,
        "max_hamiltonian_drift": max_h_drift,
        "snapshot": snapshot_file,
    }))
}

fn run_tail(ctx: &RunContext, seed_override: Option<u64>) -> RunResult<RunSummary> {
    let cfg = &ctx.config;
    check_top_keys(
        cfg,
        &[
            "grid",
            "data",
            "window_kind",
            "randomization",
            "statistic",
            "n_samples",
        ],
    )?;
    let grid = build_grid(cfg)?;
    let field = build_data(cfg, grid)?;
    let kind = build_window_kind(cfg)?;
    let spec = build_randomization(cfg, seed_override)?;
    let statistic = build_statistic(cfg)?;
    let n_samples =
        cfg.get("n_samples")
            .ok_or_else(|| invalid("n_samples: missing required field"))?
            .as_u64()
            .ok_or_else(|| invalid("n_samples: expected an unsigned integer"))? as usize;

    let ladder = WindowLadder::new(grid, kind);
    let (estimate, samples) = tail_experiment(&field, &ladder, &spec, &statistic, n_samples)?;

    let mut csv = String::from("sample_index,statistic\n");
    for (i, s) in samples.iter().enumerate() {
        csv.push_str(&format!("{i},{s}\n"));
    }
    write_text(&ctx.path("samples.csv"), &csv)?;
    ctx.results(json!({
        "window_kind": kind,
        "randomization": spec,
        "statistic": statistic,
        "estimate": estimate,
    }))
}

fn run_strichartz(ctx: &RunContext) -> RunResult<RunSummary> {
    let cfg = &ctx.config;
    check_top_keys(cfg, &["grid", "family", "pair", "horizon"])?;
    let grid = build_grid(cfg)?;
    req_section(cfg, "family")?;
    let family: Vec<Field> = match req_str(cfg, "family", "kind")? {
        "plane_wave" => {
            check_keys(cfg, "family", &["kind", "modes", "amplitude"])?;
            let modes = req(cfg, "family", "modes")?
                .as_array()
                .ok_or_else(|| invalid("family.modes: expected an array of integers"))?
                .iter()
                .map(|m| {
                    m.as_i64()
                        .ok_or_else(|| invalid("family.modes: expected an array of integers"))
                })
                .collect::<RunResult<Vec<i64>>>()?;
            let amplitude = req_f64(cfg, "family", "amplitude")?;
            vec![
                Field::plane_wave(grid, &modes, Complex64::new(amplitude, 0.0))
                    .map_err(|e| invalid(format!("family.modes: {e}")))?,
            ]
        }
        "power_law_ensemble" => {
            check_keys(
                cfg,
                "family",
                &[
                    "kind",
                    "count",
                    "seed",
                    "amplitude",
                    "s",
                    "epsilon",
                    "zero_mean",
                ],
            )?;
            let count = req_usize(cfg, "family", "count")?;
            let seed = req_u64(cfg, "family", "seed")?;
            let amplitude = req_f64(cfg, "family", "amplitude")?;
            let s = req_f64(cfg, "family", "s")?;
            let epsilon = req_f64(cfg, "family", "epsilon")?;
            let zero_mean = req_bool(cfg, "family", "zero_mean")?;
            (0..count)
                .map(|i| {
                    power_law_field(
                        grid,
                        crate::random::derive_seed(seed, i as u64),
                        amplitude,
                        s,
                        epsilon,
                        zero_mean,
                    )
                })
                .collect()
        }
        other => {
            return Err(invalid(format!(
                "family.kind: unknown family \"{other}\" \
                 (expected plane_wave or power_law_ensemble)"
            )))
        }
    };
    let q = req_f64(cfg, "pair", "q")?;
    let r = req_f64(cfg, "pair", "r")?;
    let t_end = req_f64(cfg, "horizon", "t_end")?;
    let n_times = req_usize(cfg, "horizon", "n_times")?;

    let scan = strichartz_scan(&family, q, r, t_end, n_times)?;
    let mut csv = String::from("datum_index,ratio\n");
    for (i, ratio) in scan.per_datum.iter().enumerate() {
        csv.push_str(&format!("{i},{ratio}\n"));
    }
    write_text(&ctx.path("scan.csv"), &csv)?;
    ctx.results(json!({ "scan": scan }))
}

fn run_bilinear(ctx: &RunContext) -> RunResult<RunSummary> {
    let cfg = &ctx.config;
    check_top_keys(
        cfg,
        &[
            "grid",
            "window_kind",
            "pairs",
            "n_samples",
            "horizon",
            "seed",
        ],
    )?;
    let grid = build_grid(cfg)?;
    let kind = build_window_kind(cfg)?;
    let pairs = cfg
        .get("pairs")
        .ok_or_else(|| invalid("pairs: missing required field"))?
        .as_array()
        .ok_or_else(|| invalid("pairs: expected an array of [n1, n2] pairs"))?
        .iter()
        .map(|p| {
            let arr = p
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| invalid("pairs: each entry must be [n1, n2]"))?;
            let n1 = arr[0]
                .as_u64()
                .ok_or_else(|| invalid("pairs: block sizes must be unsigned integers"))?;
            let n2 = arr[1]
                .as_u64()
                .ok_or_else(|| invalid("pairs: block sizes must be unsigned integers"))?;
            Ok((n1, n2))
        })
        .collect::<RunResult<Vec<(u64, u64)>>>()?;
    let n_samples =
        cfg.get("n_samples")
            .ok_or_else(|| invalid("n_samples: missing required field"))?
            .as_u64()
            .ok_or_else(|| invalid("n_samples: expected an unsigned integer"))? as usize;
    let t_end = req_f64(cfg, "horizon", "t_end")?;
    let n_times = req_usize(cfg, "horizon", "n_times")?;
    let seed = cfg
        .get("seed")
        .ok_or_else(|| invalid("seed: missing required field"))?
        .as_u64()
        .ok_or_else(|| invalid("seed: expected an unsigned integer"))?;

    let ladder = WindowLadder::new(grid, kind);
    let rows = bilinear_scan(&ladder, &pairs, n_samples, t_end, n_times, seed)?;
    let mut csv = String::from("n1,n2,ratio,n_samples\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            row.n1, row.n2, row.ratio, row.n_samples
        ));
    }
    write_text(&ctx.path("scan.csv"), &csv)?;
    ctx.results(json!({"window_kind": kind, "rows": rows}))
}

fn run_pvar(ctx: &RunContext) -> RunResult<RunSummary> {
    let cfg = &ctx.config;
    check_top_keys(cfg, &["step_function", "p"])?;
    let sf_value = cfg
        .get("step_function")
        .ok_or_else(|| invalid("step_function: missing required section"))?;
    let sf =
        StepFunction::from_json(sf_value).map_err(|e| invalid(format!("step_function: {e}")))?;
    let p = as_f64(
        cfg.get("p")
            .ok_or_else(|| invalid("p: missing required field"))?,
        "p",
    )?;
    let value = sf.vp_norm(p)?;
    let brute = if sf.knots().len() <= crate::pvar::MAX_BRUTE_KNOTS {
        Some(sf.vp_bruteforce(p)?)
    } else {
        None
    };
    let mass_bound = sf.value_mass(p)?;

    // The headline value goes to stdout even in quiet mode.
    println!("{value:.8}");
    ctx.results(json!({
        "p": p,
        "vp_norm": value,
        "brute_force": brute,
        "value_mass_bound": mass_bound,
        "knots": sf.knots().len(),
    }))
}

fn run_dilate(ctx: &RunContext, seed_override: Option<u64>) -> RunResult<RunSummary> {
    let cfg = &ctx.config;
    check_top_keys(
        cfg,
        &[
            "grid",
            "data",
            "window_kind",
            "randomization",
            "pipeline",
            "evolution",
            "mu_list",
        ],
    )?;
    let grid = build_grid(cfg)?;
    let field = build_data(cfg, grid)?;
    let kind = build_window_kind(cfg)?;
    let spec = build_randomization(cfg, seed_override)?;
    let evolve = build_evolution(cfg)?;
    req_section(cfg, "pipeline")?;
    check_keys(
        cfg,
        "pipeline",
        &[
            "s",
            "eta2",
            "epsilon",
            "n_samples",
            "trend_slack",
            "mass_tolerance",
        ],
    )?;
    let mut pipeline = PipelineConfig::new(
        req_f64(cfg, "pipeline", "s")?,
        req_usize(cfg, "pipeline", "n_samples")?,
        evolve,
    );
    if let Some(v) = opt(cfg, "pipeline", "eta2") {
        pipeline.eta2 = as_f64(v, "pipeline.eta2")?;
    }
    if let Some(v) = opt(cfg, "pipeline", "epsilon") {
        pipeline.epsilon = as_f64(v, "pipeline.epsilon")?;
    }
    if let Some(v) = opt(cfg, "pipeline", "trend_slack") {
        pipeline.trend_slack = as_f64(v, "pipeline.trend_slack")?;
    }
    if let Some(v) = opt(cfg, "pipeline", "mass_tolerance") {
        pipeline.mass_tolerance = as_f64(v, "pipeline.mass_tolerance")?;
    }
    let mu_list = cfg
        .get("mu_list")
        .ok_or_else(|| invalid("mu_list: missing required field"))?
        .as_array()
        .ok_or_else(|| invalid("mu_list: expected an array of scales"))?
        .iter()
        .map(|m| as_f64(m, "mu_list"))
        .collect::<RunResult<Vec<f64>>>()?;

    let (reports, samples) = dilation_pipeline(&field, kind, &spec, &mu_list, &pipeline)?;

    let mut csv = String::from("mu,sample_index,hs_size,small,blowup,mass_ok,trend_ok,success\n");
    for r in &samples {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.mu, r.sample_index, r.hs_size, r.small, r.blowup, r.mass_ok, r.trend_ok, r.success
        ));
    }
    write_text(&ctx.path("samples.csv"), &csv)?;
    ctx.results(json!({
        "window_kind": kind,
        "randomization": spec,
        "pipeline": pipeline,
        "reports": reports,
    }))
}
