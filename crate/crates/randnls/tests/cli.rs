//! End-to-end tests of the `randnls` binary: exit codes, schema error
//! naming, artifact round-trips, and worker-count determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use randnls::field::Field;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_randnls"))
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn run_on(config: &Path, sub: &str, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg(sub)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .arg("--quiet")
        .args(extra)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> serde_json::Value {
    let text =
        std::fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("parsing {}: {e}", path.display()))
}

#[test]
fn unknown_subcommand_exits_1() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1), "{out:?}");
}

#[test]
fn missing_config_flag_exits_2() {
    let out = bin().arg("norms").output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("--config"));
}

#[test]
fn help_exits_0() {
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in [
        "norms",
        "randomize",
        "evolve",
        "tail",
        "strichartz",
        "bilinear",
        "pvar",
        "dilate",
    ] {
        assert!(text.contains(sub), "help lacks `{sub}`:\n{text}");
    }
}

#[test]
fn schema_violation_names_the_field_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(
        &config,
        serde_json::json!({
            "grid": {"dim": 2, "points": 16, "box_length": 12.566370614359172},
            "data": {"profile": "gaussian_bump", "amplitude": 1.0, "width": 1.0},
            "window_kind": "raised_cosine",
            "randomization": {"dist": "complex_gaussian"}
        })
        .to_string(),
    )
    .unwrap();
    let out = run_on(&config, "randomize", &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("randomization.seed"),
        "stderr does not name the field: {stderr}"
    );
}

#[test]
fn pvar_fixture_prints_sqrt_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = manifest_dir().join("configs/pvar.json");
    let out = run_on(&config, "pvar", &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("1.41421356"),
        "expected sqrt(2) on stdout, got: {stdout}"
    );
    let results = read_json(&dir.path().join("out/results.json"));
    let vp = results["payload"]["vp_norm"].as_f64().unwrap();
    assert!((vp - 2f64.sqrt()).abs() < 1e-12);
    assert_eq!(
        results["payload"]["brute_force"].as_f64().unwrap(),
        vp,
        "oracle disagrees"
    );
}

#[test]
fn numerical_blowup_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("blowup.json");
    std::fs::write(
        &config,
        serde_json::json!({
            "grid": {"dim": 1, "points": 16, "box_length": 12.566370614359172},
            "data": {"profile": "plane_wave", "modes": [1], "amplitude": 1.0e154},
            "evolution": {"nonlinearity": "focusing", "dt": 10.0, "t_end": 40.0},
            "snapshot": false
        })
        .to_string(),
    )
    .unwrap();
    let out = run_on(&config, "evolve", &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("finiteness"));
}

#[test]
fn every_bundled_config_runs_clean() {
    let dir = tempfile::tempdir().unwrap();
    for sub in [
        "norms",
        "randomize",
        "evolve",
        "tail",
        "strichartz",
        "bilinear",
        "pvar",
        "dilate",
    ] {
        let config = manifest_dir().join(format!("configs/{sub}.json"));
        let out_dir = dir.path().join(sub);
        let out = run_on(&config, sub, &out_dir, &[]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{sub}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let results = read_json(&out_dir.join("results.json"));
        assert_eq!(results["command"], sub);
        let manifest = read_json(&out_dir.join("manifest.json"));
        assert_eq!(manifest["content_hash"], results["content_hash"]);
        assert!(manifest["finished_unix"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn snapshot_round_trips_through_the_reader() {
    let dir = tempfile::tempdir().unwrap();
    let config = manifest_dir().join("configs/randomize.json");
    let out_dir = dir.path().join("out");
    let out = run_on(&config, "randomize", &out_dir, &[]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let results = read_json(&out_dir.join("results.json"));
    let l2_out = results["payload"]["l2_out"].as_f64().unwrap();
    let field = Field::read_snapshot_file(out_dir.join("randomized.rnls")).unwrap();
    let l2 = randnls::norms::lebesgue_norm(&field, 2.0).unwrap();
    assert!(
        (l2 - l2_out).abs() <= 1e-12 * l2_out,
        "snapshot L² {l2} vs reported {l2_out}"
    );
}

#[test]
fn worker_flag_and_env_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = manifest_dir().join("configs/tail.json");

    let mut bytes = Vec::new();
    for (label, extra) in [("w1", ["--workers", "1"]), ("w4", ["--workers", "4"])] {
        let out_dir = dir.path().join(label);
        let out = run_on(&config, "tail", &out_dir, &extra);
        assert_eq!(out.status.code(), Some(0), "{out:?}");
        bytes.push(std::fs::read(out_dir.join("results.json")).unwrap());
    }
    // Worker count from the environment instead of the flag.
    let out_dir = dir.path().join("env2");
    let out = bin()
        .arg("tail")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&out_dir)
        .arg("--quiet")
        .env("RANDNLS_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    bytes.push(std::fs::read(out_dir.join("results.json")).unwrap());

    assert_eq!(
        bytes[0], bytes[1],
        "results differ between --workers 1 and 4"
    );
    assert_eq!(bytes[1], bytes[2], "results differ under RANDNLS_WORKERS=2");
}

#[test]
fn seed_override_changes_the_randomization() {
    let dir = tempfile::tempdir().unwrap();
    let config = manifest_dir().join("configs/tail.json");
    let base_dir = dir.path().join("base");
    let over_dir = dir.path().join("override");
    assert_eq!(
        run_on(&config, "tail", &base_dir, &[]).status.code(),
        Some(0)
    );
    assert_eq!(
        run_on(&config, "tail", &over_dir, &["--seed-override", "31337"])
            .status
            .code(),
        Some(0)
    );
    let base = read_json(&base_dir.join("results.json"));
    let over = read_json(&over_dir.join("results.json"));
    assert_eq!(over["payload"]["randomization"]["seed"], 31337);
    assert_ne!(
        base["payload"]["estimate"]["thresholds"], over["payload"]["estimate"]["thresholds"],
        "seed override did not change the samples"
    );
    assert_ne!(base["content_hash"], over["content_hash"]);
}
