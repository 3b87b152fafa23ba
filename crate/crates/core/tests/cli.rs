use std::fs;
use std::path::Path;
use std::process::Command;

use gkdv_core::cli::{cmd_evolve, cmd_run, cmd_series, cmd_spectrum, cmd_verify};
use gkdv_core::config::RunConfig;
use gkdv_core::io::SpectralCache;
use gkdv_core::linop::SpectralRecord;
use gkdv_core::{Grid, SpectralTolerances};

/// Small but resolved grid for fast end-to-end runs.
fn small_config(dir: &Path) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.grid.half_length = 20.0;
    cfg.grid.n_points = 512;
    cfg.output.dir = dir.to_path_buf();
    cfg
}

fn text(buf: Vec<u8>) -> String {
    String::from_utf8(buf).unwrap()
}

#[test]
fn spectrum_writes_record_and_reuses_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let mut out = Vec::new();
    assert!(cmd_spectrum(&cfg, &mut out).unwrap());
    let first = text(out);
    assert!(first.contains("spectrum (computed)"), "{first}");
    let rec: SpectralRecord =
        serde_json::from_slice(&fs::read(dir.path().join("spectrum/spectrum.json")).unwrap()).unwrap();
    assert!((rec.e0 - 0.6345).abs() < 1e-3);
    assert!((rec.certificate.yp_zm - 1.0).abs() < 1e-8);
    for f in ["eigenfunctions.csv", "eigenvalues.csv", "Y_plus.f64", "eigenfunctions.gp"] {
        assert!(dir.path().join("spectrum").join(f).exists(), "{f}");
    }

    let mut out = Vec::new();
    cmd_spectrum(&cfg, &mut out).unwrap();
    assert!(text(out).contains("spectrum (cached)"));

    // a different N has a different key: recomputed, not reused
    let mut other = cfg.clone();
    other.grid.n_points = 256;
    let mut out = Vec::new();
    cmd_spectrum(&other, &mut out).unwrap();
    assert!(text(out).contains("spectrum (computed)"));
    let g = Grid::new(20.0, 256).unwrap();
    assert!(SpectralCache::new(cfg.cache_dir()).path(6, &g, &SpectralTolerances::default()).exists());
}

#[test]
fn mismatched_cache_entry_is_ignored() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    cmd_spectrum(&cfg, &mut Vec::new()).unwrap();
    let cache = SpectralCache::new(cfg.cache_dir());
    let g512 = Grid::new(20.0, 512).unwrap();
    let g256 = Grid::new(20.0, 256).unwrap();
    let tol = SpectralTolerances::default();
    // plant the N = 512 entry under the N = 256 key
    fs::copy(cache.path(6, &g512, &tol), cache.path(6, &g256, &tol)).unwrap();
    let mut other = cfg.clone();
    other.grid.n_points = 256;
    let mut out = Vec::new();
    cmd_spectrum(&other, &mut out).unwrap();
    assert!(text(out).contains("spectrum (computed)"));
}

#[test]
fn subcritical_exponent_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path());
    cfg.profiles.p = 4;
    let err = cmd_spectrum(&cfg, &mut Vec::new()).unwrap_err().to_string();
    assert!(err.contains("p > 5 required for experiments"), "{err}");
}

#[test]
fn unknown_scenario_lists_the_available_ones() {
    let dir = tempfile::tempdir().unwrap();
    let err = cmd_run("nope", &small_config(dir.path()), &mut Vec::new()).unwrap_err().to_string();
    for n in ["instability", "special", "gradient_sign", "scaling", "shift"] {
        assert!(err.contains(n), "{err}");
    }
}

#[test]
fn special_run_reports_a_slope_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path());
    cfg.experiments.amplitude = Some(1.0);
    cfg.experiments.k_max = Some(3);
    cfg.experiments.horizon = Some(1.0);
    cfg.output.dir = dir.path().join("a");
    cmd_run("special", &cfg, &mut Vec::new()).unwrap();
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("a/special/report.json")).unwrap()).unwrap();
    assert!(report["quantities"]["r_slope"].is_f64(), "{report}");
    assert!(!report["fits"].as_array().unwrap().is_empty());

    cfg.output.dir = dir.path().join("b");
    cmd_run("special", &cfg, &mut Vec::new()).unwrap();
    let a = fs::read(dir.path().join("a/special/r.csv")).unwrap();
    let b = fs::read(dir.path().join("b/special/r.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn shift_scenario_passes() {
    let dir = tempfile::tempdir().unwrap();
    let mut out = Vec::new();
    assert!(cmd_run("shift", &small_config(dir.path()), &mut out).unwrap());
    assert!(dir.path().join("shift/coefficients.csv").exists());
}

#[test]
fn series_and_evolve_write_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path());
    cfg.experiments.amplitude = Some(-1.0);
    cfg.experiments.k_max = Some(2);
    let mut out = Vec::new();
    assert!(cmd_series(&cfg, &mut out).unwrap());
    let s = text(out);
    assert!(s.contains("‖Z1‖₂") && s.contains("‖Z2‖₂"), "{s}");
    let csv = fs::read_to_string(dir.path().join("series/coefficients.csv")).unwrap();
    assert!(csv.starts_with("x,Z1,Z2\n"));

    cfg.experiments.amplitude = None;
    cfg.experiments.horizon = Some(0.5);
    let mut out = Vec::new();
    assert!(cmd_evolve(&cfg, &mut out).unwrap());
    let traj = fs::read_to_string(dir.path().join("evolve/trajectory.csv")).unwrap();
    let last: Vec<f64> = traj.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((last[0] - 0.5).abs() < 1e-12);
    assert!(last[4] < 1e-8, "soliton drifted by {}", last[4]);
}

#[test]
fn quick_verify_passes_on_defaults_and_fails_under_resolved() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    cfg.output.dir = dir.path().to_path_buf();
    let mut out = Vec::new();
    assert!(cmd_verify(&cfg, false, &mut out).unwrap(), "{}", text(out));
    assert!(dir.path().join("verify.json").exists());

    cfg.grid.n_points = 64;
    let mut out = Vec::new();
    assert!(!cmd_verify(&cfg, false, &mut out).unwrap());
    let s = text(out);
    assert!(s.contains("[FAIL]   1") && s.contains("under-resolved"), "{s}");
}

fn gkdv() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gkdv"));
    for (k, _) in std::env::vars() {
        if k.starts_with("GKDV_") {
            c.env_remove(k);
        }
    }
    c
}

#[test]
fn binary_reads_config_env_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    fs::write(&cfg_path, "[grid]\nL = 30.0\nN = 256\n").unwrap();
    let out = dir.path().join("out");
    // file says N = 256, env says 512
    let o = gkdv()
        .args(["spectrum", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .env("GKDV_N", "512")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rec: SpectralRecord = serde_json::from_slice(&fs::read(out.join("spectrum/spectrum.json")).unwrap()).unwrap();
    assert_eq!((rec.half_length, rec.n_points), (30.0, 512));

    // the flag beats the env var
    let o = gkdv()
        .args(["spectrum", "--N", "256", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .env("GKDV_N", "512")
        .output()
        .unwrap();
    assert!(o.status.success());
    let rec: SpectralRecord = serde_json::from_slice(&fs::read(out.join("spectrum/spectrum.json")).unwrap()).unwrap();
    assert_eq!(rec.n_points, 256);
}

#[test]
fn binary_exit_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.toml");
    fs::write(&empty, "").unwrap();
    let o = gkdv().args(["run", "nope", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("available"));
    let o = gkdv().args(["spectrum", "--p", "4", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[grid]\nM = 3\n").unwrap();
    let o = gkdv().args(["spectrum", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    // empty file: defaults, status from the default run
    let o = gkdv()
        .args(["verify", "--quick", "--config"])
        .arg(&empty)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
}
