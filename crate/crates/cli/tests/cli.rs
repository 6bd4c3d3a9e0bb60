//! End-to-end runs of the `qmacro` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_complex::Complex64;
use qmacro::diffraction::FringeScan;
use qmacro::quantum::{make_state, StateKind};
use qmacro::wigner::{save_grid, synth_grid, Axis};
use tempfile::TempDir;

fn qmacro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmacro")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Value of a named row in CSV output.
fn value(out: &Output, name: &str) -> f64 {
    let text = stdout(out);
    let line = text
        .lines()
        .find(|l| l.split(',').next() == Some(name))
        .unwrap_or_else(|| panic!("no {name} in\n{text}"));
    line.split(',').nth(1).unwrap().parse().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

const TEUFEL: &str = r#"{"kind": "thermal_oscillator", "mass": "1.3e-14 kg", "frequency": "1.1e7 Hz",
    "nbar": 0.34, "mode_particles": 2.9e11, "material": "aluminium"}"#;

#[test]
fn ghz_register_saturates_entangled_size() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "ghz.json", r#"{"kind": "qubit_register", "state": "ghz", "sites": 5}"#);
    let out = qmacro(&["measure", arg(&cfg), "--format", "csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!((value(&out, "n_ent") - 5.0).abs() < 1e-9);
    assert_eq!(value(&out, "witness_depth"), 5.0);
}

#[test]
fn thermal_oscillator_reproduces_tabulated_size() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "teufel.json", TEUFEL);
    let out = qmacro(&["measure", arg(&cfg), "--format", "csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(rel(value(&out, "n_ext"), 7.9e17) < 0.1);
    // The Hz input is converted and the conversion is reported.
    assert!(stderr(&out).contains("x 2 pi"));
    let table = qmacro(&["measure", arg(&cfg)]);
    assert!(stdout(&table).contains("# note: frequency: 11000000 Hz converted"));
}

#[test]
fn negative_mass_is_a_domain_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "neg.json", &TEUFEL.replace("\"1.3e-14 kg\"", "\"-1.3e-14 kg\""));
    let out = qmacro(&["measure", arg(&cfg)]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("mass"), "{}", stderr(&out));
}

#[test]
fn config_errors_exit_with_parse_code() {
    let dir = TempDir::new().unwrap();
    let cases = [
        TEUFEL.replace("\"nbar\"", "\"extra\": 1, \"nbar\""),
        TEUFEL.replace("1.3e-14 kg", "1.3e-14 g"),
        TEUFEL.replace("1.3e-14 kg", "1.3e-14 m"),
        TEUFEL.replace("1.1e7 Hz", "1.1e7"),
        "{not json".to_string(),
    ];
    for (i, text) in cases.iter().enumerate() {
        let cfg = write(&dir, &format!("bad{i}.json"), text);
        let out = qmacro(&["measure", arg(&cfg)]);
        assert_eq!(code(&out), 2, "case {i}: {}", stderr(&out));
    }
    assert_eq!(code(&qmacro(&["measure", "/nonexistent/config.json"])), 2);
}

fn grid_file(dir: &TempDir, name: &str, kind: StateKind, half: f64, count: usize) -> PathBuf {
    let axis = Axis::symmetric(half, count).unwrap();
    let grid = synth_grid(&make_state(kind, 40).unwrap(), axis, axis).unwrap();
    let p = dir.path().join(name);
    save_grid(&grid, &p).unwrap();
    p
}

#[test]
fn vacuum_grid_gives_ground_state_fisher() {
    let dir = TempDir::new().unwrap();
    let grid = grid_file(&dir, "vac.txt", StateKind::Vacuum, 6.0, 121);
    let out = qmacro(&["wigner", arg(&grid), "--format", "csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!((value(&out, "f_hat") - 2.0).abs() < 0.05);
    assert!(value(&out, "residual") < 0.05);

    let sized = qmacro(&[
        "wigner",
        arg(&grid),
        "--format",
        "csv",
        "--mass",
        "1e-20 kg",
        "--frequency",
        "1e6 Hz",
        "--mode-particles",
        "1e6",
        "--material",
        "silica",
    ]);
    assert_eq!(code(&sized), 0, "{}", stderr(&sized));
    assert!(value(&sized, "n_ext") > 0.0);
}

#[test]
fn cat_grid_optimum_is_the_separation_quadrature() {
    let dir = TempDir::new().unwrap();
    let grid = grid_file(&dir, "cat.txt", StateKind::EvenCat(Complex64::new(2.0, 0.0)), 10.0, 201);
    let out = qmacro(&["wigner", arg(&grid), "--format", "csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    // Pure state: F = 4 Var(x_theta), which for a cat split along x peaks at theta = 0
    // with 4 (1/2 + 2 alpha^2 tanh(alpha^2)) = 2 + 32 tanh 4.
    let theta = value(&out, "theta").rem_euclid(std::f64::consts::PI);
    assert!(theta.min(std::f64::consts::PI - theta) < 0.05, "{theta}");
    assert!(rel(value(&out, "f_hat"), 2.0 + 32.0 * 4f64.tanh()) < 0.02);
}

#[test]
fn corrupt_grid_exits_with_parse_code() {
    let dir = TempDir::new().unwrap();
    let grid = write(&dir, "bad.txt", "wigner-grid v1\nx -1 1 2\np -1 1 2\nscale 1\n0.25 oops\n0.25 0.25\n");
    let out = qmacro(&["wigner", arg(&grid)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("oops"));
}

#[test]
fn truncated_reconstruction_exits_with_reconstruction_code() {
    let dir = TempDir::new().unwrap();
    let grid = grid_file(&dir, "cat.txt", StateKind::EvenCat(Complex64::new(2.0, 0.0)), 10.0, 201);
    let out = qmacro(&["wigner", arg(&grid), "--dim", "4"]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    assert!(stderr(&out).contains("residual"));
}

#[test]
fn fein_preset_reports_chain_and_range() {
    let out = qmacro(&["diffraction", "--preset", "fein", "--format", "csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(rel(value(&out, "n_ext"), 1.4e14) < 0.1);
    assert!(rel(value(&out, "fisher_bound"), 4.3e-60) < 0.05);
    assert_eq!(value(&out, "l0_min"), 0.2);
    assert_eq!(value(&out, "l0_max"), 1.0);
    assert!(value(&out, "n_ent_at_l0_max") > value(&out, "n_ent_at_l0_min"));
}

#[test]
fn diffraction_config_matches_preset() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "fein.json",
        &format!(
            r#"{{"mass": "{} kg", "atoms": 2000, "period": "266e-9 m", "open_fraction": 0.43,
                "visibility": "0.25 dimensionless", "flight_time": "{} s", "source_distance": "0.2 m",
                "grating_distance": "1 m"}}"#,
            26777.0 * qmacro::measures::constants().atomic_mass,
            1.0 / 260.0
        ),
    );
    let from_config = qmacro(&["diffraction", arg(&cfg), "--format", "csv"]);
    let preset = qmacro(&["diffraction", "--preset", "fein", "--format", "csv"]);
    assert_eq!(code(&from_config), 0, "{}", stderr(&from_config));
    assert!(rel(value(&from_config, "n_ext"), value(&preset, "n_ext")) < 1e-5);
}

#[test]
fn flat_scan_gives_zero_sizes() {
    let dir = TempDir::new().unwrap();
    let scan = FringeScan::sinusoid(0.0, 2.0 * std::f64::consts::PI / 266e-9, 0.0, 4.0 * 266e-9, 64).unwrap();
    let path = write(&dir, "flat.txt", &scan.to_text());
    let out = qmacro(&["diffraction", "--preset", "fein", "--scan", arg(&path), "--format", "csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(value(&out, "visibility").abs() < 1e-9);
    assert!(value(&out, "n_ext").abs() < 1e-9 && value(&out, "n_ent").abs() < 1e-9);
}

#[test]
fn seeded_calibration_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let scan = FringeScan::sinusoid(0.25, 2.0 * std::f64::consts::PI / 266e-9, 0.3, 3.0 * 266e-9, 48).unwrap();
    let path = write(&dir, "scan.txt", &scan.to_text());
    let run = |seed: &str| qmacro(&["diffraction", "--preset", "fein", "--scan", arg(&path), "--calibrate", "20", "--seed", seed]);
    let (a, b) = (run("7"), run("7"));
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("visibility_std"));
}

#[test]
fn catalog_fig3_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let (p1, p2) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&p1, &p2] {
        let out = qmacro(&["catalog", "--what", "fig3", "--format", "csv", "--out", arg(p)]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    let (a, b) = (std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with(qmacro::catalog::CSV_HEADER));
    assert_eq!(text.lines().count(), 15);
}

#[test]
fn catalog_selectors() {
    let table = qmacro(&["catalog", "--what", "table1", "--format", "csv"]);
    assert_eq!(code(&table), 0);
    assert_eq!(stdout(&table).lines().count(), 11);

    let leggett = qmacro(&["catalog", "--what", "leggett", "--format", "csv"]);
    assert!(rel(value(&leggett, "momentum_n_ext"), 6.9e11) < 0.03);
    assert!(rel(value(&leggett, "position_n_ext"), 8.9e37) < 0.03);

    for what in ["nh", "flux"] {
        let out = qmacro(&["catalog", "--what", what, "--format", "json"]);
        assert_eq!(code(&out), 0, "{what}: {}", stderr(&out));
        let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert!(doc["rows"].as_array().is_some_and(|r| !r.is_empty()));
    }

    assert_eq!(code(&qmacro(&["catalog", "--what", "bogus"])), 2);
}

#[test]
fn drum_mode_volume() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "drum.json",
        r#"{"kind": "mode_volume", "shape": "circular", "size": "7.5e-6 m", "thickness": "1e-7 m",
            "mass": "4.79e-14 kg", "atomic_mass": "4.48e-26 kg"}"#,
    );
    let out = qmacro(&["oscillator", arg(&cfg), "--format", "csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!((value(&out, "mode_fraction") - 0.2695).abs() < 1e-4);
    assert!((value(&out, "mode_fraction_quadrature") - 0.2695).abs() < 1e-4);
}
