//! End-to-end tests of the `penalight` binary: exit codes, emitted files,
//! and report round-trips.

use std::path::Path;
use std::process::{Command, Output};

use penalight_cli::reports::{SolveJson, SweepJson, TransversalityJson, UscJson};

fn penalight(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_penalight"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("PENALIGHT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).to_string()
}

#[test]
fn solve_oscillator_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = penalight(&["solve", "--problem", "oscillator"], dir.path());
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("T_opt"));

    let report_text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let report: SolveJson = serde_json::from_str(&report_text).unwrap();
    assert!(
        (report.t_opt - 2.41186).abs() <= 1e-3,
        "T_opt = {} not within 1e-3 of 2.41186",
        report.t_opt
    );
    // Typed round-trip of the emitted JSON document.
    let again: SolveJson =
        serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(report, again);

    let txt = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(txt.contains("T_opt"));

    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,x1,x2,x3,u1");
    assert_eq!(lines.len(), 1 + 201, "one header plus N + 1 node rows");

    let adjoint = std::fs::read_to_string(dir.path().join("adjoint.csv")).unwrap();
    assert_eq!(adjoint.lines().next().unwrap(), "t,psi1,psi2,psi3");
}

#[test]
fn solve_rejects_unknown_problem_naming_registry() {
    let dir = tempfile::tempdir().unwrap();
    let out = penalight(&["solve", "--problem", "unknown"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("oscillator") && err.contains("nonsmooth_abs"), "stderr: {err}");
}

#[test]
fn solve_rejects_zero_intervals() {
    let dir = tempfile::tempdir().unwrap();
    let out = penalight(&["solve", "--problem", "oscillator", "--n-intervals", "0"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_usc_oscillator_holds() {
    let dir = tempfile::tempdir().unwrap();
    let out = penalight(&["check-usc", "--problem", "oscillator"], dir.path());
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("a = 1.000000 HOLDS"), "stdout: {text}");
}

#[test]
fn check_usc_nonsmooth_holds_without_classical_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let out = penalight(&["check-usc", "--problem", "nonsmooth_abs", "--json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let report: UscJson = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report.distance, 1.0);
    assert_eq!(report.verdict, "HOLDS");
    assert!(report.classical.contains("not applicable"));
}

#[test]
fn check_usc_degenerate_pair_fails_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = penalight(&["check-usc", "--problem", "degenerate_pair"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("FAILS"));
}

#[test]
fn check_transversality_analytic_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let out = penalight(&["check-transversality", "--json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let report: TransversalityJson = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report.endpoint_residual <= 1e-10);
    assert!(report.hamiltonian_residual <= 1e-12);
    assert!(report.max_hamiltonian_along_solution <= 1e-8);
    assert!((report.nu[0] + 1.0 / 5.0f64.sqrt()).abs() <= 1e-10);
    assert!(dir.path().join("adjoint.csv").exists());
}

#[test]
fn check_transversality_needs_analytic_problem() {
    let dir = tempfile::tempdir().unwrap();
    let out = penalight(&["check-transversality", "--problem", "nonsmooth_abs"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_lambda_emits_table_and_trend_note() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"problem": "oscillator", "n_intervals": 40, "lambda_sweep": [0.1, 1.0, 10.0, 100.0]}"#,
    )
    .unwrap();
    let out = penalight(&["sweep-lambda", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("violation trend"), "stdout: {text}");

    let report: SweepJson =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report.rows.len(), 4);
    assert!(report.violation_monotone_nonincreasing);
    let again: SweepJson =
        serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(report, again);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"problem": "oscillator", "n_intervals": 40}"#).unwrap();
    let out = penalight(
        &["solve", "--config", cfg.to_str().unwrap(), "--n-intervals", "60"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let report: SolveJson =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report.n_intervals, 60);
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 61);
}

#[test]
fn invalid_seed_env_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_penalight"))
        .args(["check-usc", "--problem", "oscillator"])
        .arg("--out")
        .arg(dir.path())
        .env("PENALIGHT_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn seed_env_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_penalight"))
        .args(["check-usc", "--problem", "oscillator"])
        .arg("--out")
        .arg(dir.path())
        .env("PENALIGHT_SEED", "12345")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn bench_defaults_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = penalight(&["bench"], dir.path());
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("pass                true"), "stdout: {text}");
    assert!(dir.path().join("trajectory.csv").exists());
    assert!(dir.path().join("adjoint.csv").exists());
}
