//! Command-line surface for the optimal-control toolkit: solve, verify the
//! separation condition, check transversality residuals, benchmark against
//! the closed-form oscillator solution, and sweep the penalty weight.
//!
//! Exit codes: 0 success, 1 configuration error, 2 non-converged or failed
//! checks, 3 separation condition fails.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;

use penalight::bench::{analytic_oscillator, run_bench};
use penalight::discretize::{integrate_adjoint, integrate_rk4};
use penalight::error::Error;
use penalight::model::{builtin_problem, builtin_reference_endpoints};
use penalight::penalty::TOL_ACTIVE;
use penalight::pmp::{
    check_free_time, check_moving_manifold, check_transversality_fixed, control_stationarity_norm,
    hamiltonian,
};
use penalight::regularity::{sample_probes, usc_verdict, UscVerdict};
use penalight::solver::{exactness_sweep, solve_time_optimal};

use penalight_cli::config::{resolve_config, EmitKind, RunConfig};
use penalight_cli::reports::{
    adjoint_csv, trajectory_csv, write_file, BenchJson, SolveJson, SweepJson, TransversalityJson,
    UscJson,
};

const EXIT_OK: u8 = 0;
const EXIT_CONFIG: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_USC_FAILS: u8 = 3;

#[derive(Parser)]
#[command(name = "penalight", version, about = "Exact-penalty optimal control toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Registry problem name.
    #[arg(long)]
    problem: Option<String>,
    /// JSON config file; CLI flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of control intervals.
    #[arg(long)]
    n_intervals: Option<usize>,
    /// Penalty weight on the terminal defect.
    #[arg(long)]
    rho: Option<f64>,
    /// Initial terminal time for the solver.
    #[arg(long)]
    t_init: Option<f64>,
    /// Output directory for emitted files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the structured JSON report to stdout instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a registry problem by penalized direct transcription.
    Solve(CommonArgs),
    /// Verify the separation condition at sampled terminal probes.
    CheckUsc(CommonArgs),
    /// Check transversality residuals against the analytic oscillator data.
    CheckTransversality(CommonArgs),
    /// Solve the oscillator and grade it against the closed-form solution.
    Bench(CommonArgs),
    /// Re-solve across penalty weights and tabulate terminal violations.
    SweepLambda(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Solve(args) => with_config(args, cmd_solve),
        Command::CheckUsc(args) => with_config(args, cmd_check_usc),
        Command::CheckTransversality(args) => with_config(args, cmd_check_transversality),
        Command::Bench(args) => with_config(args, cmd_bench),
        Command::SweepLambda(args) => with_config(args, cmd_sweep),
    };
    ExitCode::from(code)
}

fn with_config(args: &CommonArgs, run: impl Fn(&RunConfig, bool) -> u8) -> u8 {
    let cfg = match resolve_config(
        args.config.as_deref(),
        args.problem.as_deref(),
        args.n_intervals,
        args.rho,
        args.t_init,
        args.out.as_deref(),
    ) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("config error: {msg}");
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = std::fs::create_dir_all(&cfg.output_dir) {
        eprintln!("config error: cannot create {}: {e}", cfg.output_dir.display());
        return EXIT_CONFIG;
    }
    run(&cfg, args.json)
}

/// Maps library errors onto the exit-code contract: argument and regime
/// errors are configuration problems; numerical failures are
/// non-convergence.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::UnknownProblem { .. }
        | Error::InvalidArgument(_)
        | Error::Misuse(_)
        | Error::Unsupported(_) => EXIT_CONFIG,
        _ => EXIT_NOT_CONVERGED,
    }
}

fn emit_report(
    cfg: &RunConfig,
    json_flag: bool,
    text: &str,
    json: &impl serde::Serialize,
) -> Result<(), String> {
    if json_flag {
        println!("{}", serde_json::to_string_pretty(json).map_err(|e| e.to_string())?);
    } else {
        print!("{text}");
    }
    if cfg.emits(EmitKind::ReportTxt) {
        write_file(&cfg.output_dir, "report.txt", text)?;
    }
    if cfg.emits(EmitKind::ReportJson) {
        let doc = serde_json::to_string_pretty(json).map_err(|e| e.to_string())?;
        write_file(&cfg.output_dir, "report.json", &doc)?;
    }
    Ok(())
}

fn cmd_solve(cfg: &RunConfig, json_flag: bool) -> u8 {
    let spec = match builtin_problem(&cfg.problem) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_CONFIG;
        }
    };
    let sol = match solve_time_optimal(&spec, &cfg.solve_options()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("solve failed: {e}");
            return exit_code_for(&e);
        }
    };

    if cfg.emits(EmitKind::TrajectoryCsv) {
        let csv = trajectory_csv(&sol.trajectory, &sol.control);
        if let Err(msg) = write_file(&cfg.output_dir, "trajectory.csv", &csv) {
            eprintln!("config error: {msg}");
            return EXIT_CONFIG;
        }
    }
    if cfg.emits(EmitKind::AdjointCsv) && cfg.problem == "oscillator" {
        // The analytic terminal costate makes the backward pass well-posed.
        let psi_terminal = analytic_oscillator().terminal_adjoint();
        match integrate_adjoint(&spec, &sol.trajectory, &sol.control, &psi_terminal) {
            Ok(adj) => {
                if let Err(msg) = write_file(&cfg.output_dir, "adjoint.csv", &adjoint_csv(&adj)) {
                    eprintln!("config error: {msg}");
                    return EXIT_CONFIG;
                }
            }
            Err(e) => eprintln!("adjoint emission skipped: {e}"),
        }
    }

    let report = SolveJson::new(&cfg.problem, cfg.n_intervals, cfg.rho, &sol);
    if let Err(msg) = emit_report(cfg, json_flag, &report.render_text(), &report) {
        eprintln!("config error: {msg}");
        return EXIT_CONFIG;
    }
    if sol.converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    }
}

fn cmd_check_usc(cfg: &RunConfig, json_flag: bool) -> u8 {
    let spec = match builtin_problem(&cfg.problem) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_CONFIG;
        }
    };
    let references = match builtin_reference_endpoints(&cfg.problem) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_CONFIG;
        }
    };
    let probes = sample_probes(&references, cfg.seed);
    let report = match usc_verdict(&spec, &probes, TOL_ACTIVE) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("separation check failed: {e}");
            return exit_code_for(&e);
        }
    };
    let json = UscJson::new(&cfg.problem, &report);
    if let Err(msg) = emit_report(cfg, json_flag, &json.render_text(), &json) {
        eprintln!("config error: {msg}");
        return EXIT_CONFIG;
    }
    match report.verdict {
        UscVerdict::Holds => EXIT_OK,
        UscVerdict::Fails => EXIT_USC_FAILS,
    }
}

fn cmd_check_transversality(cfg: &RunConfig, json_flag: bool) -> u8 {
    if cfg.problem != "oscillator" {
        eprintln!(
            "config error: transversality checks need analytic reference data, \
             available for 'oscillator' only"
        );
        return EXIT_CONFIG;
    }
    let spec = builtin_problem("oscillator").expect("registry entry");
    let analytic = analytic_oscillator();

    let run = || -> Result<(TransversalityJson, String), Error> {
        let grid = analytic.sampled_control(cfg.n_intervals)?;
        let traj = integrate_rk4(&spec, &grid)?;
        let adjoint = integrate_adjoint(&spec, &traj, &grid, &analytic.terminal_adjoint())?;

        let max_adjoint_error = adjoint
            .times
            .iter()
            .enumerate()
            .map(|(k, &t)| (adjoint.value_at_node(k) - analytic.adjoint_at(t)).abs().max())
            .fold(0.0f64, f64::max);

        let trans = check_transversality_fixed(&spec, &adjoint, &traj, &grid)?;
        let x_terminal = DVector::from_vec(vec![
            analytic.final_point[0],
            analytic.final_point[1],
            analytic.t_star,
        ]);
        let u_terminal = DVector::from_element(1, 1.0);
        let psi_terminal = analytic.terminal_adjoint();
        let free =
            check_free_time(&spec, &x_terminal, &u_terminal, &psi_terminal, analytic.t_star)?;
        let moving = check_moving_manifold(
            &spec,
            &x_terminal,
            &u_terminal,
            &psi_terminal,
            analytic.t_star,
            &trans.nu,
            &trans.mu,
        );
        let max_h = (0..=400)
            .map(|k| {
                let t = analytic.t_star * k as f64 / 400.0;
                hamiltonian(
                    &spec,
                    &analytic.state_at(t),
                    &DVector::from_element(1, analytic.control_at(t)),
                    &analytic.adjoint_at(t),
                    t,
                )
                .abs()
            })
            .fold(0.0f64, f64::max);

        let json = TransversalityJson {
            problem: cfg.problem.clone(),
            nu: trans.nu.clone(),
            mu: trans.mu.clone(),
            endpoint_residual: trans.endpoint_residual,
            hamiltonian_residual: free,
            moving_manifold_residual: moving,
            max_hamiltonian_along_solution: max_h,
            max_adjoint_error,
            switching_function_norm: control_stationarity_norm(&spec, &adjoint, &traj, &grid),
            pass: trans.endpoint_residual <= 1e-10
                && free <= 1e-12
                && moving <= 1e-12
                && max_h <= 1e-8
                && max_adjoint_error <= 1e-6,
        };
        Ok((json, adjoint_csv(&adjoint)))
    };

    let (json, adjoint_file) = match run() {
        Ok(out) => out,
        Err(e) => {
            eprintln!("transversality check failed: {e}");
            return exit_code_for(&e);
        }
    };
    if cfg.emits(EmitKind::AdjointCsv) {
        if let Err(msg) = write_file(&cfg.output_dir, "adjoint.csv", &adjoint_file) {
            eprintln!("config error: {msg}");
            return EXIT_CONFIG;
        }
    }
    if let Err(msg) = emit_report(cfg, json_flag, &json.render_text(), &json) {
        eprintln!("config error: {msg}");
        return EXIT_CONFIG;
    }
    if json.pass {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    }
}

fn cmd_bench(cfg: &RunConfig, json_flag: bool) -> u8 {
    if cfg.problem != "oscillator" {
        eprintln!("config error: the benchmark compares against the oscillator solution");
        return EXIT_CONFIG;
    }
    let report = match run_bench(&cfg.solve_options()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("bench failed: {e}");
            return exit_code_for(&e);
        }
    };
    if cfg.emits(EmitKind::TrajectoryCsv) {
        let csv = trajectory_csv(&report.solve.trajectory, &report.solve.control);
        if let Err(msg) = write_file(&cfg.output_dir, "trajectory.csv", &csv) {
            eprintln!("config error: {msg}");
            return EXIT_CONFIG;
        }
    }
    if cfg.emits(EmitKind::AdjointCsv) {
        if let Err(msg) = write_file(&cfg.output_dir, "adjoint.csv", &adjoint_csv(&report.adjoint))
        {
            eprintln!("config error: {msg}");
            return EXIT_CONFIG;
        }
    }
    let json = BenchJson::new(&report);
    if let Err(msg) = emit_report(cfg, json_flag, &json.render_text(), &json) {
        eprintln!("config error: {msg}");
        return EXIT_CONFIG;
    }
    if report.pass {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    }
}

fn cmd_sweep(cfg: &RunConfig, json_flag: bool) -> u8 {
    let spec = match builtin_problem(&cfg.problem) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_CONFIG;
        }
    };
    let lambdas = cfg.lambda_sweep.clone().unwrap_or_else(|| vec![0.1, 1.0, 10.0, 100.0]);
    let table = match exactness_sweep(&spec, &cfg.solve_options(), &lambdas) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("sweep failed: {e}");
            return exit_code_for(&e);
        }
    };
    let json = SweepJson::new(&cfg.problem, &table);
    if let Err(msg) = emit_report(cfg, json_flag, &json.render_text(), &json) {
        eprintln!("config error: {msg}");
        return EXIT_CONFIG;
    }
    EXIT_OK
}
