//! Oscillator benchmark: the closed-form minimum-time solution, switch
//! detection on numerical controls, and an end-to-end comparison run
//! producing all verification reports.

use nalgebra::{DMatrix, DVector};

use crate::discretize::{integrate_adjoint, integrate_rk4, AdjointTrajectory, ControlGrid};
use crate::error::Result;
use crate::model::{builtin_problem, builtin_reference_endpoints, oscillator_problem};
use crate::pmp::{check_free_time, check_transversality_fixed, TransversalityReport};
use crate::regularity::{sample_probes, usc_verdict, UscReport};
use crate::solver::{solve_time_optimal, SolveOptions, SolveResult};

/// Accepted error on the solved terminal time.
pub const T_ERROR_TOL: f64 = 1e-3;

/// Accepted terminal constraint violation.
pub const VIOLATION_TOL: f64 = 1e-3;

/// Switch-detection saturation band half-width.
pub const SWITCH_BAND: f64 = 0.5;

/// Closed-form minimum-time solution of the oscillator transfer: ride
/// u = -1 along the circle of radius 3 about (-1, 0) until the switch
/// point, then u = +1 along the circle of radius sqrt(5) about (1, 0) for a
/// quarter turn.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticOscillatorSolution {
    /// Minimum time `arccos(2/3) + π/2`.
    pub t_star: f64,
    /// Switch time `arccos(2/3)`.
    pub tau: f64,
    /// Phase point at the switch: (1, -sqrt(5)).
    pub switch_point: [f64; 2],
    /// Terminal phase point: (1 - sqrt(5), 0).
    pub final_point: [f64; 2],
    pub psi1_terminal: f64,
    /// Terminal velocity costate, 1/sqrt(5).
    pub psi2_terminal: f64,
    /// Constant time costate, -1.
    pub psi3: f64,
}

pub fn analytic_oscillator() -> AnalyticOscillatorSolution {
    let tau = (2.0f64 / 3.0).acos();
    let s5 = 5.0f64.sqrt();
    AnalyticOscillatorSolution {
        t_star: tau + std::f64::consts::FRAC_PI_2,
        tau,
        switch_point: [1.0, -s5],
        final_point: [1.0 - s5, 0.0],
        psi1_terminal: 0.0,
        psi2_terminal: 1.0 / s5,
        psi3: -1.0,
    }
}

impl AnalyticOscillatorSolution {
    /// Optimal control: -1 before the switch, +1 after.
    pub fn control_at(&self, t: f64) -> f64 {
        if t < self.tau {
            -1.0
        } else {
            1.0
        }
    }

    /// Optimal augmented state (position, velocity, elapsed time).
    pub fn state_at(&self, t: f64) -> DVector<f64> {
        if t <= self.tau {
            DVector::from_vec(vec![3.0 * t.cos() - 1.0, -3.0 * t.sin(), t])
        } else {
            // Clockwise quarter arc about (1, 0) from angle -π/2.
            let angle = -std::f64::consts::FRAC_PI_2 - (t - self.tau);
            let r = 5.0f64.sqrt();
            DVector::from_vec(vec![1.0 + r * angle.cos(), r * angle.sin(), t])
        }
    }

    /// Optimal costate; sinusoidal in the phase components, constant in the
    /// time component.
    pub fn adjoint_at(&self, t: f64) -> DVector<f64> {
        let s5 = 5.0f64.sqrt();
        DVector::from_vec(vec![(t - self.t_star).sin() / s5, (t - self.t_star).cos() / s5, -1.0])
    }

    pub fn terminal_adjoint(&self) -> DVector<f64> {
        DVector::from_vec(vec![self.psi1_terminal, self.psi2_terminal, self.psi3])
    }

    /// The optimal control sampled at interval midpoints on a uniform grid
    /// over `[0, t_star]`.
    pub fn sampled_control(&self, n_intervals: usize) -> Result<ControlGrid> {
        let h = self.t_star / n_intervals as f64;
        let values = DMatrix::from_fn(n_intervals, 1, |k, _| {
            self.control_at((k as f64 + 0.5) * h)
        });
        ControlGrid::new(0.0, self.t_star, values)
    }
}

/// Integrate the analytic control arc by arc (the switch never aligns with
/// a uniform grid node, so each constant-control leg is integrated on its
/// own grid). Returns the terminal augmented state.
pub fn integrate_analytic_arcs(n_per_arc: usize) -> Result<DVector<f64>> {
    let sol = analytic_oscillator();
    let spec = builtin_problem("oscillator")?;
    let leg1 = ControlGrid::constant(0.0, sol.tau, &DVector::from_element(1, -1.0), n_per_arc)?;
    let mid = integrate_rk4(&spec, &leg1)?.final_state();

    let spec2 = oscillator_problem(mid, sol.tau);
    let leg2 =
        ControlGrid::constant(sol.tau, sol.t_star, &DVector::from_element(1, 1.0), n_per_arc)?;
    Ok(integrate_rk4(&spec2, &leg2)?.final_state())
}

/// Locate sign switches of a saturated scalar control: a switch is emitted
/// midway between consecutive saturated intervals of opposite sign
/// (saturation meaning `|u| >= threshold`); values inside the band are
/// treated as transition samples.
pub fn detect_switch(control: &ControlGrid, threshold: f64) -> Vec<f64> {
    assert_eq!(control.control_dim(), 1, "switch detection expects a scalar control");
    let h = control.step();
    let mid = |k: usize| control.t0() + (k as f64 + 0.5) * h;
    let mut switches = Vec::new();
    let mut last: Option<(f64, usize)> = None;
    for k in 0..control.n_intervals() {
        let u = control.values()[(k, 0)];
        if u.abs() < threshold {
            continue;
        }
        let sign = u.signum();
        if let Some((prev_sign, prev_k)) = last {
            if sign != prev_sign {
                switches.push(0.5 * (mid(prev_k) + mid(k)));
            }
        }
        last = Some((sign, k));
    }
    switches
}

/// End-to-end benchmark report against the closed-form solution.
#[derive(Debug, Clone)]
pub struct BenchReport {
    pub t_opt: f64,
    pub t_error: f64,
    pub switch_times: Vec<f64>,
    /// Error of the single detected switch; infinite when the count is not
    /// exactly one.
    pub switch_time_error: f64,
    pub terminal_violation: f64,
    /// Distance of the solved phase endpoint from the analytic final point.
    pub endpoint_error: f64,
    pub transversality: TransversalityReport,
    pub usc: UscReport,
    /// Full solver output at the graded point.
    pub solve: SolveResult,
    /// Adjoint integrated backward from the analytic terminal costate along
    /// the solved trajectory.
    pub adjoint: AdjointTrajectory,
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
    /// All tracked errors within their acceptance thresholds: terminal time
    /// within [`T_ERROR_TOL`], violation within [`VIOLATION_TOL`], and
    /// exactly one switch within two grid steps of the analytic switch.
    pub pass: bool,
}

/// Solve the oscillator with the supplied options, integrate the adjoint
/// backward from the analytic terminal costate along the solved trajectory,
/// and grade the outcome against the closed-form solution.
pub fn run_bench(opts: &SolveOptions) -> Result<BenchReport> {
    let spec = builtin_problem("oscillator")?;
    let analytic = analytic_oscillator();

    let sol = solve_time_optimal(&spec, opts)?;
    let t_error = (sol.t_opt - analytic.t_star).abs();
    let switch_times = detect_switch(&sol.control, SWITCH_BAND);
    let h = sol.t_opt / opts.n_intervals as f64;
    let switch_time_error = if switch_times.len() == 1 {
        (switch_times[0] - analytic.tau).abs()
    } else {
        f64::INFINITY
    };
    let endpoint = sol.trajectory.final_state();
    let endpoint_error = ((endpoint[0] - analytic.final_point[0]).powi(2)
        + (endpoint[1] - analytic.final_point[1]).powi(2))
    .sqrt();

    let adjoint = integrate_adjoint(&spec, &sol.trajectory, &sol.control, &analytic.terminal_adjoint())?;
    let mut transversality =
        check_transversality_fixed(&spec, &adjoint, &sol.trajectory, &sol.control)?;
    let u_terminal = sol.control.node_value(opts.n_intervals);
    transversality.hamiltonian_residual = Some(check_free_time(
        &spec,
        &endpoint,
        &u_terminal,
        &analytic.terminal_adjoint(),
        sol.t_opt,
    )?);

    let probes = sample_probes(&builtin_reference_endpoints("oscillator")?, opts.seed);
    let usc = usc_verdict(&spec, &probes, crate::penalty::TOL_ACTIVE)?;

    let pass = t_error <= T_ERROR_TOL
        && sol.terminal_violation <= VIOLATION_TOL
        && switch_times.len() == 1
        && switch_time_error <= 2.0 * h;

    Ok(BenchReport {
        t_opt: sol.t_opt,
        t_error,
        switch_times,
        switch_time_error,
        terminal_violation: sol.terminal_violation,
        endpoint_error,
        transversality,
        usc,
        adjoint,
        iterations: sol.iterations,
        restarts: sol.restarts,
        converged: sol.converged,
        pass,
        solve: sol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn analytic_constants() {
        let sol = analytic_oscillator();
        assert_relative_eq!(sol.t_star, 2.41186, epsilon = 5e-6);
        assert_relative_eq!(sol.tau, 0.84107, epsilon = 5e-6);
        assert_relative_eq!(sol.switch_point[1], -2.23607, epsilon = 5e-6);
        // The final arc is a quarter turn.
        assert_relative_eq!(sol.t_star - sol.tau, std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn analytic_arcs_meet_at_switch_point() {
        let sol = analytic_oscillator();
        let before = sol.state_at(sol.tau);
        let after = sol.state_at(sol.tau + 1e-12);
        assert_relative_eq!(before[0], sol.switch_point[0], epsilon = 1e-9);
        assert_relative_eq!(before[1], sol.switch_point[1], epsilon = 1e-9);
        assert!((before[0] - after[0]).abs() < 1e-9);
        assert!((before[1] - after[1]).abs() < 1e-9);
    }

    #[test]
    fn analytic_self_consistency_under_rk4() {
        let end = integrate_analytic_arcs(2000).unwrap();
        let sol = analytic_oscillator();
        assert!((end[0] - sol.final_point[0]).abs() < 1e-8);
        assert!(end[1].abs() < 1e-8);
        assert_relative_eq!(end[2], sol.t_star, epsilon = 1e-9);
    }

    #[test]
    fn hamiltonian_vanishes_along_analytic_solution() {
        let sol = analytic_oscillator();
        let spec = builtin_problem("oscillator").unwrap();
        let n = 400;
        let mut max_h: f64 = 0.0;
        for k in 0..=n {
            let t = sol.t_star * k as f64 / n as f64;
            let h = crate::pmp::hamiltonian(
                &spec,
                &sol.state_at(t),
                &DVector::from_element(1, sol.control_at(t)),
                &sol.adjoint_at(t),
                t,
            );
            max_h = max_h.max(h.abs());
        }
        assert!(max_h <= 1e-8, "max |H| along the analytic solution: {max_h:.3e}");
    }

    #[test]
    fn detect_switch_on_sampled_analytic_control() {
        let sol = analytic_oscillator();
        let grid = sol.sampled_control(200).unwrap();
        let switches = detect_switch(&grid, SWITCH_BAND);
        assert_eq!(switches.len(), 1);
        let h = sol.t_star / 200.0;
        assert!(
            (switches[0] - sol.tau).abs() <= h,
            "switch at {} vs tau {} (h = {h})",
            switches[0],
            sol.tau
        );
    }

    #[test]
    fn detect_switch_trivial_cases() {
        let constant =
            ControlGrid::constant(0.0, 1.0, &DVector::from_element(1, 1.0), 24).unwrap();
        assert!(detect_switch(&constant, SWITCH_BAND).is_empty());

        let n = 24;
        let alternating = ControlGrid::new(
            0.0,
            1.0,
            DMatrix::from_fn(n, 1, |k, _| if k % 2 == 0 { 1.0 } else { -1.0 }),
        )
        .unwrap();
        assert_eq!(detect_switch(&alternating, SWITCH_BAND).len(), n - 1);
    }

    #[test]
    fn coarse_grid_bench_reports_honestly() {
        let report = run_bench(&SolveOptions {
            n_intervals: 20,
            max_restarts: 2,
            ..Default::default()
        })
        .unwrap();
        assert!(report.t_error.is_finite());
        assert!(report.terminal_violation.is_finite());
    }

    #[test]
    fn unpenalized_bench_fails_with_collapsed_time() {
        let report = run_bench(&SolveOptions {
            n_intervals: 40,
            rho: 0.0,
            max_restarts: 2,
            ..Default::default()
        })
        .unwrap();
        assert!(!report.pass);
        // With the penalty off, only the terminal time drives the objective
        // and it collapses toward t0.
        assert!(report.t_opt < 0.1, "T_opt = {}", report.t_opt);
        assert!(report.t_error > 1.0);
        // The collapsed endpoint sits near the start, where the velocity is
        // 2 sin T small.
        assert!(report.terminal_violation <= 2.0 * report.t_opt.sin() + 1e-9);
    }

    #[test]
    fn detect_switch_skips_band_samples() {
        // One in-band transition sample between saturated regimes.
        let mut values = DMatrix::from_element(10, 1, -1.0);
        values[(5, 0)] = 0.2;
        for k in 6..10 {
            values[(k, 0)] = 1.0;
        }
        let grid = ControlGrid::new(0.0, 1.0, values).unwrap();
        let switches = detect_switch(&grid, SWITCH_BAND);
        assert_eq!(switches.len(), 1);
        // Midway between interval 4 and interval 6 midpoints = node 5.5/10.
        assert_relative_eq!(switches[0], 0.55, epsilon = 1e-12);
    }
}
