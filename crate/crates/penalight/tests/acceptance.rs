//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line (run with `--nocapture` to see the lines for passing
//! criteria as well).

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use penalight::bench::{analytic_oscillator, detect_switch, run_bench, BenchReport};
use penalight::discretize::{integrate_adjoint, integrate_rk4, ControlGrid};
use penalight::model::{builtin_problem, oscillator_problem, LeftEndpoint, ProblemSpec, TerminalConstraint, TerminalCost, TimeMode};
use penalight::penalty::TOL_ACTIVE;
use penalight::pmp::{
    check_free_time, check_left_endpoint, check_moving_manifold, hamiltonian,
    recover_multipliers,
};
use penalight::regularity::{
    check_mfcq, gordan_certificate, min_norm_point, usc_verdict, ClassicalCq, GordanCertificate,
    Hull, UscVerdict,
};
use penalight::solver::{exactness_sweep, SolveOptions};

fn report(criterion: usize, pass: bool, detail: &str) {
    println!("[{}] criterion {criterion}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn bench_run() -> &'static BenchReport {
    static RUN: OnceLock<BenchReport> = OnceLock::new();
    RUN.get_or_init(|| run_bench(&SolveOptions::default()).expect("bench run"))
}

/// Criterion 1: end-to-end solve with defaults lands within 1e-3 of the
/// analytic minimum time with terminal violation below 1e-3.
#[test]
fn criterion_01_oscillator_end_to_end() {
    let bench = bench_run();
    let pass = bench.t_error <= 1e-3 && bench.terminal_violation <= 1e-3;
    report(
        1,
        pass,
        &format!(
            "T_opt = {:.6}, |T - T*| = {:.3e} (tol 1e-3), violation = {:.3e} (tol 1e-3)",
            bench.t_opt, bench.t_error, bench.terminal_violation
        ),
    );
}

/// Criterion 2: exactly one control switch, within two grid steps of
/// arccos(2/3).
#[test]
fn criterion_02_bang_bang_structure() {
    let bench = bench_run();
    let h = bench.t_opt / 200.0;
    let pass = bench.switch_times.len() == 1 && bench.switch_time_error <= 2.0 * h;
    report(
        2,
        pass,
        &format!(
            "switches = {}, |switch - arccos(2/3)| = {:.3e} (tol 2h = {:.3e})",
            bench.switch_times.len(),
            bench.switch_time_error,
            2.0 * h
        ),
    );
}

/// Criterion 3: RK4 reproduces the two-arc closed form within 1e-6 at
/// N = 200 per arc, and the endpoint error contracts at fourth order.
#[test]
fn criterion_03_rk4_fidelity() {
    let analytic = analytic_oscillator();
    let spec = builtin_problem("oscillator").unwrap();

    let integrate_arcs = |n: usize| -> DVector<f64> {
        let leg1 =
            ControlGrid::constant(0.0, analytic.tau, &DVector::from_element(1, -1.0), n).unwrap();
        let mid = integrate_rk4(&spec, &leg1).unwrap().final_state();
        let spec2 = oscillator_problem(mid, analytic.tau);
        let leg2 =
            ControlGrid::constant(analytic.tau, analytic.t_star, &DVector::from_element(1, 1.0), n)
                .unwrap();
        integrate_rk4(&spec2, &leg2).unwrap().final_state()
    };
    let endpoint_err = |n: usize| -> f64 {
        let end = integrate_arcs(n);
        ((end[0] - analytic.final_point[0]).powi(2) + (end[1] - analytic.final_point[1]).powi(2))
            .sqrt()
    };

    let e200 = endpoint_err(200);
    let e25 = endpoint_err(25);
    let e50 = endpoint_err(50);
    let ratio = e25 / e50;
    let pass = e200 <= 1e-6 && ratio >= 12.0;
    report(
        3,
        pass,
        &format!(
            "endpoint error {e200:.3e} at N = 200 (tol 1e-6); N 25 -> 50 error ratio {ratio:.1} (needs >= 12)"
        ),
    );
}

/// Criterion 4: backward adjoint integration matches the sinusoidal closed
/// form to 1e-6, multiplier recovery is exact to 1e-10, and the Hamiltonian
/// vanishes along the analytic solution to 1e-8.
#[test]
fn criterion_04_adjoint_and_transversality_oracle() {
    let analytic = analytic_oscillator();
    let spec = builtin_problem("oscillator").unwrap();
    let n = 200;

    let grid = analytic.sampled_control(n).unwrap();
    let traj = integrate_rk4(&spec, &grid).unwrap();
    let adjoint =
        integrate_adjoint(&spec, &traj, &grid, &analytic.terminal_adjoint()).unwrap();
    let max_adj_err = adjoint
        .times
        .iter()
        .enumerate()
        .map(|(k, &t)| (adjoint.value_at_node(k) - analytic.adjoint_at(t)).abs().max())
        .fold(0.0f64, f64::max);

    let x_terminal = DVector::from_vec(vec![
        analytic.final_point[0],
        analytic.final_point[1],
        analytic.t_star,
    ]);
    let rec = recover_multipliers(&spec, &analytic.terminal_adjoint(), &x_terminal, analytic.t_star)
        .unwrap();
    let nu_err = (rec.nu[0] - (-1.0 / 5.0f64.sqrt())).abs();

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

    let pass =
        max_adj_err <= 1e-6 && rec.residual <= 1e-10 && nu_err <= 1e-10 && max_h <= 1e-8;
    report(
        4,
        pass,
        &format!(
            "max adjoint error {max_adj_err:.3e} (tol 1e-6), recovery residual {:.3e} (tol 1e-10), \
             |nu - (-1/sqrt(5))| = {nu_err:.3e} (tol 1e-10), max |H| = {max_h:.3e} (tol 1e-8)",
            rec.residual
        ),
    );
}

/// Criterion 5: unit separation distance on both built-in problems, with
/// the classical-condition flag reading not-applicable on the nonsmooth one.
#[test]
fn criterion_05_usc_numerics() {
    let spec = builtin_problem("oscillator").unwrap();
    let probes: Vec<(DVector<f64>, f64)> = [-0.1, 0.05, 0.2]
        .iter()
        .map(|&x2| (DVector::from_vec(vec![0.5, x2, 2.0]), 2.0))
        .collect();
    let osc = usc_verdict(&spec, &probes, TOL_ACTIVE).unwrap();

    let spec = builtin_problem("nonsmooth_abs").unwrap();
    let probes: Vec<(DVector<f64>, f64)> = [1.5, 2.5, -2.3]
        .iter()
        .map(|&x| (DVector::from_element(1, x), 1.0))
        .collect();
    let abs = usc_verdict(&spec, &probes, TOL_ACTIVE).unwrap();

    let pass = osc.distance == 1.0
        && osc.verdict == UscVerdict::Holds
        && abs.distance == 1.0
        && abs.verdict == UscVerdict::Holds
        && abs.classical == ClassicalCq::NonsmoothNotApplicableClassically;
    report(
        5,
        pass,
        &format!(
            "oscillator a = {} ({:?}), nonsmooth a = {} ({:?}, classical {:?})",
            osc.distance, osc.verdict, abs.distance, abs.verdict, abs.classical
        ),
    );
}

/// Brute-force minimum over the weight simplex with the stated step;
/// independent of the corral iteration.
fn brute_force_min_norm(gens: &[DVector<f64>], step: f64) -> f64 {
    let n = (1.0 / step).round() as usize;
    match gens.len() {
        1 => gens[0].norm(),
        2 => (0..=n)
            .map(|i| {
                let l = i as f64 * step;
                (&gens[0] * l + &gens[1] * (1.0 - l)).norm()
            })
            .fold(f64::INFINITY, f64::min),
        3 => {
            let mut best = f64::INFINITY;
            for i in 0..=n {
                let l1 = i as f64 * step;
                for j in 0..=(n - i) {
                    let l2 = j as f64 * step;
                    best =
                        best.min((&gens[0] * l1 + &gens[1] * l2 + &gens[2] * (1.0 - l1 - l2)).norm());
                }
            }
            best
        }
        _ => unreachable!("oracle supports at most 3 generators"),
    }
}

/// Criterion 6: the corral iteration matches the simplex-grid brute force
/// within 1e-3 on 100 random hulls and satisfies the optimality inequality
/// for every generator.
#[test]
fn criterion_06_min_norm_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FF_EE06);
    let mut max_diff: f64 = 0.0;
    let mut max_opt_defect: f64 = 0.0;
    let mut accepted = 0;
    while accepted < 100 {
        let dim = if rng.random::<bool>() { 2 } else { 3 };
        let count = 2 + (rng.random::<u32>() % 2) as usize;
        let gens: Vec<DVector<f64>> = (0..count)
            .map(|_| {
                let v = DVector::from_fn(dim, |_, _| rng.random_range(-1.0f64..1.0));
                let norm = v.norm().max(1e-9);
                &v / norm * rng.random_range(0.2..0.8)
            })
            .collect();
        let res = min_norm_point(&Hull::new(gens.clone())).unwrap();
        // The coarse grid oracle is only trustworthy away from borderline
        // hulls: skip distances inside (1e-12, 5e-3) and zero-distance hulls
        // whose witness weights sit within a grid cell of the simplex
        // boundary.
        if res.distance > 1e-12 && res.distance < 5e-3 {
            continue;
        }
        if res.distance <= 1e-12 && res.weights.iter().any(|&w| w > 0.0 && w < 2e-3) {
            continue;
        }
        accepted += 1;
        let brute = brute_force_min_norm(&gens, 1e-3);
        max_diff = max_diff.max((res.distance - brute).abs());
        let norm_sq = res.point.norm_squared();
        for g in &gens {
            max_opt_defect = max_opt_defect.max(norm_sq - res.point.dot(g));
        }
    }
    let pass = max_diff <= 1e-3 && max_opt_defect <= 1e-10;
    report(
        6,
        pass,
        &format!(
            "100 hulls: max |corral - brute force| = {max_diff:.3e} (tol 1e-3), \
             max optimality defect = {max_opt_defect:.3e} (tol 1e-10)"
        ),
    );
}

/// Criterion 7: on 200 random instances exactly one certificate branch
/// validates, and the hull test agrees with a 1e5-direction random search
/// outside the declared borderline band (hull distance below 0.05, where
/// the search has insufficient power).
#[test]
fn criterion_07_gordan_mfcq_property_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FF_EE07);
    let mut checked_against_oracle = 0usize;
    let mut exclusive = 0usize;
    for trial in 0..200 {
        let dim = 3;
        let count = 2 + (trial % 3);
        let mut gens: Vec<DVector<f64>> = (0..count)
            .map(|_| {
                let v = DVector::from_fn(dim, |_, _| rng.random_range(-1.0f64..1.0));
                let n = v.norm().max(1e-9);
                v / n
            })
            .collect();
        // A third of the instances get an extra generator that puts the
        // origin inside the hull by construction.
        if trial % 3 == 0 {
            let sum: DVector<f64> = gens.iter().fold(DVector::zeros(dim), |a, g| a + g);
            if sum.norm() > 1e-9 {
                gens.push(-&sum / sum.norm());
            }
        }

        let cert = gordan_certificate(&gens).unwrap();
        let res = min_norm_point(&Hull::new(gens.clone())).unwrap();

        // Random direction search: separating direction with margin.
        let mut found: Option<DVector<f64>> = None;
        for _ in 0..100_000 {
            let d = DVector::from_fn(dim, |_, _| rng.random_range(-1.0f64..1.0));
            let n = d.norm();
            if n < 1e-9 {
                continue;
            }
            let d = d / n;
            if gens.iter().all(|g| g.dot(&d) < -1e-9) {
                found = Some(d);
                break;
            }
        }

        // Exclusivity: the returned branch validates; the opposite branch
        // has no valid witness.
        let returned_valid = cert.validates(&gens, 1e-10);
        let opposite_invalid = match &cert {
            GordanCertificate::Direction(_) => {
                // Any convex combination is at least the hull distance from
                // the origin, so no weights certificate can validate.
                res.distance > 1e-9
            }
            GordanCertificate::Weights(_) => match &found {
                Some(d) => !GordanCertificate::Direction(d.clone()).validates(&gens, 1e-10),
                None => true,
            },
        };
        if returned_valid && opposite_invalid {
            exclusive += 1;
        }

        // Oracle agreement outside the borderline band.
        if res.distance >= 0.05 || res.distance <= 1e-12 {
            checked_against_oracle += 1;
            let (mfcq_holds, _) = check_mfcq(&gens).unwrap();
            assert_eq!(
                mfcq_holds,
                found.is_some(),
                "trial {trial}: hull distance {:.3e} vs search {:?}",
                res.distance,
                found.is_some()
            );
        }
    }
    let pass = exclusive == 200 && checked_against_oracle >= 150;
    report(
        7,
        pass,
        &format!(
            "200 instances: {exclusive} exclusively certified, {checked_against_oracle} \
             oracle-checked (agreement enforced by assert)"
        ),
    );
}

/// Criterion 8: forward-constructed multiplier identities are recovered to
/// 1e-8 with residual 1e-10 and nonnegative inequality multipliers.
#[test]
fn criterion_08_multiplier_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FF_EE08);
    let mut accepted = 0usize;
    let mut max_err: f64 = 0.0;
    let mut max_residual: f64 = 0.0;
    let mut any_negative_mu = false;
    while accepted < 100 {
        let n = 3 + (accepted % 3);
        let n_eq = accepted % 3;
        let n_ineq = 1 + (accepted % 2);
        let make_grad =
            |rng: &mut ChaCha8Rng| DVector::from_fn(n, |_, _| rng.random_range(-1.0f64..1.0));
        let eq_grads: Vec<DVector<f64>> = (0..n_eq).map(|_| make_grad(&mut rng)).collect();
        let ineq_grads: Vec<DVector<f64>> = (0..n_ineq).map(|_| make_grad(&mut rng)).collect();
        let cost_grad = make_grad(&mut rng);

        // Unique recovery needs a well-conditioned stacked gradient matrix.
        let stacked = DMatrix::from_fn(n, n_eq + n_ineq, |i, j| {
            if j < n_eq {
                eq_grads[j][i]
            } else {
                ineq_grads[j - n_eq][i]
            }
        });
        let smin = stacked
            .svd(false, false)
            .singular_values
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        if smin < 1e-1 {
            continue;
        }
        accepted += 1;

        let spec = linear_endpoint_spec(n, &cost_grad, &eq_grads, &ineq_grads);
        let nu_true: Vec<f64> = (0..n_eq).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mu_true: Vec<f64> = (0..n_ineq)
            .map(|_| if rng.random::<f64>() < 0.25 { 0.0 } else { rng.random_range(0.1..2.0) })
            .collect();
        let mut psi = -cost_grad.clone();
        for (g, &v) in eq_grads.iter().zip(&nu_true) {
            psi -= g * v;
        }
        for (g, &v) in ineq_grads.iter().zip(&mu_true) {
            psi -= g * v;
        }
        let x = DVector::zeros(n);
        let rec = recover_multipliers(&spec, &psi, &x, 1.0).unwrap();
        max_residual = max_residual.max(rec.residual);
        for (a, b) in rec.nu.iter().zip(&nu_true) {
            max_err = max_err.max((a - b).abs());
        }
        for (a, b) in rec.mu.iter().zip(&mu_true) {
            max_err = max_err.max((a - b).abs());
        }
        any_negative_mu |= rec.mu.iter().any(|&m| m < 0.0);
    }
    let pass = max_err <= 1e-8 && max_residual <= 1e-10 && !any_negative_mu;
    report(
        8,
        pass,
        &format!(
            "100 constructions: max multiplier error {max_err:.3e} (tol 1e-8), \
             max residual {max_residual:.3e} (tol 1e-10), negative mu seen: {any_negative_mu}"
        ),
    );
}

/// Linear endpoint data with prescribed gradients, on trivial dynamics.
fn linear_endpoint_spec(
    n: usize,
    cost_grad: &DVector<f64>,
    eq_grads: &[DVector<f64>],
    ineq_grads: &[DVector<f64>],
) -> ProblemSpec {
    let make = |g: &DVector<f64>| -> TerminalConstraint {
        let g1 = g.clone();
        let g2 = g.clone();
        TerminalConstraint::smooth(move |x: &DVector<f64>, _| x.dot(&g1), move |_, _| g2.clone())
    };
    let cg1 = cost_grad.clone();
    let cg2 = cost_grad.clone();
    ProblemSpec {
        state_dim: n,
        control_dim: 1,
        dynamics: Box::new(|x, _, _| DVector::zeros(x.len())),
        dynamics_jac_x: Box::new(move |x, _, _| DMatrix::zeros(x.len(), x.len())),
        dynamics_jac_u: Box::new(move |x, _, _| DMatrix::zeros(x.len(), 1)),
        terminal_cost: TerminalCost::new(
            move |x: &DVector<f64>, _| x.dot(&cg1),
            move |_, _| cg2.clone(),
        ),
        eq_constraints: eq_grads.iter().map(&make).collect(),
        ineq_constraints: ineq_grads.iter().map(&make).collect(),
        control_lower: DVector::from_element(1, -1.0),
        control_upper: DVector::from_element(1, 1.0),
        t0: 0.0,
        x0: DVector::zeros(n),
        time_mode: TimeMode::FreeT,
        left_endpoint: None,
    }
}

/// Criterion 9: penalty-weight sweep: feasibility for every weight from 100
/// up, and no objective drift between 100 and 1000.
#[test]
fn criterion_09_exactness_surrogate() {
    let spec = builtin_problem("oscillator").unwrap();
    let table =
        exactness_sweep(&spec, &SolveOptions::default(), &[0.1, 1.0, 10.0, 100.0, 1000.0])
            .unwrap();
    let high: Vec<_> = table.rows.iter().filter(|r| r.lambda >= 100.0).collect();
    let all_feasible = high.iter().all(|r| r.terminal_violation <= 1e-3);
    let drift = (high[0].objective - high[1].objective).abs();
    let pass = all_feasible && drift <= 5e-3;
    let detail = table
        .rows
        .iter()
        .map(|r| format!("({}, {:.6}, {:.1e})", r.lambda, r.objective, r.terminal_violation))
        .collect::<Vec<_>>()
        .join(" ");
    report(
        9,
        pass,
        &format!(
            "(lambda, objective, violation): {detail}; objective drift 100 -> 1000 = {drift:.3e} (tol 5e-3)"
        ),
    );
}

/// Criterion 10: closed-form moving-target and left-endpoint instances give
/// residuals below 1e-6, and zeroed time partials reduce the moving check
/// to the free-time check bit for bit.
#[test]
fn criterion_10_moving_manifold_and_left_endpoint() {
    // Moving target: x' = u on [0, T], x(0) = 0, |u| <= 1, target at T - 1,
    // cost T. Optimal: u = -1, T = 1/2, constant adjoint -1/2, multiplier 1/2.
    let spec = ProblemSpec {
        state_dim: 1,
        control_dim: 1,
        dynamics: Box::new(|_, u, _| DVector::from_element(1, u[0])),
        dynamics_jac_x: Box::new(|_, _, _| DMatrix::zeros(1, 1)),
        dynamics_jac_u: Box::new(|_, _, _| DMatrix::from_element(1, 1, 1.0)),
        terminal_cost: TerminalCost::new(|_, t| t, |_, _| DVector::zeros(1))
            .with_partial_t(|_, _| 1.0),
        eq_constraints: vec![TerminalConstraint::smooth_moving(
            |x, t| x[0] - (t - 1.0),
            |_, _| DVector::from_element(1, 1.0),
            |_, _| -1.0,
        )],
        ineq_constraints: vec![],
        control_lower: DVector::from_element(1, -1.0),
        control_upper: DVector::from_element(1, 1.0),
        t0: 0.0,
        x0: DVector::zeros(1),
        time_mode: TimeMode::FreeT,
        left_endpoint: None,
    };
    let t_opt = 0.5;
    let x_terminal = DVector::from_element(1, -0.5);
    let u_terminal = DVector::from_element(1, -1.0);
    let psi_terminal = DVector::from_element(1, -0.5);
    let rec = recover_multipliers(&spec, &psi_terminal, &x_terminal, t_opt).unwrap();
    let moving_residual =
        check_moving_manifold(&spec, &x_terminal, &u_terminal, &psi_terminal, t_opt, &rec.nu, &rec.mu);

    // Left endpoint: chi = x1 - 1 with psi(t0) = (3, 0) recovers gamma = 3.
    let mut left_spec = builtin_problem("degenerate_pair").unwrap();
    left_spec.left_endpoint = Some(LeftEndpoint {
        eq_constraints: vec![TerminalConstraint::smooth(
            |x, _| x[0] - 1.0,
            |_, _| DVector::from_vec(vec![1.0, 0.0]),
        )],
        ineq_constraints: vec![],
        free_t0: false,
    });
    let left = check_left_endpoint(
        &left_spec,
        &DVector::from_vec(vec![3.0, 0.0]),
        &DVector::from_vec(vec![1.0, 0.0]),
        0.0,
    )
    .unwrap();

    // Zeroed time partials: bit-for-bit reduction on identical inputs.
    let osc = builtin_problem("oscillator").unwrap();
    let x = DVector::from_vec(vec![0.7, -0.2, 1.3]);
    let u = DVector::from_element(1, 0.4);
    let psi = DVector::from_vec(vec![0.1, -0.9, 0.5]);
    let free = check_free_time(&osc, &x, &u, &psi, 1.3).unwrap();
    let moving = check_moving_manifold(&osc, &x, &u, &psi, 1.3, &[0.37], &[]);
    let bitwise = free.to_bits() == moving.to_bits();

    let pass = moving_residual <= 1e-6
        && rec.residual <= 1e-6
        && left.residual <= 1e-6
        && (left.gamma[0] - 3.0).abs() <= 1e-6
        && bitwise;
    report(
        10,
        pass,
        &format!(
            "moving-target residual {moving_residual:.3e} (tol 1e-6), endpoint recovery residual \
             {:.3e}, left residual {:.3e} with gamma = {:.6}, zero-partial reduction bitwise: {bitwise}",
            rec.residual, left.residual, left.gamma[0]
        ),
    );
}

/// The switch detector is part of criterion 2; exercise it on the analytic
/// control as well so failures localize.
#[test]
fn switch_detector_on_analytic_control() {
    let analytic = analytic_oscillator();
    let grid = analytic.sampled_control(200).unwrap();
    let switches = detect_switch(&grid, 0.5);
    assert_eq!(switches.len(), 1);
    assert!((switches[0] - analytic.tau).abs() <= analytic.t_star / 200.0);
}

/// Initialization robustness (not an acceptance gate): a constant-zero
/// initial control still reaches the analytic optimum within 2e-3.
#[test]
fn solver_recovers_from_constant_initialization() {
    use penalight::solver::{solve_time_optimal, InitPattern};
    let spec = builtin_problem("oscillator").unwrap();
    let analytic = analytic_oscillator();
    let opts = SolveOptions { init_pattern: InitPattern::Constant(0.0), ..Default::default() };
    let sol = solve_time_optimal(&spec, &opts).unwrap();
    assert!(
        (sol.t_opt - analytic.t_star).abs() <= 2e-3,
        "T_opt = {} from constant initialization",
        sol.t_opt
    );
    assert!(sol.terminal_violation <= 1e-3);
}
