//! Direct transcription solver: tanh-parameterized piecewise-constant
//! control, penalized terminal objective, a Nelder–Mead simplex minimizer
//! with incumbent-centered restarts, and the penalty-weight sweep used to
//! probe exactness empirically.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::discretize::{integrate_rk4, ControlGrid, Trajectory};
use crate::error::{Error, Result};
use crate::model::{ProblemSpec, TimeMode};
use crate::penalty::{phi_term, TOL_ACTIVE};

/// Objective value substituted for diverged integrations and out-of-range
/// terminal times; keeps the simplex objective total.
pub const SENTINEL_OBJECTIVE: f64 = 1e30;

/// Sweep feasibility threshold: the empirical exactness threshold is the
/// smallest penalty weight whose solved violation stays below this.
pub const FEAS_TOL: f64 = 1e-3;

/// Initial control pattern for the solver.
#[derive(Debug, Clone, PartialEq)]
pub enum InitPattern {
    /// u = -1 on the first third of the intervals, +1 after (theta = ∓0.5).
    BangBangThirds,
    /// Constant control value, broadcast across components.
    Constant(f64),
    /// Explicit theta values, row-major (N×m entries).
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub n_intervals: usize,
    /// Penalty weight on the terminal constraint defect.
    pub rho: f64,
    pub tanh_slope: f64,
    pub t_init: f64,
    pub init_pattern: InitPattern,
    /// Simplex iteration budget per run; 0 selects 200 per decision variable.
    pub max_iters: usize,
    pub f_tol: f64,
    pub x_tol: f64,
    pub max_restarts: usize,
    /// Seed for restart-simplex jitter.
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            n_intervals: 200,
            rho: 100.0,
            tanh_slope: 10.0,
            t_init: 3.5,
            init_pattern: InitPattern::BangBangThirds,
            max_iters: 0,
            f_tol: 1e-8,
            x_tol: 1e-8,
            max_restarts: 10,
            seed: 0,
        }
    }
}

/// Solver output at the incumbent point.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub t_opt: f64,
    /// Flattened theta values, row-major (N×m).
    pub theta: Vec<f64>,
    pub control: ControlGrid,
    pub trajectory: Trajectory,
    /// Penalized objective at the incumbent.
    pub objective: f64,
    /// Unpenalized terminal cost at the incumbent.
    pub cost: f64,
    /// Terminal penalty, clamped at zero.
    pub terminal_violation: f64,
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
    /// Best penalized objective after each simplex run; non-increasing.
    pub objective_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadOptions {
    pub max_iters: usize,
    pub f_tol: f64,
    pub x_tol: f64,
    /// Per-coordinate initial simplex step factor: the offset along axis i
    /// is `initial_scale * (1 + |x0_i|)`.
    pub initial_scale: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions { max_iters: 0, f_tol: 1e-8, x_tol: 1e-8, initial_scale: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x_best: Vec<f64>,
    pub f_best: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder–Mead simplex minimization with reflection 1, expansion 2,
/// contraction 0.5 and shrink 0.5. Terminates when both the objective
/// spread and the vertex diameter of the simplex fall below their
/// tolerances, or at the iteration cap (returning best-so-far with
/// `converged = false`). The objective must be total; use a large finite
/// sentinel for failed evaluations.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut objective: F,
    x0: &[f64],
    opts: &NelderMeadOptions,
) -> NelderMeadResult {
    let dim = x0.len();
    assert!(dim >= 1, "objective dimension must be at least 1");
    let max_iters = if opts.max_iters == 0 { 200 * dim } else { opts.max_iters };

    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        objective(x)
    };

    // Vertices paired with values, kept sorted ascending by value.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let f0 = eval(x0);
    simplex.push((x0.to_vec(), f0));
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += opts.initial_scale * (1.0 + x0[i].abs());
        let fv = eval(&v);
        simplex.push((v, fv));
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));

    let mut iterations = 0usize;
    let mut converged = false;
    while iterations < max_iters {
        let f_spread = simplex[dim].1 - simplex[0].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(v, _)| {
                v.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max);
        if f_spread < opts.f_tol && diameter < opts.x_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..dim)
            .map(|i| simplex[..dim].iter().map(|(v, _)| v[i]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].0.clone();
        let f_worst = simplex[dim].1;
        let f_best = simplex[0].1;
        let f_second_worst = simplex[dim - 1].1;

        let along = |coef: f64| -> Vec<f64> {
            (0..dim).map(|i| centroid[i] + coef * (centroid[i] - worst[i])).collect()
        };
        let reflected = along(1.0);
        let f_reflected = eval(&reflected);

        let replacement = if f_reflected < f_best {
            let expanded = along(2.0);
            let f_expanded = eval(&expanded);
            if f_expanded < f_reflected {
                Some((expanded, f_expanded))
            } else {
                Some((reflected, f_reflected))
            }
        } else if f_reflected < f_second_worst {
            Some((reflected, f_reflected))
        } else if f_reflected < f_worst {
            let contracted = along(0.5);
            let f_contracted = eval(&contracted);
            if f_contracted <= f_reflected {
                Some((contracted, f_contracted))
            } else {
                None
            }
        } else {
            let contracted = along(-0.5);
            let f_contracted = eval(&contracted);
            if f_contracted < f_worst {
                Some((contracted, f_contracted))
            } else {
                None
            }
        };

        match replacement {
            Some(vertex) => {
                simplex[dim] = vertex;
            }
            None => {
                // Shrink toward the best vertex.
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    for (xi, bi) in entry.0.iter_mut().zip(&best) {
                        *xi = bi + 0.5 * (*xi - bi);
                    }
                    entry.1 = eval(&entry.0);
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    }

    let (x_best, f_best) = simplex.swap_remove(0);
    NelderMeadResult { x_best, f_best, iterations, evaluations, converged }
}

/// Map unconstrained theta values into the control box:
/// `u = lo + (hi - lo) (tanh(slope θ) + 1) / 2`, strictly interior for
/// finite theta. For the box [-1, 1] this is exactly `tanh(slope θ)`.
pub fn parameterize_control(
    theta: &DMatrix<f64>,
    spec: &ProblemSpec,
    opts: &SolveOptions,
    t0: f64,
    t_final: f64,
) -> Result<ControlGrid> {
    if theta.ncols() != spec.control_dim {
        return Err(Error::InvalidArgument(format!(
            "theta has {} columns, spec has control_dim {}",
            theta.ncols(),
            spec.control_dim
        )));
    }
    // tanh saturates to exactly +-1 in f64 for large arguments; pull it one
    // ulp inside so the image stays strictly interior for all finite theta.
    let interior = 1.0 - f64::EPSILON;
    let values = DMatrix::from_fn(theta.nrows(), theta.ncols(), |k, i| {
        let (lo, hi) = (spec.control_lower[i], spec.control_upper[i]);
        let s = (opts.tanh_slope * theta[(k, i)]).tanh().clamp(-interior, interior);
        lo + (hi - lo) * (s + 1.0) / 2.0
    });
    ControlGrid::new(t0, t_final, values)
}

/// Theta values realizing an initial pattern.
fn initial_theta(spec: &ProblemSpec, opts: &SolveOptions) -> Result<Vec<f64>> {
    let n = opts.n_intervals;
    let m = spec.control_dim;
    match &opts.init_pattern {
        InitPattern::BangBangThirds => Ok((0..n * m)
            .map(|idx| {
                let k = idx / m;
                if (k as f64) < n as f64 / 3.0 {
                    -0.5
                } else {
                    0.5
                }
            })
            .collect()),
        InitPattern::Constant(u) => {
            let mut theta = Vec::with_capacity(n * m);
            for _ in 0..n {
                for i in 0..m {
                    let (lo, hi) = (spec.control_lower[i], spec.control_upper[i]);
                    if hi <= lo {
                        theta.push(0.0);
                        continue;
                    }
                    // Invert the tanh map, clamped strictly inside the box.
                    let s = ((2.0 * (u - lo) / (hi - lo)) - 1.0).clamp(-1.0 + 1e-12, 1.0 - 1e-12);
                    theta.push(s.atanh() / opts.tanh_slope);
                }
            }
            Ok(theta)
        }
        InitPattern::Custom(values) => {
            if values.len() != n * m {
                return Err(Error::InvalidArgument(format!(
                    "custom init pattern has {} entries, expected {}",
                    values.len(),
                    n * m
                )));
            }
            Ok(values.clone())
        }
    }
}

fn validate_options(spec: &ProblemSpec, opts: &SolveOptions) -> Result<()> {
    if opts.n_intervals == 0 {
        return Err(Error::InvalidArgument("n_intervals must be at least 1".into()));
    }
    if opts.rho < 0.0 {
        return Err(Error::InvalidArgument(format!("rho must be >= 0, got {}", opts.rho)));
    }
    if !opts.t_init.is_finite() || opts.t_init <= spec.t0 {
        return Err(Error::InvalidArgument(format!(
            "t_init must exceed t0 (t_init = {}, t0 = {})",
            opts.t_init, spec.t0
        )));
    }
    Ok(())
}

/// Compass search over the theta block with a nested one-dimensional
/// re-optimization of the terminal time at every probe.
///
/// Migrating one interval of a near-saturated control across its span only
/// pays off together with a compensating change of `T`; simplex runs stall
/// on that coupled valley, single-coordinate probes with `T` re-optimized
/// walk it.
fn structure_polish<F: Fn(&[f64]) -> f64>(
    objective: &F,
    x0: &[f64],
    f0: f64,
    opts: &SolveOptions,
) -> (Vec<f64>, f64) {
    let saturation_span = 5.0 / opts.tanh_slope;
    let steps = [2.0 * saturation_span, saturation_span, 0.5 * saturation_span];
    let eval_budget = 2_000_000usize;
    let mut evals = 0usize;

    let mut x = x0.to_vec();
    let mut fx = f0;
    for &step in &steps {
        loop {
            let mut improved = false;
            for i in 1..x.len() {
                for dir in [1.0, -1.0] {
                    loop {
                        if evals >= eval_budget {
                            return (x, fx);
                        }
                        let mut y = x.clone();
                        y[i] += dir * step;
                        let inner = |t: &[f64]| {
                            let mut z = y.clone();
                            z[0] = t[0];
                            objective(&z)
                        };
                        let r = nelder_mead(
                            inner,
                            &[y[0]],
                            &NelderMeadOptions {
                                max_iters: 80,
                                f_tol: 1e-12,
                                x_tol: 1e-10,
                                initial_scale: 0.02,
                            },
                        );
                        evals += r.evaluations;
                        if r.f_best < fx - 1e-14 {
                            y[0] = r.x_best[0];
                            x = y;
                            fx = r.f_best;
                            improved = true;
                        } else {
                            break;
                        }
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
    (x, fx)
}

/// Penalized objective of a decision vector `(T, θ…)`; total by sentinel.
fn decision_objective(spec: &ProblemSpec, opts: &SolveOptions, x: &[f64]) -> f64 {
    let t_final = x[0];
    if !t_final.is_finite() || t_final <= spec.t0 + 1e-6 {
        return SENTINEL_OBJECTIVE;
    }
    let n = opts.n_intervals;
    let m = spec.control_dim;
    let theta = DMatrix::from_fn(n, m, |k, i| x[1 + k * m + i]);
    let grid = match parameterize_control(&theta, spec, opts, spec.t0, t_final) {
        Ok(g) => g,
        Err(_) => return SENTINEL_OBJECTIVE,
    };
    let traj = match integrate_rk4(spec, &grid) {
        Ok(t) => t,
        Err(_) => return SENTINEL_OBJECTIVE,
    };
    let x_terminal = traj.final_state();
    let cost = (spec.terminal_cost.value)(&x_terminal, t_final);
    let (term, _, _) = phi_term(spec, &x_terminal, t_final, TOL_ACTIVE);
    let value = cost + opts.rho * term.max(0.0);
    if value.is_finite() {
        value
    } else {
        SENTINEL_OBJECTIVE
    }
}

/// Solve a free-terminal-time problem by direct transcription: the decision
/// vector stacks the terminal time and the theta parameterization, the
/// objective is the terminal cost plus `rho` times the clamped terminal
/// penalty, and stagnating simplex runs restart from a fresh small simplex
/// around the incumbent.
pub fn solve_time_optimal(spec: &ProblemSpec, opts: &SolveOptions) -> Result<SolveResult> {
    if spec.time_mode != TimeMode::FreeT {
        return Err(Error::Misuse("direct solve expects a free-terminal-time problem".into()));
    }
    if spec.n_terminal_constraints() == 0 {
        return Err(Error::Misuse("direct solve expects terminal constraints".into()));
    }
    validate_options(spec, opts)?;

    let n = opts.n_intervals;
    let m = spec.control_dim;
    let dim = 1 + n * m;
    let mut x_init = Vec::with_capacity(dim);
    x_init.push(opts.t_init);
    x_init.extend(initial_theta(spec, opts)?);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let per_run_iters = if opts.max_iters == 0 { 200 * dim } else { opts.max_iters };

    let objective = |x: &[f64]| decision_objective(spec, opts, x);

    let mut best_x = x_init.clone();
    let mut best_f = objective(&best_x);
    let mut total_iterations = 0usize;
    let mut restarts_used = 0usize;
    let mut converged = false;
    let mut history = Vec::new();

    for run in 0..=opts.max_restarts {
        let nm_opts = NelderMeadOptions {
            max_iters: per_run_iters,
            f_tol: opts.f_tol,
            x_tol: opts.x_tol,
            initial_scale: if run == 0 {
                0.05
            } else {
                // Fresh small simplex around the incumbent, mildly jittered
                // so repeated restarts explore distinct subspaces.
                0.01 * (1.0 + 0.3 * rng.random_range(-1.0..1.0))
            },
        };
        let result = nelder_mead(objective, &best_x, &nm_opts);
        total_iterations += result.iterations;
        let improvement = best_f - result.f_best;
        if result.f_best < best_f {
            best_f = result.f_best;
            best_x = result.x_best;
        }
        history.push(best_f);
        if run > 0 {
            restarts_used += 1;
        }
        if run == 0 && best_f < SENTINEL_OBJECTIVE {
            let (px, pf) = structure_polish(&objective, &best_x, best_f, opts);
            if pf < best_f {
                best_f = pf;
                best_x = px;
            }
            history.push(best_f);
        }
        if result.converged && improvement <= opts.f_tol * (1.0 + best_f.abs()) && run > 0 {
            converged = true;
            break;
        }
        if run == opts.max_restarts {
            converged = result.converged;
        }
    }

    if best_f >= SENTINEL_OBJECTIVE {
        return Err(Error::Divergence { node: 0 });
    }

    let t_opt = best_x[0];
    let theta: Vec<f64> = best_x[1..].to_vec();
    let theta_mat = DMatrix::from_fn(n, m, |k, i| theta[k * m + i]);
    let control = parameterize_control(&theta_mat, spec, opts, spec.t0, t_opt)?;
    let trajectory = integrate_rk4(spec, &control)?;
    let x_terminal = trajectory.final_state();
    let cost = (spec.terminal_cost.value)(&x_terminal, t_opt);
    let (term, _, _) = phi_term(spec, &x_terminal, t_opt, TOL_ACTIVE);

    Ok(SolveResult {
        t_opt,
        theta,
        control,
        trajectory,
        objective: best_f,
        cost,
        terminal_violation: term.max(0.0),
        iterations: total_iterations,
        restarts: restarts_used,
        converged,
        objective_history: history,
    })
}

/// One row of the penalty-weight sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    /// Unpenalized terminal cost at the solved point.
    pub objective: f64,
    /// Penalized objective at the solved point.
    pub penalized: f64,
    pub terminal_violation: f64,
    pub converged: bool,
}

/// Sweep result with the empirical exactness threshold: the smallest swept
/// weight whose solved violation is at most [`FEAS_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub exactness_threshold: Option<f64>,
}

/// Re-solve the problem once per penalty weight and tabulate cost and
/// terminal violation against the weight.
pub fn exactness_sweep(
    spec: &ProblemSpec,
    opts: &SolveOptions,
    lambdas: &[f64],
) -> Result<SweepTable> {
    if lambdas.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one penalty weight".into()));
    }
    if lambdas.iter().any(|&l| l < 0.0 || !l.is_finite()) {
        return Err(Error::InvalidArgument("sweep weights must be finite and >= 0".into()));
    }
    if lambdas.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("sweep weights must be sorted ascending".into()));
    }
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let mut run_opts = opts.clone();
        run_opts.rho = lambda;
        let sol = solve_time_optimal(spec, &run_opts)?;
        rows.push(SweepRow {
            lambda,
            objective: sol.cost,
            penalized: sol.objective,
            terminal_violation: sol.terminal_violation,
            converged: sol.converged,
        });
    }
    let exactness_threshold =
        rows.iter().find(|r| r.terminal_violation <= FEAS_TOL).map(|r| r.lambda);
    Ok(SweepTable { rows, exactness_threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_problem;
    use approx::assert_relative_eq;

    #[test]
    fn nelder_mead_quadratic() {
        let res = nelder_mead(
            |x| (x[0] - 1.0).powi(2) + (x[1] - 2.0).powi(2),
            &[0.0, 0.0],
            &NelderMeadOptions::default(),
        );
        assert!(res.converged);
        assert!((res.x_best[0] - 1.0).abs() < 1e-4);
        assert!((res.x_best[1] - 2.0).abs() < 1e-4);
    }

    #[test]
    fn nelder_mead_nonsmooth_abs() {
        let res = nelder_mead(|x| x[0].abs(), &[3.0], &NelderMeadOptions::default());
        assert!(res.f_best <= 1e-4, "f_best = {}", res.f_best);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let rosenbrock =
            |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let res = nelder_mead(
            rosenbrock,
            &[-1.2, 1.0],
            &NelderMeadOptions { max_iters: 500, ..Default::default() },
        );
        assert!(res.f_best <= 1e-6, "f_best = {} after {} iters", res.f_best, res.iterations);
    }

    #[test]
    fn nelder_mead_never_worse_than_initial_simplex() {
        let noisy = |x: &[f64]| (x[0] * 7.3).sin() + 0.1 * x[0] * x[0];
        let opts = NelderMeadOptions { max_iters: 60, ..Default::default() };
        let x0 = [2.0];
        let res = nelder_mead(noisy, &x0, &opts);
        let mut initial_best = noisy(&x0);
        let mut v = x0.to_vec();
        v[0] += opts.initial_scale * (1.0 + x0[0].abs());
        initial_best = initial_best.min(noisy(&v));
        assert!(res.f_best <= initial_best);
    }

    #[test]
    fn parameterization_basics() {
        let spec = builtin_problem("oscillator").unwrap();
        let opts = SolveOptions::default();
        let theta = DMatrix::from_element(4, 1, 0.0);
        let grid = parameterize_control(&theta, &spec, &opts, 0.0, 1.0).unwrap();
        assert!(grid.values().iter().all(|&u| u == 0.0));

        let theta = DMatrix::from_element(4, 1, 100.0);
        let grid = parameterize_control(&theta, &spec, &opts, 0.0, 1.0).unwrap();
        assert!(grid.values().iter().all(|&u| u < 1.0 && u > 1.0 - 1e-14));

        let theta = DMatrix::from_element(1, 1, 0.2);
        let grid = parameterize_control(&theta, &spec, &opts, 0.0, 1.0).unwrap();
        assert_relative_eq!(grid.values()[(0, 0)], 2.0f64.tanh(), epsilon = 1e-15);
    }

    #[test]
    fn parameterization_stays_strictly_interior() {
        let spec = builtin_problem("oscillator").unwrap();
        let opts = SolveOptions::default();
        for t in [-1e6, -3.0, 0.0, 0.7, 44.0] {
            let theta = DMatrix::from_element(3, 1, t);
            let grid = parameterize_control(&theta, &spec, &opts, 0.0, 1.0).unwrap();
            assert!(grid.values().iter().all(|&u| u > -1.0 && u < 1.0));
        }
    }

    #[test]
    fn initial_theta_patterns() {
        let spec = builtin_problem("oscillator").unwrap();
        let mut opts = SolveOptions { n_intervals: 9, ..Default::default() };
        let theta = initial_theta(&spec, &opts).unwrap();
        assert_eq!(&theta[..3], &[-0.5, -0.5, -0.5]);
        assert!(theta[3..].iter().all(|&t| t == 0.5));

        opts.init_pattern = InitPattern::Constant(0.0);
        let theta = initial_theta(&spec, &opts).unwrap();
        assert!(theta.iter().all(|&t| t == 0.0));

        opts.init_pattern = InitPattern::Custom(vec![0.0; 5]);
        assert!(matches!(initial_theta(&spec, &opts), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn solve_rejects_fixed_time_and_bad_options() {
        let mut spec = builtin_problem("oscillator").unwrap();
        spec.time_mode = TimeMode::FixedT(1.0);
        assert!(matches!(
            solve_time_optimal(&spec, &SolveOptions::default()),
            Err(Error::Misuse(_))
        ));

        let spec = builtin_problem("oscillator").unwrap();
        let opts = SolveOptions { n_intervals: 0, ..Default::default() };
        assert!(matches!(solve_time_optimal(&spec, &opts), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn unpenalized_solve_collapses_to_initial_time() {
        let spec = builtin_problem("oscillator").unwrap();
        let opts = SolveOptions {
            n_intervals: 40,
            rho: 0.0,
            max_restarts: 2,
            ..Default::default()
        };
        let sol = solve_time_optimal(&spec, &opts).unwrap();
        assert!(sol.t_opt < 0.1, "T_opt = {}", sol.t_opt);
    }

    #[test]
    fn objective_history_is_non_increasing() {
        let spec = builtin_problem("oscillator").unwrap();
        let opts = SolveOptions { n_intervals: 24, max_restarts: 3, ..Default::default() };
        let sol = solve_time_optimal(&spec, &opts).unwrap();
        assert!(sol.objective_history.windows(2).all(|w| w[1] <= w[0]));
        assert!(sol.objective <= sol.objective_history[0]);
    }

    #[test]
    fn sweep_validates_weights() {
        let spec = builtin_problem("oscillator").unwrap();
        let opts = SolveOptions::default();
        assert!(matches!(exactness_sweep(&spec, &opts, &[]), Err(Error::InvalidArgument(_))));
        assert!(matches!(
            exactness_sweep(&spec, &opts, &[10.0, 1.0]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            exactness_sweep(&spec, &opts, &[-1.0]),
            Err(Error::InvalidArgument(_))
        ));
    }
}
