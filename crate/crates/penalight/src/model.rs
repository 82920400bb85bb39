//! Problem data: Mayer-form optimal control specification, validation, and
//! the registry of built-in benchmark problems.
//!
//! A [`ProblemSpec`] bundles the dynamics `f(x, u, t)` with its Jacobians,
//! the terminal cost, terminal equality/inequality constraints, the control
//! box, and the endpoint regime. All callbacks must be pure; a spec is
//! immutable after construction and safe to share across threads.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Right-hand side `f(x, u, t) -> dx/dt`.
pub type DynamicsFn = dyn Fn(&DVector<f64>, &DVector<f64>, f64) -> DVector<f64> + Send + Sync;
/// Jacobian of the dynamics with respect to `x` (n×n) or `u` (n×m).
pub type JacobianFn = dyn Fn(&DVector<f64>, &DVector<f64>, f64) -> DMatrix<f64> + Send + Sync;
/// Scalar endpoint function `(x_T, T) -> value`.
pub type EndpointFn = dyn Fn(&DVector<f64>, f64) -> f64 + Send + Sync;
/// Endpoint gradient `(x_T, T) -> d value / d x`.
pub type EndpointGradFn = dyn Fn(&DVector<f64>, f64) -> DVector<f64> + Send + Sync;

/// Terminal cost with spatial gradient and explicit time partial.
pub struct TerminalCost {
    pub value: Box<EndpointFn>,
    pub grad_x: Box<EndpointGradFn>,
    pub partial_t: Box<EndpointFn>,
}

impl TerminalCost {
    /// Time-independent terminal cost; the time partial defaults to zero.
    pub fn new(
        value: impl Fn(&DVector<f64>, f64) -> f64 + Send + Sync + 'static,
        grad_x: impl Fn(&DVector<f64>, f64) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        TerminalCost {
            value: Box::new(value),
            grad_x: Box::new(grad_x),
            partial_t: Box::new(|_, _| 0.0),
        }
    }

    pub fn with_partial_t(
        mut self,
        partial_t: impl Fn(&DVector<f64>, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.partial_t = Box::new(partial_t);
        self
    }
}

/// One terminal constraint `Φ(x_T, T)`, used either as an equality
/// (`Φ = 0`) or an inequality (`Φ ≤ 0`) depending on which list of the
/// [`ProblemSpec`] it sits in.
///
/// `smooth = false` marks constraints whose gradient is undefined at kinks
/// (e.g. `|x| - 2`). Such constraints may still supply a piecewise gradient
/// callback returning a one-sided value; without one, subdifferential and
/// multiplier computations at active points fail with
/// [`Error::Unsupported`].
pub struct TerminalConstraint {
    pub value: Box<EndpointFn>,
    pub grad_x: Option<Box<EndpointGradFn>>,
    pub partial_t: Option<Box<EndpointFn>>,
    pub smooth: bool,
}

impl TerminalConstraint {
    /// Smooth, time-independent constraint.
    pub fn smooth(
        value: impl Fn(&DVector<f64>, f64) -> f64 + Send + Sync + 'static,
        grad_x: impl Fn(&DVector<f64>, f64) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        TerminalConstraint {
            value: Box::new(value),
            grad_x: Some(Box::new(grad_x)),
            partial_t: None,
            smooth: true,
        }
    }

    /// Smooth constraint on a moving manifold (explicit time dependence).
    pub fn smooth_moving(
        value: impl Fn(&DVector<f64>, f64) -> f64 + Send + Sync + 'static,
        grad_x: impl Fn(&DVector<f64>, f64) -> DVector<f64> + Send + Sync + 'static,
        partial_t: impl Fn(&DVector<f64>, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        TerminalConstraint {
            value: Box::new(value),
            grad_x: Some(Box::new(grad_x)),
            partial_t: Some(Box::new(partial_t)),
            smooth: true,
        }
    }

    /// Nonsmooth constraint with an optional piecewise (one-sided) gradient.
    pub fn nonsmooth(
        value: impl Fn(&DVector<f64>, f64) -> f64 + Send + Sync + 'static,
        piecewise_grad: Option<Box<EndpointGradFn>>,
    ) -> Self {
        TerminalConstraint {
            value: Box::new(value),
            grad_x: piecewise_grad,
            partial_t: None,
            smooth: false,
        }
    }

    pub fn value(&self, x: &DVector<f64>, t: f64) -> f64 {
        (self.value)(x, t)
    }

    /// Gradient (or one-sided gradient for nonsmooth constraints).
    pub fn grad(&self, x: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        match &self.grad_x {
            Some(g) => Ok(g(x, t)),
            None => Err(Error::Unsupported(
                "active nonsmooth constraint has no piecewise gradient data".into(),
            )),
        }
    }

    /// Explicit time partial; zero when omitted.
    pub fn time_partial(&self, x: &DVector<f64>, t: f64) -> f64 {
        match &self.partial_t {
            Some(p) => p(x, t),
            None => 0.0,
        }
    }
}

/// Terminal-time regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeMode {
    FixedT(f64),
    FreeT,
}

/// Constraints on the initial state, for problems whose left endpoint is
/// not pinned to a single point.
pub struct LeftEndpoint {
    pub eq_constraints: Vec<TerminalConstraint>,
    pub ineq_constraints: Vec<TerminalConstraint>,
    pub free_t0: bool,
}

/// A Mayer-form optimal control problem.
pub struct ProblemSpec {
    pub state_dim: usize,
    pub control_dim: usize,
    pub dynamics: Box<DynamicsFn>,
    pub dynamics_jac_x: Box<JacobianFn>,
    pub dynamics_jac_u: Box<JacobianFn>,
    pub terminal_cost: TerminalCost,
    pub eq_constraints: Vec<TerminalConstraint>,
    pub ineq_constraints: Vec<TerminalConstraint>,
    pub control_lower: DVector<f64>,
    pub control_upper: DVector<f64>,
    pub t0: f64,
    pub x0: DVector<f64>,
    pub time_mode: TimeMode,
    pub left_endpoint: Option<LeftEndpoint>,
}

impl std::fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("state_dim", &self.state_dim)
            .field("control_dim", &self.control_dim)
            .field("n_eq", &self.eq_constraints.len())
            .field("n_ineq", &self.ineq_constraints.len())
            .field("t0", &self.t0)
            .field("x0", &self.x0)
            .field("time_mode", &self.time_mode)
            .field("has_left_endpoint", &self.left_endpoint.is_some())
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    pub fn n_terminal_constraints(&self) -> usize {
        self.eq_constraints.len() + self.ineq_constraints.len()
    }

    /// Midpoint of the control box, used as the evaluation control where an
    /// affine-in-control problem makes the choice irrelevant.
    pub fn control_midpoint(&self) -> DVector<f64> {
        (&self.control_lower + &self.control_upper) * 0.5
    }
}

/// Outcome of a single validation check.
#[derive(Debug, Clone)]
pub struct ValidationCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Collected validation results; never aborts on failure.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ValidationCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(ValidationCheck { name: name.to_string(), passed, detail });
    }
}

/// Relative tolerance for Jacobian / gradient agreement with central
/// finite differences.
pub const JACOBIAN_FD_TOL: f64 = 1e-5;

const N_PROBES: usize = 10;
const PROBE_SEED: u64 = 0x9E37_79B9_7F4A_7C15;

/// Checks dimension consistency and finite-difference agreement of every
/// supplied derivative callback at random probe points. Failures are
/// recorded as report entries; the function itself never errors.
pub fn validate_problem(spec: &ProblemSpec) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = spec.state_dim;
    let m = spec.control_dim;

    report.push("state_dim positive", n >= 1, format!("n = {n}"));
    report.push("control_dim positive", m >= 1, format!("m = {m}"));
    report.push(
        "initial state length",
        spec.x0.len() == n,
        format!("x0 has {} entries, expected {n}", spec.x0.len()),
    );
    report.push(
        "control box lengths",
        spec.control_lower.len() == m && spec.control_upper.len() == m,
        format!(
            "lower/upper have {}/{} entries, expected {m}",
            spec.control_lower.len(),
            spec.control_upper.len()
        ),
    );
    let box_ordered = spec.control_lower.len() == spec.control_upper.len()
        && spec
            .control_lower
            .iter()
            .zip(spec.control_upper.iter())
            .all(|(lo, hi)| lo <= hi);
    report.push("control box ordering", box_ordered, "lower <= upper componentwise".into());

    let p = spec.n_terminal_constraints();
    report.push(
        "terminal constraint count",
        p <= n + 1,
        format!("|E| + |I| = {p}, bound n + 1 = {}", n + 1),
    );
    if let TimeMode::FixedT(t_final) = spec.time_mode {
        report.push(
            "fixed terminal time ordering",
            t_final > spec.t0,
            format!("T = {t_final}, t0 = {}", spec.t0),
        );
    }

    if !report.all_passed() {
        // Dimension errors make callback probing unsafe; stop here.
        return report;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let probes: Vec<(DVector<f64>, DVector<f64>, f64)> = (0..N_PROBES)
        .map(|_| {
            let x = DVector::from_fn(n, |i, _| spec.x0[i] + rng.random_range(-1.0..1.0));
            let u = DVector::from_fn(m, |i, _| {
                let (lo, hi) = (spec.control_lower[i], spec.control_upper[i]);
                lo + rng.random_range(0.0..1.0) * (hi - lo)
            });
            let horizon = match spec.time_mode {
                TimeMode::FixedT(t_final) => t_final - spec.t0,
                TimeMode::FreeT => 1.0,
            };
            let t = spec.t0 + rng.random_range(0.0..1.0) * horizon;
            (x, u, t)
        })
        .collect();

    let (x0p, u0p, t0p) = &probes[0];
    let f0 = (spec.dynamics)(x0p, u0p, *t0p);
    report.push(
        "dynamics output dimension",
        f0.len() == n,
        format!("f returned {} entries, expected {n}", f0.len()),
    );
    let jx0 = (spec.dynamics_jac_x)(x0p, u0p, *t0p);
    report.push(
        "state Jacobian shape",
        jx0.shape() == (n, n),
        format!("f_x returned {:?}, expected ({n}, {n})", jx0.shape()),
    );
    let ju0 = (spec.dynamics_jac_u)(x0p, u0p, *t0p);
    report.push(
        "control Jacobian shape",
        ju0.shape() == (n, m),
        format!("f_u returned {:?}, expected ({n}, {m})", ju0.shape()),
    );
    if !report.all_passed() {
        return report;
    }

    let mut max_err_x: f64 = 0.0;
    let mut max_err_u: f64 = 0.0;
    for (x, u, t) in &probes {
        let jx = (spec.dynamics_jac_x)(x, u, *t);
        let fd_x = fd_jacobian(n, x, |xp| (spec.dynamics)(xp, u, *t));
        max_err_x = max_err_x.max(rel_matrix_err(&jx, &fd_x));
        let ju = (spec.dynamics_jac_u)(x, u, *t);
        let fd_u = fd_jacobian(m, u, |up| (spec.dynamics)(x, up, *t));
        max_err_u = max_err_u.max(rel_matrix_err(&ju, &fd_u));
    }
    report.push(
        "state Jacobian finite differences",
        max_err_x <= JACOBIAN_FD_TOL,
        format!("max relative error {max_err_x:.3e} (tol {JACOBIAN_FD_TOL:.0e})"),
    );
    report.push(
        "control Jacobian finite differences",
        max_err_u <= JACOBIAN_FD_TOL,
        format!("max relative error {max_err_u:.3e} (tol {JACOBIAN_FD_TOL:.0e})"),
    );

    let cost_err: f64 = probes
        .iter()
        .map(|(x, _, t)| {
            let g = (spec.terminal_cost.grad_x)(x, *t);
            let fd = fd_gradient(n, x, |xp| (spec.terminal_cost.value)(xp, *t));
            rel_vector_err(&g, &fd)
        })
        .fold(0.0, f64::max);
    report.push(
        "terminal cost gradient finite differences",
        cost_err <= JACOBIAN_FD_TOL,
        format!("max relative error {cost_err:.3e}"),
    );

    let check_constraints = |kind: &str, list: &[TerminalConstraint], rep: &mut ValidationReport| {
        for (k, c) in list.iter().enumerate() {
            if !c.smooth {
                rep.push(
                    &format!("{kind} constraint {k} gradient"),
                    true,
                    "nonsmooth constraint; finite-difference check skipped".into(),
                );
                continue;
            }
            let err: f64 = probes
                .iter()
                .map(|(x, _, t)| match c.grad(x, *t) {
                    Ok(g) => {
                        let fd = fd_gradient(n, x, |xp| c.value(xp, *t));
                        rel_vector_err(&g, &fd)
                    }
                    Err(_) => f64::INFINITY,
                })
                .fold(0.0, f64::max);
            rep.push(
                &format!("{kind} constraint {k} gradient"),
                err <= JACOBIAN_FD_TOL,
                format!("max relative error {err:.3e}"),
            );
        }
    };
    check_constraints("equality", &spec.eq_constraints, &mut report);
    check_constraints("inequality", &spec.ineq_constraints, &mut report);
    if let Some(le) = &spec.left_endpoint {
        check_constraints("left equality", &le.eq_constraints, &mut report);
        check_constraints("left inequality", &le.ineq_constraints, &mut report);
    }

    report
}

fn fd_jacobian(
    cols: usize,
    at: &DVector<f64>,
    f: impl Fn(&DVector<f64>) -> DVector<f64>,
) -> DMatrix<f64> {
    let base = f(at);
    let mut jac = DMatrix::zeros(base.len(), cols);
    for j in 0..cols {
        let h = 1e-6 * (1.0 + at[j].abs());
        let mut plus = at.clone();
        plus[j] += h;
        let mut minus = at.clone();
        minus[j] -= h;
        let col = (f(&plus) - f(&minus)) / (2.0 * h);
        jac.set_column(j, &col);
    }
    jac
}

fn fd_gradient(dim: usize, at: &DVector<f64>, f: impl Fn(&DVector<f64>) -> f64) -> DVector<f64> {
    DVector::from_fn(dim, |j, _| {
        let h = 1e-6 * (1.0 + at[j].abs());
        let mut plus = at.clone();
        plus[j] += h;
        let mut minus = at.clone();
        minus[j] -= h;
        (f(&plus) - f(&minus)) / (2.0 * h)
    })
}

fn rel_matrix_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs() / (1.0 + x.abs()))
        .fold(0.0, f64::max)
}

fn rel_vector_err(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs() / (1.0 + x.abs()))
        .fold(0.0, f64::max)
}

/// Names accepted by [`builtin_problem`].
pub const BUILTIN_NAMES: [&str; 3] = ["oscillator", "nonsmooth_abs", "degenerate_pair"];

/// Time-optimal harmonic oscillator in time-augmented Mayer form, with a
/// configurable start. States are (position, velocity, elapsed time):
/// x1' = x2, x2' = -x1 + u, x3' = 1, |u| <= 1, terminal condition
/// x2(T) = 0, cost x3(T), free terminal time.
pub fn oscillator_problem(x0: DVector<f64>, t0: f64) -> ProblemSpec {
    ProblemSpec {
        state_dim: 3,
        control_dim: 1,
        dynamics: Box::new(|x, u, _| DVector::from_vec(vec![x[1], -x[0] + u[0], 1.0])),
        dynamics_jac_x: Box::new(|_, _, _| {
            DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
        }),
        dynamics_jac_u: Box::new(|_, _, _| DMatrix::from_row_slice(3, 1, &[0.0, 1.0, 0.0])),
        terminal_cost: TerminalCost::new(
            |x, _| x[2],
            |_, _| DVector::from_vec(vec![0.0, 0.0, 1.0]),
        ),
        eq_constraints: vec![TerminalConstraint::smooth(
            |x, _| x[1],
            |_, _| DVector::from_vec(vec![0.0, 1.0, 0.0]),
        )],
        ineq_constraints: vec![],
        control_lower: DVector::from_element(1, -1.0),
        control_upper: DVector::from_element(1, 1.0),
        t0,
        x0,
        time_mode: TimeMode::FreeT,
        left_endpoint: None,
    }
}

fn nonsmooth_abs_problem() -> ProblemSpec {
    ProblemSpec {
        state_dim: 1,
        control_dim: 1,
        dynamics: Box::new(|_, u, _| DVector::from_element(1, u[0])),
        dynamics_jac_x: Box::new(|_, _, _| DMatrix::zeros(1, 1)),
        dynamics_jac_u: Box::new(|_, _, _| DMatrix::from_element(1, 1, 1.0)),
        terminal_cost: TerminalCost::new(|_, t| t, |_, _| DVector::zeros(1))
            .with_partial_t(|_, _| 1.0),
        eq_constraints: vec![TerminalConstraint::nonsmooth(
            |x, _| x[0].abs() - 2.0,
            // One-sided gradient of |x| - 2; takes the right branch at the kink.
            Some(Box::new(|x: &DVector<f64>, _| {
                DVector::from_element(1, if x[0] >= 0.0 { 1.0 } else { -1.0 })
            })),
        )],
        ineq_constraints: vec![],
        control_lower: DVector::from_element(1, -1.0),
        control_upper: DVector::from_element(1, 1.0),
        t0: 0.0,
        x0: DVector::zeros(1),
        time_mode: TimeMode::FreeT,
        left_endpoint: None,
    }
}

/// Two equality constraints pinning the same coordinate from opposite
/// sides (gradients (1,0) and (-1,0)). The constraints are mutually
/// inconsistent and their signed-gradient hull contains the origin at
/// equal-violation points; used to exercise separation-condition failure.
fn degenerate_pair_problem() -> ProblemSpec {
    ProblemSpec {
        state_dim: 2,
        control_dim: 2,
        dynamics: Box::new(|_, u, _| u.clone()),
        dynamics_jac_x: Box::new(|_, _, _| DMatrix::zeros(2, 2)),
        dynamics_jac_u: Box::new(|_, _, _| DMatrix::identity(2, 2)),
        terminal_cost: TerminalCost::new(|_, t| t, |_, _| DVector::zeros(2))
            .with_partial_t(|_, _| 1.0),
        eq_constraints: vec![
            TerminalConstraint::smooth(
                |x, _| x[0] + 0.5,
                |_, _| DVector::from_vec(vec![1.0, 0.0]),
            ),
            TerminalConstraint::smooth(
                |x, _| 0.5 - x[0],
                |_, _| DVector::from_vec(vec![-1.0, 0.0]),
            ),
        ],
        ineq_constraints: vec![],
        control_lower: DVector::from_element(2, -1.0),
        control_upper: DVector::from_element(2, 1.0),
        t0: 0.0,
        x0: DVector::zeros(2),
        time_mode: TimeMode::FreeT,
        left_endpoint: None,
    }
}

/// Look up a built-in benchmark problem by name.
pub fn builtin_problem(name: &str) -> Result<ProblemSpec> {
    match name {
        "oscillator" => Ok(oscillator_problem(DVector::from_vec(vec![2.0, 0.0, 0.0]), 0.0)),
        "nonsmooth_abs" => Ok(nonsmooth_abs_problem()),
        "degenerate_pair" => Ok(degenerate_pair_problem()),
        _ => Err(Error::UnknownProblem {
            name: name.to_string(),
            known: BUILTIN_NAMES.iter().map(|s| s.to_string()).collect(),
        }),
    }
}

/// Known admissible (or, for the degenerate pair, representative) terminal
/// points for each built-in, used to seed separation-condition probes.
pub fn builtin_reference_endpoints(name: &str) -> Result<Vec<(DVector<f64>, f64)>> {
    match name {
        "oscillator" => {
            let tau = (2.0f64 / 3.0).acos();
            let t_star = tau + std::f64::consts::FRAC_PI_2;
            let x1 = 1.0 - 5.0f64.sqrt();
            Ok(vec![(DVector::from_vec(vec![x1, 0.0, t_star]), t_star)])
        }
        "nonsmooth_abs" => Ok(vec![
            (DVector::from_element(1, 2.0), 2.0),
            (DVector::from_element(1, -2.0), 2.0),
        ]),
        // No admissible point exists; the equal-violation midpoint is the
        // representative probe seed.
        "degenerate_pair" => Ok(vec![(DVector::zeros(2), 1.0)]),
        _ => Err(Error::UnknownProblem {
            name: name.to_string(),
            known: BUILTIN_NAMES.iter().map(|s| s.to_string()).collect(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oscillator_dynamics_at_known_point() {
        let spec = builtin_problem("oscillator").unwrap();
        let x = DVector::from_vec(vec![2.0, 0.0, 0.0]);
        let u = DVector::from_element(1, -1.0);
        for t in [0.0, 0.7, 3.1] {
            let f = (spec.dynamics)(&x, &u, t);
            assert_eq!(f.as_slice(), &[0.0, -3.0, 1.0]);
        }
    }

    #[test]
    fn oscillator_spec_shape() {
        let spec = builtin_problem("oscillator").unwrap();
        assert_eq!(spec.x0.as_slice(), &[2.0, 0.0, 0.0]);
        assert_eq!(spec.eq_constraints.len(), 1);
        let g = spec.eq_constraints[0].grad(&spec.x0, 0.0).unwrap();
        assert_eq!(g.as_slice(), &[0.0, 1.0, 0.0]);
        assert_eq!(spec.time_mode, TimeMode::FreeT);
    }

    #[test]
    fn nonsmooth_abs_admissible_points() {
        let spec = builtin_problem("nonsmooth_abs").unwrap();
        let c = &spec.eq_constraints[0];
        for x in [2.0, -2.0] {
            assert_eq!(c.value(&DVector::from_element(1, x), 0.0), 0.0);
        }
        assert!(!c.smooth);
        assert_eq!(c.value(&DVector::from_element(1, 2.5), 0.0), 0.5);
    }

    #[test]
    fn unknown_problem_is_not_found() {
        let err = builtin_problem("unknown").unwrap_err();
        match err {
            Error::UnknownProblem { name, known } => {
                assert_eq!(name, "unknown");
                assert!(known.contains(&"oscillator".to_string()));
            }
            other => panic!("expected UnknownProblem, got {other:?}"),
        }
    }

    #[test]
    fn builtins_validate_clean() {
        for name in BUILTIN_NAMES {
            let spec = builtin_problem(name).unwrap();
            let report = validate_problem(&spec);
            assert!(
                report.all_passed(),
                "builtin '{name}' failed validation: {:?}",
                report.failures().collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn wrong_jacobian_shape_is_reported() {
        let mut spec = builtin_problem("oscillator").unwrap();
        spec.dynamics_jac_x = Box::new(|_, _, _| DMatrix::zeros(2, 3));
        let report = validate_problem(&spec);
        assert!(!report.all_passed());
        assert!(report.failures().any(|c| c.name == "state Jacobian shape"));
    }

    #[test]
    fn zero_jacobian_fails_finite_difference_check() {
        let mut spec = builtin_problem("oscillator").unwrap();
        // True f_x has entries +-1; an all-zero Jacobian must be caught.
        spec.dynamics_jac_x = Box::new(|_, _, _| DMatrix::zeros(3, 3));
        let report = validate_problem(&spec);
        assert!(report
            .failures()
            .any(|c| c.name == "state Jacobian finite differences"));
    }

    #[test]
    fn spec_is_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<ProblemSpec>();
    }

    #[test]
    fn constraint_budget_enforced() {
        let mut spec = builtin_problem("nonsmooth_abs").unwrap();
        // n = 1 allows at most two terminal constraints.
        spec.ineq_constraints = (0..2)
            .map(|_| TerminalConstraint::smooth(|x, _| x[0], |_, _| DVector::from_element(1, 1.0)))
            .collect();
        let report = validate_problem(&spec);
        assert!(report.failures().any(|c| c.name == "terminal constraint count"));
    }
}
