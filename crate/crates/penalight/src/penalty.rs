//! The exact penalty decomposition: terminal part (max over absolute
//! equality values and inequality values), dynamics-residual part (L2 norm
//! of `z - f` under the change of variables `z = x'`), its normalized
//! gradient on infeasible pairs, and the penalized objective used by the
//! direct solver.

use nalgebra::{DMatrix, DVector};

use crate::discretize::{l2_norm_on_grid, ControlGrid};
use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::regularity::Hull;

/// Default tolerance for active-set detection at the terminal point.
pub const TOL_ACTIVE: f64 = 1e-8;

/// Division guard below which the normalized residual `w = r / phi_diff`
/// is considered undefined.
pub const EPS_DIV: f64 = 1e-12;

/// Terminal penalty and penalized objective at one evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyValue {
    /// Dynamics-residual norm; zero for trajectories produced by forward
    /// integration.
    pub phi_diff: f64,
    /// Max over `|Φ_k|` (equalities) and `Φ_j` (inequalities); can be
    /// negative when only inactive inequalities exist.
    pub phi_term: f64,
    pub active_eq: Vec<usize>,
    pub active_ineq: Vec<usize>,
    /// Unpenalized terminal cost `Φ0(x_T, T)`.
    pub cost: f64,
    /// `cost + λ (phi_diff + max(phi_term, 0))`.
    pub f_lambda: f64,
}

/// A free derivative variable `z` paired with the control grid it lives on.
/// Unlike a [`crate::discretize::Trajectory`], `z` need not satisfy the
/// dynamics; the state is reconstructed as `x0 + ∫ z`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeTrajectoryPair {
    /// Node samples of `z`, one row per node ((N+1)×n).
    pub z: DMatrix<f64>,
    pub grid: ControlGrid,
}

impl FreeTrajectoryPair {
    pub fn new(z: DMatrix<f64>, grid: ControlGrid) -> Result<Self> {
        if z.nrows() != grid.n_intervals() + 1 {
            return Err(Error::InvalidArgument(format!(
                "z has {} rows, grid implies {}",
                z.nrows(),
                grid.n_intervals() + 1
            )));
        }
        Ok(FreeTrajectoryPair { z, grid })
    }
}

/// Terminal penalty value with its active sets.
///
/// Indices within `tol_active` of the max are reported active (equalities
/// through `|Φ_k|`, inequalities through `Φ_j`). With no terminal
/// constraints the value is zero by convention.
pub fn phi_term(
    spec: &ProblemSpec,
    x_terminal: &DVector<f64>,
    t: f64,
    tol_active: f64,
) -> (f64, Vec<usize>, Vec<usize>) {
    if spec.n_terminal_constraints() == 0 {
        return (0.0, vec![], vec![]);
    }
    let eq_vals: Vec<f64> =
        spec.eq_constraints.iter().map(|c| c.value(x_terminal, t).abs()).collect();
    let ineq_vals: Vec<f64> =
        spec.ineq_constraints.iter().map(|c| c.value(x_terminal, t)).collect();
    let value = eq_vals
        .iter()
        .chain(ineq_vals.iter())
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let active_eq = (0..eq_vals.len()).filter(|&k| value - eq_vals[k] <= tol_active).collect();
    let active_ineq =
        (0..ineq_vals.len()).filter(|&j| value - ineq_vals[j] <= tol_active).collect();
    (value, active_eq, active_ineq)
}

/// Finite generator set of the terminal-penalty subdifferential at
/// `(x_terminal, t)`.
///
/// For a positive penalty the generators are the sign-weighted gradients of
/// the active equalities plus the gradients of the active inequalities. At
/// a feasible point (penalty within `tol_active` of zero) they are `±` the
/// gradient of every equality plus the gradients of the inequalities active
/// at zero.
pub fn phi_term_subdifferential(
    spec: &ProblemSpec,
    x_terminal: &DVector<f64>,
    t: f64,
    tol_active: f64,
) -> Result<Hull> {
    let (value, active_eq, active_ineq) = phi_term(spec, x_terminal, t, tol_active);
    let mut generators = Vec::new();
    if value > tol_active {
        for &k in &active_eq {
            let c = &spec.eq_constraints[k];
            let sign = if c.value(x_terminal, t) >= 0.0 { 1.0 } else { -1.0 };
            generators.push(c.grad(x_terminal, t)? * sign);
        }
        for &j in &active_ineq {
            generators.push(spec.ineq_constraints[j].grad(x_terminal, t)?);
        }
    } else {
        for c in &spec.eq_constraints {
            let g = c.grad(x_terminal, t)?;
            generators.push(g.clone());
            generators.push(-g);
        }
        for c in &spec.ineq_constraints {
            if c.value(x_terminal, t) >= -tol_active {
                generators.push(c.grad(x_terminal, t)?);
            }
        }
    }
    Ok(Hull { generators })
}

/// Reconstruct node states from the free derivative variable by cumulative
/// trapezoidal quadrature.
fn reconstruct_states(spec: &ProblemSpec, pair: &FreeTrajectoryPair) -> DMatrix<f64> {
    let n_nodes = pair.z.nrows();
    let h = pair.grid.step();
    let mut states = DMatrix::zeros(n_nodes, spec.state_dim);
    states.row_mut(0).copy_from(&spec.x0.transpose());
    for k in 0..n_nodes - 1 {
        let next = states.row(k) + (pair.z.row(k) + pair.z.row(k + 1)) * (h / 2.0);
        states.row_mut(k + 1).copy_from(&next);
    }
    states
}

/// Node residuals `r_k = z_k - f(x_k, u_k, t_k)` on the reconstructed state.
fn dynamics_residual(spec: &ProblemSpec, pair: &FreeTrajectoryPair) -> DMatrix<f64> {
    let states = reconstruct_states(spec, pair);
    let times = pair.grid.node_times();
    let n_nodes = pair.z.nrows();
    let mut r = DMatrix::zeros(n_nodes, spec.state_dim);
    for k in 0..n_nodes {
        let x = states.row(k).transpose();
        let u = pair.grid.node_value(k);
        let f = (spec.dynamics)(&x, &u, times[k]);
        r.row_mut(k).copy_from(&(pair.z.row(k) - f.transpose()));
    }
    r
}

/// Dynamics-residual norm of a free pair: the L2 norm of
/// `z - f(x0 + ∫z, u, t)` over the grid.
pub fn phi_diff_value(spec: &ProblemSpec, pair: &FreeTrajectoryPair) -> f64 {
    l2_norm_on_grid(&dynamics_residual(spec, pair), pair.grid.step())
}

/// Normalized residual and gradient grid function of [`phi_diff_value`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhiDiffGradient {
    /// Gradient grid function: row `k` is the gradient density at node `k`.
    pub gradient: DMatrix<f64>,
    /// Normalized residual `w = r / phi_diff`, unit L2 norm on the grid.
    pub w: DMatrix<f64>,
}

/// Gradient of the dynamics-residual norm at a pair with positive residual:
/// `∇(t) = w(t) - ∫_t^T f_xᵀ w dτ` with `w = r / phi_diff`, tail integrals
/// by trapezoidal quadrature.
pub fn phi_diff_gradient(spec: &ProblemSpec, pair: &FreeTrajectoryPair) -> Result<PhiDiffGradient> {
    let r = dynamics_residual(spec, pair);
    let h = pair.grid.step();
    let value = l2_norm_on_grid(&r, h);
    if value <= EPS_DIV {
        return Err(Error::NearFeasible { phi_diff: value });
    }
    let w = r / value;

    let states = reconstruct_states(spec, pair);
    let times = pair.grid.node_times();
    let n_nodes = w.nrows();
    let mut integrand = DMatrix::zeros(n_nodes, spec.state_dim);
    for k in 0..n_nodes {
        let x = states.row(k).transpose();
        let u = pair.grid.node_value(k);
        let jx = (spec.dynamics_jac_x)(&x, &u, times[k]);
        integrand.row_mut(k).copy_from(&(jx.transpose() * w.row(k).transpose()).transpose());
    }
    let mut gradient = DMatrix::zeros(n_nodes, spec.state_dim);
    let mut tail = DVector::zeros(spec.state_dim);
    gradient.row_mut(n_nodes - 1).copy_from(&w.row(n_nodes - 1));
    for k in (0..n_nodes - 1).rev() {
        tail += (integrand.row(k) + integrand.row(k + 1)).transpose() * (h / 2.0);
        gradient.row_mut(k).copy_from(&(w.row(k) - tail.transpose()));
    }
    Ok(PhiDiffGradient { gradient, w })
}

/// Penalized objective of a control grid: integrates the dynamics (so the
/// residual part vanishes by construction), then adds `λ max(phi_term, 0)`
/// to the terminal cost. The clamp keeps strictly feasible points
/// penalty-free when only inactive inequalities exist.
pub fn penalized_objective(
    spec: &ProblemSpec,
    grid: &ControlGrid,
    lambda: f64,
) -> Result<PenaltyValue> {
    if lambda < 0.0 {
        return Err(Error::InvalidArgument(format!("penalty weight must be >= 0, got {lambda}")));
    }
    let traj = crate::discretize::integrate_rk4(spec, grid)?;
    let x_terminal = traj.final_state();
    let t = traj.final_time();
    let cost = (spec.terminal_cost.value)(&x_terminal, t);
    let (term, active_eq, active_ineq) = phi_term(spec, &x_terminal, t, TOL_ACTIVE);
    Ok(PenaltyValue {
        phi_diff: 0.0,
        phi_term: term,
        active_eq,
        active_ineq,
        cost,
        f_lambda: cost + lambda * term.max(0.0),
    })
}
