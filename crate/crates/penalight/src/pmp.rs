//! Maximum-principle verification: Hamiltonian evaluation, multiplier
//! recovery at the endpoints, transversality residuals for the fixed-time,
//! free-time, moving-manifold, and constrained-left-endpoint regimes, and
//! bang-bang control synthesis from a switching function.
//!
//! Multipliers are recovered by sign-constrained least squares: the
//! equality block is unconstrained, the inequality block is kept
//! nonnegative by a Lawson–Hanson active-set iteration on the projected
//! problem.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::discretize::{AdjointTrajectory, ControlGrid, Trajectory};
use crate::error::{Error, Result};
use crate::model::{ProblemSpec, TerminalConstraint, TimeMode};
use crate::penalty::TOL_ACTIVE;

/// Complementarity flag threshold: a recovered inequality multiplier above
/// this on an inactive constraint is reported as a violation.
pub const MU_TOL: f64 = 1e-8;

/// Transversality diagnostics at the right endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct TransversalityReport {
    /// Equality multipliers (unrestricted sign).
    pub nu: Vec<f64>,
    /// Inequality multipliers (nonnegative).
    pub mu: Vec<f64>,
    /// Norm of the endpoint identity defect.
    pub endpoint_residual: f64,
    /// Free-time / moving-manifold defect, when applicable.
    pub hamiltonian_residual: Option<f64>,
    /// Left-endpoint defect, when applicable.
    pub left_residual: Option<f64>,
    /// Per-inequality: multiplier exceeds [`MU_TOL`] on an inactive
    /// constraint.
    pub complementarity_violations: Vec<bool>,
    /// The stacked gradient matrix was rank-deficient; the returned
    /// multipliers are the minimum-norm minimizer.
    pub rank_deficient: bool,
}

/// `H(x, u, ψ, t) = <ψ, f(x, u, t)>`.
pub fn hamiltonian(
    spec: &ProblemSpec,
    x: &DVector<f64>,
    u: &DVector<f64>,
    psi: &DVector<f64>,
    t: f64,
) -> f64 {
    psi.dot(&(spec.dynamics)(x, u, t))
}

/// Minimum-norm least squares via SVD.
fn lsq_min_norm(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    a.clone()
        .svd(true, true)
        .solve(b, 1e-12)
        .expect("SVD least squares on finite data")
}

fn column_matrix(n: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i])
}

/// Orthonormal basis of the column span (rank-revealing, via SVD).
fn column_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.ncols() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |acc, &s| acc.max(s));
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-12 * sigma_max.max(1.0))
        .count();
    u.columns(0, rank).into_owned()
}

/// Lawson–Hanson nonnegative least squares: minimize `|a x - b|` over
/// `x >= 0` by active-set pivoting.
fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Vec<f64> {
    let ncols = a.ncols();
    if ncols == 0 {
        return vec![];
    }
    let mut x = vec![0.0f64; ncols];
    let mut passive = vec![false; ncols];
    let scale = a.iter().fold(0.0f64, |acc, &v| acc.max(v.abs())).max(1.0)
        * b.iter().fold(0.0f64, |acc, &v| acc.max(v.abs())).max(1.0);
    let tol = 1e-13 * scale;
    let max_outer = 3 * ncols + 10;

    for _ in 0..max_outer {
        let residual = b - a * DVector::from_vec(x.clone());
        let gradient = a.transpose() * residual;
        let candidate = (0..ncols)
            .filter(|&j| !passive[j])
            .max_by(|&p, &q| gradient[p].total_cmp(&gradient[q]));
        let j = match candidate {
            Some(j) if gradient[j] > tol => j,
            _ => break,
        };
        passive[j] = true;

        loop {
            let active_cols: Vec<usize> = (0..ncols).filter(|&c| passive[c]).collect();
            let sub = a.select_columns(active_cols.iter());
            let z = lsq_min_norm(&sub, b);
            if z.iter().all(|&v| v > 0.0) {
                for (idx, &c) in active_cols.iter().enumerate() {
                    x[c] = z[idx];
                }
                break;
            }
            // Step toward z until the first passive coordinate hits zero.
            let mut alpha = 1.0f64;
            for (idx, &c) in active_cols.iter().enumerate() {
                if z[idx] <= 0.0 {
                    let denom = x[c] - z[idx];
                    if denom > 0.0 {
                        alpha = alpha.min(x[c] / denom);
                    }
                }
            }
            for (idx, &c) in active_cols.iter().enumerate() {
                x[c] += alpha * (z[idx] - x[c]);
                if x[c] <= 1e-14 {
                    x[c] = 0.0;
                    passive[c] = false;
                }
            }
        }
    }
    x
}

/// Multipliers recovered from a terminal adjoint value.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierRecovery {
    pub nu: Vec<f64>,
    pub mu: Vec<f64>,
    pub residual: f64,
    pub rank_deficient: bool,
}

/// Solve `min |ψ_T + ∇Φ0 + Σ ν_k ∇Φ_k + Σ μ_j ∇Φ_j|` over free `ν` and
/// `μ >= 0`. The free block is eliminated by projection; the nonnegative
/// block is solved by NNLS on the projected problem.
pub fn recover_multipliers(
    spec: &ProblemSpec,
    psi_terminal: &DVector<f64>,
    x_terminal: &DVector<f64>,
    t: f64,
) -> Result<MultiplierRecovery> {
    let n = spec.state_dim;
    let eq_grads: Vec<DVector<f64>> = spec
        .eq_constraints
        .iter()
        .map(|c| c.grad(x_terminal, t))
        .collect::<Result<_>>()?;
    let ineq_grads: Vec<DVector<f64>> = spec
        .ineq_constraints
        .iter()
        .map(|c| c.grad(x_terminal, t))
        .collect::<Result<_>>()?;

    let target = -(psi_terminal + (spec.terminal_cost.grad_x)(x_terminal, t));
    let a_eq = column_matrix(n, &eq_grads);
    let a_ineq = column_matrix(n, &ineq_grads);

    let mu: Vec<f64> = if ineq_grads.is_empty() {
        vec![]
    } else {
        // Project the inequality block onto the complement of the equality
        // span, so the NNLS solution is optimal for the joint problem.
        let basis = column_basis(&a_eq);
        let project = |v: &DVector<f64>| -> DVector<f64> {
            let mut out = v.clone();
            for c in 0..basis.ncols() {
                let q = basis.column(c);
                out -= DVector::from_column_slice(q.as_slice()) * q.dot(v);
            }
            out
        };
        let proj_cols: Vec<DVector<f64>> = ineq_grads.iter().map(&project).collect();
        nnls(&column_matrix(n, &proj_cols), &project(&target))
    };

    let nu_target = if ineq_grads.is_empty() {
        target.clone()
    } else {
        &target - &a_ineq * DVector::from_vec(mu.clone())
    };
    let nu = lsq_min_norm(&a_eq, &nu_target);

    let residual = {
        let mut defect = -target;
        if !eq_grads.is_empty() {
            defect += &a_eq * &nu;
        }
        if !ineq_grads.is_empty() {
            defect += &a_ineq * DVector::from_vec(mu.clone());
        }
        defect.norm()
    };

    let total = eq_grads.len() + ineq_grads.len();
    let rank_deficient = if total == 0 {
        false
    } else {
        let stacked = column_matrix(n, &eq_grads.iter().chain(&ineq_grads).cloned().collect::<Vec<_>>());
        column_basis(&stacked).ncols() < total
    };

    Ok(MultiplierRecovery { nu: nu.iter().copied().collect(), mu, residual, rank_deficient })
}

/// Fixed-terminal-time transversality check at the end of an integrated
/// adjoint: recovers multipliers and flags complementarity violations.
pub fn check_transversality_fixed(
    spec: &ProblemSpec,
    adjoint: &AdjointTrajectory,
    traj: &Trajectory,
    grid: &ControlGrid,
) -> Result<TransversalityReport> {
    if adjoint.psi.nrows() != traj.states.nrows()
        || traj.states.nrows() != grid.n_intervals() + 1
    {
        return Err(Error::InvalidArgument(
            "adjoint, trajectory and grid must share the same nodes".into(),
        ));
    }
    let x_terminal = traj.final_state();
    let t = traj.final_time();
    let psi_terminal = adjoint.terminal_value();
    let rec = recover_multipliers(spec, &psi_terminal, &x_terminal, t)?;
    let complementarity = complementarity_flags(spec, &rec.mu, &x_terminal, t);
    Ok(TransversalityReport {
        nu: rec.nu,
        mu: rec.mu,
        endpoint_residual: rec.residual,
        hamiltonian_residual: None,
        left_residual: None,
        complementarity_violations: complementarity,
        rank_deficient: rec.rank_deficient,
    })
}

fn complementarity_flags(
    spec: &ProblemSpec,
    mu: &[f64],
    x_terminal: &DVector<f64>,
    t: f64,
) -> Vec<bool> {
    spec.ineq_constraints
        .iter()
        .zip(mu)
        .map(|(c, &m)| {
            let inactive = c.value(x_terminal, t) < -TOL_ACTIVE;
            inactive && m > MU_TOL
        })
        .collect()
}

/// Free-terminal-time condition for time-independent terminal data: the
/// Hamiltonian vanishes at the endpoint. Returns `|H|`.
pub fn check_free_time(
    spec: &ProblemSpec,
    x_terminal: &DVector<f64>,
    u_terminal: &DVector<f64>,
    psi_terminal: &DVector<f64>,
    t: f64,
) -> Result<f64> {
    if let TimeMode::FixedT(_) = spec.time_mode {
        return Err(Error::Misuse(
            "free-terminal-time check called on a fixed-time problem".into(),
        ));
    }
    Ok(hamiltonian(spec, x_terminal, u_terminal, psi_terminal, t).abs())
}

/// Moving-manifold condition at a free terminal time: the Hamiltonian must
/// balance the explicit time drift of the cost and of the constraint
/// combination, `H = ∂Φ0/∂t + Σ ν_k ∂Φ_k/∂t + Σ μ_j ∂Φ_j/∂t`, with the
/// multipliers taken from the endpoint recovery. Returns the absolute
/// defect; with all time partials zero this reduces to the free-time check
/// on identical inputs.
pub fn check_moving_manifold(
    spec: &ProblemSpec,
    x_terminal: &DVector<f64>,
    u_terminal: &DVector<f64>,
    psi_terminal: &DVector<f64>,
    t: f64,
    nu: &[f64],
    mu: &[f64],
) -> f64 {
    let h = hamiltonian(spec, x_terminal, u_terminal, psi_terminal, t);
    let mut drift = (spec.terminal_cost.partial_t)(x_terminal, t);
    for (c, &nu_k) in spec.eq_constraints.iter().zip(nu) {
        drift += nu_k * c.time_partial(x_terminal, t);
    }
    for (c, &mu_j) in spec.ineq_constraints.iter().zip(mu) {
        drift += mu_j * c.time_partial(x_terminal, t);
    }
    (h - drift).abs()
}

/// Left-endpoint multipliers and residual.
#[derive(Debug, Clone, PartialEq)]
pub struct LeftEndpointCheck {
    pub gamma: Vec<f64>,
    pub delta: Vec<f64>,
    pub residual: f64,
    pub rank_deficient: bool,
}

/// Left-endpoint transversality: `ψ(t0)` must equal a combination of the
/// initial-constraint gradients with free `γ` on equalities and `δ >= 0` on
/// inequalities. Returns the least-squares residual and the multipliers.
pub fn check_left_endpoint(
    spec: &ProblemSpec,
    psi_initial: &DVector<f64>,
    x_initial: &DVector<f64>,
    t0: f64,
) -> Result<LeftEndpointCheck> {
    let left = spec
        .left_endpoint
        .as_ref()
        .ok_or_else(|| Error::Misuse("no left-endpoint constraints are declared".into()))?;
    if left.free_t0 {
        return Err(Error::Misuse(
            "free initial time is not supported; only the fixed-t0 left check is available".into(),
        ));
    }
    if left.eq_constraints.is_empty() && left.ineq_constraints.is_empty() {
        return Err(Error::Misuse("left-endpoint constraint lists are empty".into()));
    }
    let n = spec.state_dim;
    let grads = |list: &[TerminalConstraint]| -> Result<Vec<DVector<f64>>> {
        list.iter().map(|c| c.grad(x_initial, t0)).collect()
    };
    let eq_grads = grads(&left.eq_constraints)?;
    let ineq_grads = grads(&left.ineq_constraints)?;
    let a_eq = column_matrix(n, &eq_grads);
    let a_ineq = column_matrix(n, &ineq_grads);

    let delta: Vec<f64> = if ineq_grads.is_empty() {
        vec![]
    } else {
        let basis = column_basis(&a_eq);
        let project = |v: &DVector<f64>| -> DVector<f64> {
            let mut out = v.clone();
            for c in 0..basis.ncols() {
                let q = basis.column(c);
                out -= DVector::from_column_slice(q.as_slice()) * q.dot(v);
            }
            out
        };
        let cols: Vec<DVector<f64>> = ineq_grads.iter().map(&project).collect();
        nnls(&column_matrix(n, &cols), &project(psi_initial))
    };
    let gamma_target = if ineq_grads.is_empty() {
        psi_initial.clone()
    } else {
        psi_initial - &a_ineq * DVector::from_vec(delta.clone())
    };
    let gamma = lsq_min_norm(&a_eq, &gamma_target);

    let mut combo = DVector::zeros(n);
    if !eq_grads.is_empty() {
        combo += &a_eq * &gamma;
    }
    if !ineq_grads.is_empty() {
        combo += &a_ineq * DVector::from_vec(delta.clone());
    }
    let residual = (psi_initial - combo).norm();

    let total = eq_grads.len() + ineq_grads.len();
    let stacked = column_matrix(n, &eq_grads.iter().chain(&ineq_grads).cloned().collect::<Vec<_>>());
    let rank_deficient = column_basis(&stacked).ncols() < total;

    Ok(LeftEndpointCheck {
        gamma: gamma.iter().copied().collect(),
        delta,
        residual,
        rank_deficient,
    })
}

/// L2 norm of the switching function `f_uᵀ ψ` along a solution, by
/// trapezoidal quadrature over the grid nodes. For unconstrained-control
/// stationary points this vanishes at solver tolerance; for bounded
/// controls governed by the maximum principle it stays finite, so the value
/// is a diagnostic to report rather than assert.
pub fn control_stationarity_norm(
    spec: &ProblemSpec,
    adjoint: &AdjointTrajectory,
    traj: &Trajectory,
    grid: &ControlGrid,
) -> f64 {
    let n_nodes = traj.states.nrows();
    let mut sigma = nalgebra::DMatrix::zeros(n_nodes, spec.control_dim);
    for k in 0..n_nodes {
        let x = traj.state_at_node(k);
        let u = grid.node_value(k);
        let b = (spec.dynamics_jac_u)(&x, &u, traj.times[k]);
        sigma.row_mut(k).copy_from(&(b.transpose() * adjoint.value_at_node(k)).transpose());
    }
    crate::discretize::l2_norm_on_grid(&sigma, grid.step())
}

/// Bang-bang synthesis output: the extremal control grid and, per interval,
/// whether the switching function was too close to zero to decide.
#[derive(Debug, Clone, PartialEq)]
pub struct BangBangControl {
    pub grid: ControlGrid,
    pub singular: Vec<bool>,
}

/// Control maximizing the Hamiltonian over the box at each grid node, for
/// dynamics affine in the control: each component takes the upper bound
/// where the switching function `f_uᵀ ψ` is positive and the lower bound
/// where negative. Intervals whose switching value sits at zero (relative
/// to its overall scale) are flagged singular and assigned the box
/// midpoint.
pub fn bang_bang_control(
    spec: &ProblemSpec,
    adjoint: &AdjointTrajectory,
    traj: &Trajectory,
) -> Result<BangBangControl> {
    verify_affine_in_control(spec, traj)?;
    let n_nodes = adjoint.psi.nrows();
    if n_nodes != traj.states.nrows() || n_nodes < 2 {
        return Err(Error::InvalidArgument(
            "adjoint and trajectory must share at least two grid nodes".into(),
        ));
    }
    let n_intervals = n_nodes - 1;
    let m = spec.control_dim;
    let u_probe = spec.control_midpoint();

    let mut switching = DMatrix::zeros(n_intervals, m);
    let mut scale: f64 = 0.0;
    for k in 0..n_intervals {
        let x = traj.state_at_node(k);
        let psi = adjoint.value_at_node(k);
        let b = (spec.dynamics_jac_u)(&x, &u_probe, traj.times[k]);
        let sigma = b.transpose() * psi;
        for i in 0..m {
            switching[(k, i)] = sigma[i];
            scale = scale.max(sigma[i].abs());
        }
    }
    let singular_tol = 1e-12 * (1.0 + scale);

    let mut values = DMatrix::zeros(n_intervals, m);
    let mut singular = vec![false; n_intervals];
    for k in 0..n_intervals {
        for i in 0..m {
            let s = switching[(k, i)];
            values[(k, i)] = if s.abs() <= singular_tol {
                singular[k] = true;
                u_probe[i]
            } else if s > 0.0 {
                spec.control_upper[i]
            } else {
                spec.control_lower[i]
            };
        }
    }
    let grid = ControlGrid::new(traj.times[0], traj.final_time(), values)?;
    Ok(BangBangControl { grid, singular })
}

/// Probe `f_u` at a few random controls: affine-in-control dynamics have a
/// control Jacobian independent of `u`.
fn verify_affine_in_control(spec: &ProblemSpec, traj: &Trajectory) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xAFF1_4E5E_ED00_0001);
    let m = spec.control_dim;
    let x = traj.state_at_node(traj.states.nrows() / 2);
    let t = traj.times[traj.states.nrows() / 2];
    let draw = |rng: &mut ChaCha8Rng| {
        DVector::from_fn(m, |i, _| {
            let (lo, hi) = (spec.control_lower[i], spec.control_upper[i]);
            lo + rng.random_range(0.0..1.0) * (hi - lo)
        })
    };
    let reference = (spec.dynamics_jac_u)(&x, &draw(&mut rng), t);
    for _ in 0..2 {
        let other = (spec.dynamics_jac_u)(&x, &draw(&mut rng), t);
        let diff = (&other - &reference).abs().max();
        if diff > 1e-10 {
            return Err(Error::Unsupported(format!(
                "dynamics are not affine in the control (f_u varies by {diff:.3e} across probes)"
            )));
        }
    }
    Ok(())
}
