//! Uniform-grid transcription: piecewise-constant controls, fixed-step RK4
//! state integration, backward adjoint integration, and trapezoidal L2
//! quadrature on grid functions.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::ProblemSpec;

/// Piecewise-constant control on a uniform grid: row `k` of `values` is the
/// control held on `[t_k, t_{k+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlGrid {
    t0: f64,
    t_final: f64,
    values: DMatrix<f64>,
}

impl ControlGrid {
    pub fn new(t0: f64, t_final: f64, values: DMatrix<f64>) -> Result<Self> {
        if !t_final.is_finite() || !t0.is_finite() || t_final <= t0 {
            return Err(Error::InvalidArgument(format!(
                "control grid needs t_final > t0 (got t0 = {t0}, t_final = {t_final})"
            )));
        }
        if values.nrows() == 0 {
            return Err(Error::InvalidArgument("control grid needs at least one interval".into()));
        }
        Ok(ControlGrid { t0, t_final, values })
    }

    /// Constant control over `[t0, t_final]` on `n` intervals.
    pub fn constant(t0: f64, t_final: f64, u: &DVector<f64>, n: usize) -> Result<Self> {
        let values = DMatrix::from_fn(n, u.len(), |_, j| u[j]);
        ControlGrid::new(t0, t_final, values)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn n_intervals(&self) -> usize {
        self.values.nrows()
    }

    pub fn control_dim(&self) -> usize {
        self.values.ncols()
    }

    pub fn step(&self) -> f64 {
        (self.t_final - self.t0) / self.n_intervals() as f64
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Control held on interval `k`.
    pub fn interval_value(&self, k: usize) -> DVector<f64> {
        self.values.row(k).transpose()
    }

    /// Control governing node `k`; the terminal node reuses the last interval.
    pub fn node_value(&self, k: usize) -> DVector<f64> {
        self.interval_value(k.min(self.n_intervals() - 1))
    }

    /// The `n + 1` uniform node times.
    pub fn node_times(&self) -> Vec<f64> {
        let h = self.step();
        let n = self.n_intervals();
        (0..=n)
            .map(|k| if k == n { self.t_final } else { self.t0 + k as f64 * h })
            .collect()
    }
}

/// State response at the grid nodes; `states` row `k` is `x(t_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: DMatrix<f64>,
}

impl Trajectory {
    pub fn final_state(&self) -> DVector<f64> {
        self.states.row(self.states.nrows() - 1).transpose()
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one node")
    }

    pub fn state_at_node(&self, k: usize) -> DVector<f64> {
        self.states.row(k).transpose()
    }
}

/// Adjoint response at the grid nodes; `psi` row `k` is `ψ(t_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointTrajectory {
    pub times: Vec<f64>,
    pub psi: DMatrix<f64>,
}

impl AdjointTrajectory {
    pub fn initial_value(&self) -> DVector<f64> {
        self.psi.row(0).transpose()
    }

    pub fn terminal_value(&self) -> DVector<f64> {
        self.psi.row(self.psi.nrows() - 1).transpose()
    }

    pub fn value_at_node(&self, k: usize) -> DVector<f64> {
        self.psi.row(k).transpose()
    }
}

/// Classical fourth-order Runge–Kutta over the control grid, one step per
/// interval with the control frozen at that interval's value. The returned
/// trajectory satisfies the dynamics by construction, so the dynamics
/// residual of the pair is zero up to quadrature.
pub fn integrate_rk4(spec: &ProblemSpec, grid: &ControlGrid) -> Result<Trajectory> {
    if grid.control_dim() != spec.control_dim {
        return Err(Error::InvalidArgument(format!(
            "control grid has {} columns, spec has control_dim {}",
            grid.control_dim(),
            spec.control_dim
        )));
    }
    let n = grid.n_intervals();
    let h = grid.step();
    let times = grid.node_times();
    let mut states = DMatrix::zeros(n + 1, spec.state_dim);
    states.row_mut(0).copy_from(&spec.x0.transpose());

    let mut x = spec.x0.clone();
    for k in 0..n {
        let u = grid.interval_value(k);
        let t = times[k];
        x = rk4_step(&spec.dynamics, &x, &u, t, h);
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { node: k + 1 });
        }
        states.row_mut(k + 1).copy_from(&x.transpose());
    }
    Ok(Trajectory { times, states })
}

fn rk4_step(
    f: &crate::model::DynamicsFn,
    x: &DVector<f64>,
    u: &DVector<f64>,
    t: f64,
    h: f64,
) -> DVector<f64> {
    let k1 = f(x, u, t);
    let k2 = f(&(x + &k1 * (h / 2.0)), u, t + h / 2.0);
    let k3 = f(&(x + &k2 * (h / 2.0)), u, t + h / 2.0);
    let k4 = f(&(x + &k3 * h), u, t + h);
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Backward RK4 for the adjoint equation `ψ' = -f_xᵀ ψ` from the supplied
/// terminal value down to `t0`. The frozen trajectory is evaluated inside a
/// step by linear interpolation of its node values.
pub fn integrate_adjoint(
    spec: &ProblemSpec,
    traj: &Trajectory,
    grid: &ControlGrid,
    psi_terminal: &DVector<f64>,
) -> Result<AdjointTrajectory> {
    let n = grid.n_intervals();
    if traj.states.nrows() != n + 1 {
        return Err(Error::InvalidArgument(format!(
            "trajectory has {} nodes, grid implies {}",
            traj.states.nrows(),
            n + 1
        )));
    }
    if psi_terminal.len() != spec.state_dim || !psi_terminal.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("terminal adjoint value must be finite vec[n]".into()));
    }
    let h = grid.step();
    let times = grid.node_times();
    let mut psi_nodes = DMatrix::zeros(n + 1, spec.state_dim);
    psi_nodes.row_mut(n).copy_from(&psi_terminal.transpose());

    let mut psi = psi_terminal.clone();
    for k in (0..n).rev() {
        let u = grid.interval_value(k);
        let x_left = traj.state_at_node(k);
        let x_right = traj.state_at_node(k + 1);
        // Linear state interpolation within [t_k, t_{k+1}], parameterized by
        // the fraction from the left node.
        let x_at = |frac: f64| &x_left * (1.0 - frac) + &x_right * frac;
        let rhs = |p: &DVector<f64>, frac: f64, t: f64| -> DVector<f64> {
            let jx = (spec.dynamics_jac_x)(&x_at(frac), &u, t);
            -(jx.transpose() * p)
        };
        // One RK4 step of size -h from t_{k+1} to t_k.
        let t_hi = times[k + 1];
        let k1 = rhs(&psi, 1.0, t_hi);
        let k2 = rhs(&(&psi - &k1 * (h / 2.0)), 0.5, t_hi - h / 2.0);
        let k3 = rhs(&(&psi - &k2 * (h / 2.0)), 0.5, t_hi - h / 2.0);
        let k4 = rhs(&(&psi - &k3 * h), 0.0, t_hi - h);
        psi -= (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if !psi.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { node: k });
        }
        psi_nodes.row_mut(k).copy_from(&psi.transpose());
    }
    Ok(AdjointTrajectory { times, psi: psi_nodes })
}

/// L2 norm of a grid function by trapezoidal quadrature: rows of `values`
/// are samples at the `N + 1` uniform nodes, `h` is the node spacing.
pub fn l2_norm_on_grid(values: &DMatrix<f64>, h: f64) -> f64 {
    debug_assert!(h > 0.0, "node spacing must be positive");
    let rows = values.nrows();
    if rows < 2 {
        return 0.0;
    }
    let sq = |k: usize| values.row(k).iter().map(|v| v * v).sum::<f64>();
    let mut acc = 0.5 * (sq(0) + sq(rows - 1));
    for k in 1..rows - 1 {
        acc += sq(k);
    }
    (acc * h).sqrt()
}
