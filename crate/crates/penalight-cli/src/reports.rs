//! Report structs (JSON-serializable, round-trip safe) and the CSV / text
//! emitters behind the `--out` directory.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use penalight::bench::BenchReport;
use penalight::discretize::{AdjointTrajectory, ControlGrid, Trajectory};
use penalight::regularity::{ClassicalCq, UscReport, UscVerdict};
use penalight::solver::{SolveResult, SweepTable};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SolveJson {
    pub problem: String,
    pub t_opt: f64,
    pub objective: f64,
    pub cost: f64,
    pub terminal_violation: f64,
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
    pub n_intervals: usize,
    pub rho: f64,
}

impl SolveJson {
    pub fn new(problem: &str, n_intervals: usize, rho: f64, sol: &SolveResult) -> Self {
        SolveJson {
            problem: problem.to_string(),
            t_opt: sol.t_opt,
            objective: sol.objective,
            cost: sol.cost,
            terminal_violation: sol.terminal_violation,
            iterations: sol.iterations,
            restarts: sol.restarts,
            converged: sol.converged,
            n_intervals,
            rho,
        }
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "problem            {}", self.problem);
        let _ = writeln!(s, "T_opt              {:.6}", self.t_opt);
        let _ = writeln!(s, "objective          {:.6}", self.objective);
        let _ = writeln!(s, "cost               {:.6}", self.cost);
        let _ = writeln!(s, "terminal_violation {:.3e}", self.terminal_violation);
        let _ = writeln!(s, "iterations         {}", self.iterations);
        let _ = writeln!(s, "restarts           {}", self.restarts);
        let _ = writeln!(s, "converged          {}", self.converged);
        s
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct UscJson {
    pub problem: String,
    pub distance: f64,
    pub verdict: String,
    pub classical: String,
    pub licq_holds: Option<bool>,
    pub licq_rank: Option<usize>,
    pub mfcq_holds: Option<bool>,
    pub probes_evaluated: usize,
    pub infeasible_probes: usize,
    pub notes: Vec<String>,
}

impl UscJson {
    pub fn new(problem: &str, report: &UscReport) -> Self {
        UscJson {
            problem: problem.to_string(),
            distance: report.distance,
            verdict: match report.verdict {
                UscVerdict::Holds => "HOLDS".to_string(),
                UscVerdict::Fails => "FAILS".to_string(),
            },
            classical: match report.classical {
                ClassicalCq::Applicable => "applicable".to_string(),
                ClassicalCq::NonsmoothNotApplicableClassically => {
                    "not applicable (nonsmooth active constraint)".to_string()
                }
            },
            licq_holds: report.licq.map(|(h, _)| h),
            licq_rank: report.licq.map(|(_, r)| r),
            mfcq_holds: report.mfcq.as_ref().map(|(h, _)| *h),
            probes_evaluated: report.probes_evaluated,
            infeasible_probes: report.infeasible_probes,
            notes: report.notes.clone(),
        }
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "a = {:.6} {}", self.distance, self.verdict);
        let _ = writeln!(s, "classical conditions: {}", self.classical);
        match (self.licq_holds, self.licq_rank) {
            (Some(h), Some(r)) => {
                let _ = writeln!(s, "LICQ: {} (rank {r})", if h { "holds" } else { "fails" });
            }
            _ => {
                let _ = writeln!(s, "LICQ: not evaluated (no feasible smooth probe)");
            }
        }
        match self.mfcq_holds {
            Some(h) => {
                let _ = writeln!(s, "MFCQ: {}", if h { "holds" } else { "fails" });
            }
            None => {
                let _ = writeln!(s, "MFCQ: not evaluated");
            }
        }
        let _ = writeln!(
            s,
            "probes: {} evaluated, {} infeasible",
            self.probes_evaluated, self.infeasible_probes
        );
        for note in &self.notes {
            let _ = writeln!(s, "note: {note}");
        }
        s
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TransversalityJson {
    pub problem: String,
    pub nu: Vec<f64>,
    pub mu: Vec<f64>,
    pub endpoint_residual: f64,
    pub hamiltonian_residual: f64,
    pub moving_manifold_residual: f64,
    pub max_hamiltonian_along_solution: f64,
    pub max_adjoint_error: f64,
    /// L2 norm of the switching function along the solution; diagnostic
    /// only (bounded controls keep it finite).
    pub switching_function_norm: f64,
    pub pass: bool,
}

impl TransversalityJson {
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "problem                      {}", self.problem);
        let _ = writeln!(s, "nu                           {:?}", self.nu);
        let _ = writeln!(s, "mu                           {:?}", self.mu);
        let _ = writeln!(s, "endpoint_residual            {:.3e}", self.endpoint_residual);
        let _ = writeln!(s, "hamiltonian_residual         {:.3e}", self.hamiltonian_residual);
        let _ = writeln!(s, "moving_manifold_residual     {:.3e}", self.moving_manifold_residual);
        let _ = writeln!(
            s,
            "max |H| along solution       {:.3e}",
            self.max_hamiltonian_along_solution
        );
        let _ = writeln!(s, "max adjoint node error       {:.3e}", self.max_adjoint_error);
        let _ = writeln!(
            s,
            "switching function L2 norm   {:.3e} (diagnostic)",
            self.switching_function_norm
        );
        let _ = writeln!(s, "pass                         {}", self.pass);
        s
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BenchJson {
    pub t_opt: f64,
    pub t_error: f64,
    pub switch_times: Vec<f64>,
    pub switch_time_error: f64,
    pub terminal_violation: f64,
    pub endpoint_error: f64,
    pub endpoint_residual: f64,
    pub hamiltonian_residual: Option<f64>,
    pub usc_distance: f64,
    pub usc_verdict: String,
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
    pub pass: bool,
}

impl BenchJson {
    pub fn new(report: &BenchReport) -> Self {
        BenchJson {
            t_opt: report.t_opt,
            t_error: report.t_error,
            switch_times: report.switch_times.clone(),
            switch_time_error: report.switch_time_error,
            terminal_violation: report.terminal_violation,
            endpoint_error: report.endpoint_error,
            endpoint_residual: report.transversality.endpoint_residual,
            hamiltonian_residual: report.transversality.hamiltonian_residual,
            usc_distance: report.usc.distance,
            usc_verdict: match report.usc.verdict {
                UscVerdict::Holds => "HOLDS".to_string(),
                UscVerdict::Fails => "FAILS".to_string(),
            },
            iterations: report.iterations,
            restarts: report.restarts,
            converged: report.converged,
            pass: report.pass,
        }
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "T_opt               {:.6}", self.t_opt);
        let _ = writeln!(s, "T_error             {:.3e}", self.t_error);
        let _ = writeln!(s, "switch_times        {:?}", self.switch_times);
        let _ = writeln!(s, "switch_time_error   {:.3e}", self.switch_time_error);
        let _ = writeln!(s, "terminal_violation  {:.3e}", self.terminal_violation);
        let _ = writeln!(s, "endpoint_error      {:.3e}", self.endpoint_error);
        let _ = writeln!(s, "endpoint_residual   {:.3e}", self.endpoint_residual);
        if let Some(h) = self.hamiltonian_residual {
            let _ = writeln!(s, "hamiltonian_residual {:.3e}", h);
        }
        let _ = writeln!(s, "usc                 a = {:.6} {}", self.usc_distance, self.usc_verdict);
        let _ = writeln!(s, "iterations          {}", self.iterations);
        let _ = writeln!(s, "restarts            {}", self.restarts);
        let _ = writeln!(s, "converged           {}", self.converged);
        let _ = writeln!(s, "pass                {}", self.pass);
        s
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SweepRowJson {
    pub lambda: f64,
    pub objective: f64,
    pub penalized: f64,
    pub terminal_violation: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SweepJson {
    pub problem: String,
    pub rows: Vec<SweepRowJson>,
    pub exactness_threshold: Option<f64>,
    pub violation_monotone_nonincreasing: bool,
}

impl SweepJson {
    pub fn new(problem: &str, table: &SweepTable) -> Self {
        let rows: Vec<SweepRowJson> = table
            .rows
            .iter()
            .map(|r| SweepRowJson {
                lambda: r.lambda,
                objective: r.objective,
                penalized: r.penalized,
                terminal_violation: r.terminal_violation,
                converged: r.converged,
            })
            .collect();
        // Trend check with a small slack for violations at roundoff scale.
        let monotone = rows
            .windows(2)
            .all(|w| w[1].terminal_violation <= w[0].terminal_violation + 1e-9);
        SweepJson {
            problem: problem.to_string(),
            rows,
            exactness_threshold: table.exactness_threshold,
            violation_monotone_nonincreasing: monotone,
        }
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "problem {}", self.problem);
        let _ = writeln!(s, "{:>12}  {:>12}  {:>12}  {:>12}  conv", "lambda", "objective", "penalized", "violation");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>12.4}  {:>12.6}  {:>12.6}  {:>12.3e}  {}",
                r.lambda, r.objective, r.penalized, r.terminal_violation, r.converged
            );
        }
        match self.exactness_threshold {
            Some(l) => {
                let _ = writeln!(s, "empirical exactness threshold: lambda = {l}");
            }
            None => {
                let _ = writeln!(s, "empirical exactness threshold: not reached");
            }
        }
        if self.violation_monotone_nonincreasing {
            let _ = writeln!(s, "violation trend: non-increasing in lambda");
        } else {
            let _ = writeln!(s, "violation trend: NOT monotone");
        }
        s
    }
}

/// `t,x1,...,xn,u1,...,um` with one row per node; the terminal node repeats
/// the last interval's control. Numbers use the shortest round-trip
/// representation.
pub fn trajectory_csv(traj: &Trajectory, control: &ControlGrid) -> String {
    let n_states = traj.states.ncols();
    let m = control.control_dim();
    let mut s = String::from("t");
    for i in 1..=n_states {
        let _ = write!(s, ",x{i}");
    }
    for i in 1..=m {
        let _ = write!(s, ",u{i}");
    }
    s.push('\n');
    for (k, &t) in traj.times.iter().enumerate() {
        let _ = write!(s, "{t}");
        for i in 0..n_states {
            let _ = write!(s, ",{}", traj.states[(k, i)]);
        }
        let u = control.node_value(k);
        for i in 0..m {
            let _ = write!(s, ",{}", u[i]);
        }
        s.push('\n');
    }
    s
}

/// `t,psi1,...,psin`, one row per node.
pub fn adjoint_csv(adjoint: &AdjointTrajectory) -> String {
    let n = adjoint.psi.ncols();
    let mut s = String::from("t");
    for i in 1..=n {
        let _ = write!(s, ",psi{i}");
    }
    s.push('\n');
    for (k, &t) in adjoint.times.iter().enumerate() {
        let _ = write!(s, "{t}");
        for i in 0..n {
            let _ = write!(s, ",{}", adjoint.psi[(k, i)]);
        }
        s.push('\n');
    }
    s
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), String> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}
