#![allow(clippy::needless_range_loop)]

//! Exact-penalty toolkit for Mayer-form optimal control problems.
//!
//! The crate solves problems of the form: minimize a terminal cost
//! `Φ0(x(T), T)` subject to dynamics `x' = f(x, u, t)`, a fixed initial
//! state, box-constrained controls, and terminal equality / inequality
//! constraints, with the terminal time either fixed or free. Constraint
//! violations enter through an exact penalty whose terminal part is the max
//! over `|Φ_k|` and `Φ_j`; dynamics are satisfied by construction under
//! direct transcription.
//!
//! Module map:
//! - [`model`]: problem data, validation, built-in benchmark registry.
//! - [`discretize`]: piecewise-constant control grids, RK4 state and
//!   backward adjoint integration, trapezoidal L2 quadrature.
//! - [`penalty`]: terminal penalty, its subdifferential generators, the
//!   dynamics-residual norm and gradient, and the penalized objective.
//! - [`regularity`]: min-norm point of a hull, Gordan certificates,
//!   LICQ / MFCQ, and the separation-condition verdict over probes.
//! - [`pmp`]: Hamiltonian, multiplier recovery, transversality residuals
//!   for every endpoint regime, bang-bang synthesis.
//! - [`solver`]: Nelder–Mead direct transcription solver and the
//!   penalty-weight sweep.
//! - [`bench`]: closed-form oscillator solution and the end-to-end
//!   benchmark run.

pub mod bench;
pub mod discretize;
pub mod error;
pub mod model;
pub mod penalty;
pub mod pmp;
pub mod regularity;
pub mod solver;

pub use error::{Error, Result};
