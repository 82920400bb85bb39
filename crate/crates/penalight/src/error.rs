//! Crate-wide error type.

use std::fmt;

use crate::regularity::MinNormResult;

#[derive(Debug)]
pub enum Error {
    /// Registry lookup failed; carries the known problem names.
    UnknownProblem { name: String, known: Vec<String> },
    /// An argument violates a documented precondition (shape, sign, range).
    InvalidArgument(String),
    /// State or adjoint integration produced a non-finite value.
    Divergence { node: usize },
    /// The dynamics residual norm is below the division guard, so the
    /// normalized-residual gradient is undefined.
    NearFeasible { phi_diff: f64 },
    /// The requested computation needs data the problem does not carry
    /// (e.g. a gradient for a nonsmooth constraint at an active point).
    Unsupported(String),
    /// Minimum-norm point requested over an empty generator set.
    EmptyHull,
    /// The min-norm iteration hit its cycle cap; carries the best point found.
    MinNormStalled { best: MinNormResult },
    /// The hull distance falls in the refusal band between the two
    /// certificate branches; neither alternative can be certified.
    BorderlineCertificate { distance: f64 },
    /// No supplied probe point had a positive terminal penalty.
    InsufficientProbes,
    /// The operation was called in the wrong problem regime.
    Misuse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnknownProblem { name, known } => {
                write!(f, "unknown problem '{name}'; known problems: {}", known.join(", "))
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::Divergence { node } => {
                write!(f, "integration diverged: non-finite state at node {node}")
            }
            Error::NearFeasible { phi_diff } => write!(
                f,
                "dynamics residual norm {phi_diff:.3e} is below the division guard; \
                 the normalized-residual gradient is undefined near feasibility"
            ),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            Error::EmptyHull => write!(f, "minimum-norm point requires a nonempty generator set"),
            Error::MinNormStalled { best } => write!(
                f,
                "min-norm iteration cap reached; best distance {:.6e}",
                best.distance
            ),
            Error::BorderlineCertificate { distance } => write!(
                f,
                "hull distance {distance:.3e} lies in the certificate refusal band"
            ),
            Error::InsufficientProbes => {
                write!(f, "no probe point with positive terminal penalty was supplied")
            }
            Error::Misuse(msg) => write!(f, "misuse: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
