use thiserror::Error;

use crate::dual::{CriticalPair, MpaTelemetry};
use crate::lane_emden::GroundState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("size mismatch: expected {expected} nodes, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    /// Newton inversion of the gradient map stalled. `best` is the best
    /// iterate found; `node` is set when raised from a field evaluation.
    #[error(
        "conjugate inversion did not converge at (f, g) = ({f:e}, {g:e}): residual {residual:e}{}",
        node.map(|i| format!(" (node {i})")).unwrap_or_default()
    )]
    ConjugateNonconvergence {
        f: f64,
        g: f64,
        best: (f64, f64),
        residual: f64,
        node: Option<usize>,
    },

    #[error("ground-state minimization stopped after {iterations} iterations with free gradient {grad_norm:e}")]
    GroundStateNonconvergence {
        iterations: usize,
        grad_norm: f64,
        best: Box<GroundState>,
    },

    #[error("mountain pass stopped after {} iterations with gradient {:e}", telemetry.iterations, best.grad_norm)]
    MountainPassNonconvergence {
        best: Box<CriticalPair>,
        telemetry: MpaTelemetry,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
