//! Shared fixtures for the benchmarks.

use fham_core::{Backend, DiscreteOperator, Field, Grid1D};

/// Restricted operator on `(-1, 1)` with `n` interior nodes.
pub fn operator(n: usize, s: f64) -> DiscreteOperator {
    let grid = Grid1D::new(-1.0, 1.0, n).expect("valid grid");
    DiscreteOperator::assemble(&grid, s, Backend::Restricted).expect("operator assembles")
}

/// Smooth positive field with a sign-definite image under the operator.
pub fn bump(op: &DiscreteOperator) -> Field {
    op.torsion()
}
