//! Variational solvers and numerical certificates for fractional Hamiltonian
//! systems
//!
//! ```text
//! (-Δ)^s u = H_v(u, v),   (-Δ)^s v = H_u(u, v)   in (a, b),
//! u = v = 0                                     outside (a, b).
//! ```
//!
//! * [`operator`]: the discrete fractional Laplacian, its Dirichlet solver and
//!   eigendecomposition.
//! * [`spectral`]: fractional powers `A^α`, the `E⁺ ⊕ E⁻` splitting and the
//!   indefinite energy used as a criticality certificate.
//! * [`hamiltonian`]: nonlinearities, exponent classifiers, hypothesis
//!   falsification and the Legendre–Fenchel transform.
//! * [`dual`]: the dual functional `J(f, g) = ∫ H*(f, g) - ∫ g A f` and a
//!   mountain-pass search for its critical points.
//! * [`lane_emden`]: Nehari-manifold ground states of the Lane–Emden system.

pub mod dual;
pub mod error;
pub mod grid;
pub mod hamiltonian;
pub mod lane_emden;
pub mod operator;
mod polish;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{hopf_ratio, weighted_norm, Field, Grid1D, Norm};
pub use hamiltonian::{classify_exponents, ExponentVerdict, HamiltonianSpec};
pub use operator::{Backend, DiscreteOperator, SpectralData};
pub use spectral::{admissible_alpha_range, AlphaWindow, PairField};
