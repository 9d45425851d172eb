//! Discrete fractional Laplacian on an interval with zero exterior data.
//!
//! Two realizations are provided:
//!
//! * [`Backend::Restricted`]: the fractional centered-difference scheme
//!   `(L u)_i = h^{-2s} sum_j g_{|i-j|} u_j`, where exterior nodes carry zero.
//!   The weights come from `g_0 = Γ(2s+1)/Γ(s+1)^2` and the ratio recurrence
//!   `g_{k+1} = g_k (k - s)/(k + 1 + s)`. For `s < 1` every off-diagonal weight
//!   is negative and the full two-sided sum of weights vanishes, so every
//!   truncated row sum is positive: the matrix is a strictly diagonally
//!   dominant M-matrix.
//! * [`Backend::Spectral`]: the `s`-th power of the classical three-point
//!   Dirichlet Laplacian. This is a different operator and is kept for
//!   cross-checks only.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Restricted,
    Spectral,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Restricted => f.write_str("restricted"),
            Backend::Spectral => f.write_str("spectral"),
        }
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "restricted" => Ok(Backend::Restricted),
            "spectral" => Ok(Backend::Spectral),
            other => Err(Error::config(format!("unknown operator backend `{other}`"))),
        }
    }
}

/// Fractional centered-difference weights `g_0, ..., g_{len-1}`.
pub fn centered_difference_weights(s: f64, len: usize) -> Vec<f64> {
    let mut g = Vec::with_capacity(len);
    if len == 0 {
        return g;
    }
    g.push(gamma(2.0 * s + 1.0) / gamma(s + 1.0).powi(2));
    for k in 0..len - 1 {
        let kf = k as f64;
        g.push(g[k] * (kf - s) / (kf + 1.0 + s));
    }
    g
}

/// Symmetric positive-definite matrix realization of `(-Δ)^s` on a grid.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub grid: Grid1D,
    pub s: f64,
    pub backend: Backend,
    pub matrix: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    green: OnceLock<DMatrix<f64>>,
}

impl DiscreteOperator {
    pub fn assemble(grid: &Grid1D, s: f64, backend: Backend) -> Result<Self> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::domain(format!("s must lie in (0,1], got {s}")));
        }
        let n = grid.n;
        let matrix = match backend {
            Backend::Restricted => {
                let g = centered_difference_weights(s, n);
                let scale = grid.h.powf(-2.0 * s);
                DMatrix::from_fn(n, n, |i, j| scale * g[i.abs_diff(j)])
            }
            Backend::Spectral => {
                // Closed-form eigenpairs of tridiag(-1, 2, -1) / h^2.
                let m = (n + 1) as f64;
                let norm = (2.0 / m).sqrt();
                let modes = DMatrix::from_fn(n, n, |i, j| {
                    norm * (((i + 1) * (j + 1)) as f64 * std::f64::consts::PI / m).sin()
                });
                let mu = DVector::from_fn(n, |j, _| {
                    let t = ((j + 1) as f64 * std::f64::consts::PI / (2.0 * m)).sin();
                    (4.0 * t * t / (grid.h * grid.h)).powf(s)
                });
                let scaled = DMatrix::from_fn(n, n, |i, j| modes[(i, j)] * mu[j]);
                let full = &scaled * modes.transpose();
                // Remove the roundoff asymmetry of the product.
                (&full + full.transpose()) * 0.5
            }
        };
        let chol = Cholesky::new(matrix.clone()).ok_or_else(|| {
            Error::Factorization(format!(
                "operator (n = {n}, s = {s}, backend = {backend}) is not positive definite"
            ))
        })?;
        Ok(DiscreteOperator { grid: grid.clone(), s, backend, matrix, chol, green: OnceLock::new() })
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    /// Matrix-vector product `L u`.
    pub fn apply(&self, u: &Field) -> Result<Field> {
        self.grid.check(u)?;
        Ok(&self.matrix * u)
    }

    /// Solves `L u = f`, i.e. applies the solution operator of the Dirichlet problem.
    pub fn solve(&self, f: &Field) -> Result<Field> {
        self.grid.check(f)?;
        let u = self.chol.solve(f);
        if u.iter().all(|x| x.is_finite()) {
            Ok(u)
        } else {
            Err(Error::Factorization(format!(
                "non-finite solution from Cholesky solve (n = {}, |f|_inf = {:e})",
                self.n(),
                f.amax()
            )))
        }
    }

    /// Dense inverse of the operator matrix, computed once on first use.
    pub fn green_matrix(&self) -> &DMatrix<f64> {
        self.green.get_or_init(|| {
            let inv = self.chol.inverse();
            (&inv + inv.transpose()) * 0.5
        })
    }

    /// Solution of `L xi = 1`.
    pub fn torsion(&self) -> Field {
        self.chol.solve(&Field::from_element(self.n(), 1.0))
    }

    pub fn eigendecompose(&self) -> SpectralData {
        SpectralData::from_operator(self)
    }
}

/// Closed-form torsion function of the restricted operator on an interval:
/// `C_s (R^2 - (x - c)^2)^s` with `C_s = √π / (4^s Γ(s + 1/2) Γ(s + 1))`.
pub fn torsion_exact(grid: &Grid1D, s: f64) -> Field {
    let c = grid.midpoint();
    let r = grid.half_length();
    let cs = std::f64::consts::PI.sqrt() / (4f64.powf(s) * gamma(s + 0.5) * gamma(s + 1.0));
    grid.field(|x| cs * (r * r - (x - c) * (x - c)).max(0.0).powf(s))
}

/// Eigenpairs of a [`DiscreteOperator`], ascending, with modes orthonormal in
/// the quadrature inner product.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub grid: Grid1D,
    pub s: f64,
    pub lambdas: DVector<f64>,
    /// Column `j` holds mode `j`.
    pub modes: DMatrix<f64>,
}

impl SpectralData {
    fn from_operator(op: &DiscreteOperator) -> Self {
        let n = op.n();
        let eig = SymmetricEigen::new(op.matrix.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let inv_sqrt_h = 1.0 / op.grid.h.sqrt();
        let mut modes = DMatrix::zeros(n, n);
        let mut lambdas = DVector::zeros(n);
        for (dst, &src) in order.iter().enumerate() {
            lambdas[dst] = eig.eigenvalues[src];
            let col = eig.eigenvectors.column(src);
            let cutoff = 1e-10 * col.amax();
            let sign = col
                .iter()
                .find(|x| x.abs() > cutoff)
                .map(|x| x.signum())
                .unwrap_or(1.0);
            modes.set_column(dst, &(col * (sign * inv_sqrt_h)));
        }
        SpectralData { grid: op.grid.clone(), s: op.s, lambdas, modes }
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn mode(&self, j: usize) -> Field {
        self.modes.column(j).into_owned()
    }

    /// Quadrature coefficients `<u, φ_j>`.
    pub fn coefficients(&self, u: &Field) -> DVector<f64> {
        self.modes.tr_mul(u) * self.grid.h
    }

    /// `sum_j c_j φ_j`.
    pub fn synthesize(&self, coeffs: &DVector<f64>) -> Field {
        &self.modes * coeffs
    }
}
