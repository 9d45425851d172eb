//! Uniform interior grid on an interval with zero exterior data.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};

/// Nodal values at the interior nodes; the extension outside `(a, b)` is zero.
pub type Field = DVector<f64>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid1D {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub h: f64,
    pub nodes: Vec<f64>,
    /// Distance to the boundary, `min(x - a, b - x)`.
    pub delta: Vec<f64>,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::config(format!("endpoints must be finite, got ({a}, {b})")));
        }
        if b <= a {
            return Err(Error::config(format!("interval must satisfy b > a, got ({a}, {b})")));
        }
        if n == 0 {
            return Err(Error::config("grid needs at least one interior node"));
        }
        let h = (b - a) / (n + 1) as f64;
        let nodes: Vec<f64> = (1..=n).map(|i| a + i as f64 * h).collect();
        // Index-based distances keep delta exactly palindromic.
        let delta = (1..=n).map(|i| i.min(n + 1 - i) as f64 * h).collect();
        Ok(Grid1D { a, b, n, h, nodes, delta })
    }

    /// Weight of each interior node in the rectangle rule.
    pub fn quad_weight(&self) -> f64 {
        self.h
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn half_length(&self) -> f64 {
        0.5 * (self.b - self.a)
    }

    pub fn field<F: Fn(f64) -> f64>(&self, f: F) -> Field {
        Field::from_iterator(self.n, self.nodes.iter().map(|&x| f(x)))
    }

    pub fn zeros(&self) -> Field {
        Field::zeros(self.n)
    }

    /// Quadrature inner product `h * sum(u_i w_i)`.
    pub fn inner(&self, u: &Field, w: &Field) -> f64 {
        self.h * u.dot(w)
    }

    /// Quadrature integral `h * sum(u_i)`.
    pub fn integrate(&self, u: &Field) -> f64 {
        self.h * u.sum()
    }

    pub(crate) fn check(&self, u: &Field) -> Result<()> {
        if u.len() != self.n {
            return Err(Error::SizeMismatch { expected: self.n, got: u.len() });
        }
        Ok(())
    }
}

/// Exponent selector for [`weighted_norm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    L(f64),
    Inf,
}

/// Discrete `L^r` norm `(h * sum |u_i|^r)^(1/r)`, or the max norm.
pub fn weighted_norm(grid: &Grid1D, u: &Field, r: Norm) -> Result<f64> {
    grid.check(u)?;
    match r {
        Norm::Inf => Ok(u.amax()),
        Norm::L(r) if r.is_finite() && r >= 1.0 => {
            if r == 2.0 {
                return Ok((grid.h * u.norm_squared()).sqrt());
            }
            let sum: f64 = u.iter().map(|x| x.abs().powf(r)).sum();
            Ok((grid.h * sum).powf(1.0 / r))
        }
        Norm::L(r) => Err(Error::domain(format!("norm exponent must be >= 1, got {r}"))),
    }
}

/// `h * sum |u_i|^r`, the `r`-th power of the discrete norm, for any `r > 0`.
pub fn power_sum(grid: &Grid1D, u: &Field, r: f64) -> f64 {
    grid.h * u.iter().map(|x| x.abs().powf(r)).sum::<f64>()
}

/// Discrete `L^2` norm; shorthand used throughout the solvers.
pub fn l2(grid: &Grid1D, u: &Field) -> f64 {
    (grid.h * u.norm_squared()).sqrt()
}

/// Smallest value of `u_i / delta_i^s`. A negative result means `u` is
/// negative somewhere.
pub fn hopf_ratio(grid: &Grid1D, u: &Field, s: f64) -> Result<f64> {
    grid.check(u)?;
    Ok(u
        .iter()
        .zip(&grid.delta)
        .map(|(&ui, &d)| ui / d.powf(s))
        .fold(f64::INFINITY, f64::min))
}

/// Node-reversed copy of `u`.
pub fn reversed(u: &Field) -> Field {
    Field::from_iterator(u.len(), u.iter().rev().copied())
}
