//! Nonlinearities `H(u, v)` driving the system
//! `(-Δ)^s u = H_v(u, v)`, `(-Δ)^s v = H_u(u, v)`.

mod classify;
mod conjugate;
mod hypotheses;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

pub use classify::{classify_exponents, ExponentVerdict, BOUNDARY_TOL};
pub use conjugate::{
    conjugate_field, conjugate_hessian, conjugate_point, conjugate_point_newton, ConjugateField,
    ConjugatePoint,
};
pub use hypotheses::{
    sandwich_constants, verify_hypotheses, Hypothesis, HypothesisOutcome, HypothesisReport,
    Sandwich,
};

/// `sign(x) |x|^r`, continuous at zero for every `r > 0`.
#[inline]
pub fn signed_pow(x: f64, r: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(r)
    }
}

/// Floor applied to `|x|` before raising to a negative power, so second
/// derivatives stay finite at the axes.
const HESSIAN_FLOOR: f64 = 1e-150;

#[inline]
fn abs_pow_floor(x: f64, r: f64) -> f64 {
    if r >= 0.0 {
        x.abs().powf(r)
    } else {
        x.abs().max(HESSIAN_FLOOR).powf(r)
    }
}

/// Value and gradient of `H` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HValue {
    pub h: f64,
    pub hu: f64,
    pub hv: f64,
}

/// User-supplied `(u, v) -> (H, H_u, H_v)`.
pub type CustomFn = dyn Fn(f64, f64) -> std::result::Result<(f64, f64, f64), String> + Send + Sync;

#[derive(Clone)]
pub enum HamiltonianKind {
    /// `|u|^{p+1}/(p+1) + |v|^{q+1}/(q+1)`
    LaneEmden,
    /// `|u|^{p+1} + |v|^{q+1} + eps |u|^{a_c} |v|^{b_c}`
    CoupledEps { eps: f64, a_c: f64, b_c: f64 },
    Custom { name: String, hooks: Arc<CustomFn> },
}

impl fmt::Debug for HamiltonianKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HamiltonianKind::LaneEmden => f.write_str("LaneEmden"),
            HamiltonianKind::CoupledEps { eps, a_c, b_c } => f
                .debug_struct("CoupledEps")
                .field("eps", eps)
                .field("a_c", a_c)
                .field("b_c", b_c)
                .finish(),
            HamiltonianKind::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HamiltonianSpec {
    pub kind: HamiltonianKind,
    pub p: f64,
    pub q: f64,
    /// Weight used by the (H7) check.
    pub theta: f64,
}

/// Serializable summary of a [`HamiltonianSpec`].
#[derive(Debug, Clone, Serialize)]
pub struct HamiltonianSummary {
    pub kind: String,
    pub p: f64,
    pub q: f64,
    pub eps: Option<f64>,
    pub a_c: Option<f64>,
    pub b_c: Option<f64>,
    pub theta: f64,
}

fn check_exponents(p: f64, q: f64) -> Result<()> {
    if !(p > 0.0 && p.is_finite() && q > 0.0 && q.is_finite()) {
        return Err(Error::domain(format!("exponents must satisfy p, q > 0, got p = {p}, q = {q}")));
    }
    Ok(())
}

/// Default (H7) weight `(q+1)/(p+q+2)`.
pub fn default_theta(p: f64, q: f64) -> f64 {
    (q + 1.0) / (p + q + 2.0)
}

impl HamiltonianSpec {
    pub fn lane_emden(p: f64, q: f64) -> Result<Self> {
        check_exponents(p, q)?;
        Ok(HamiltonianSpec { kind: HamiltonianKind::LaneEmden, p, q, theta: default_theta(p, q) })
    }

    pub fn coupled(p: f64, q: f64, eps: f64, a_c: f64, b_c: f64) -> Result<Self> {
        check_exponents(p, q)?;
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::domain(format!("coupling strength must be >= 0, got {eps}")));
        }
        if !(a_c > 1.0 && b_c > 1.0) {
            return Err(Error::domain(format!(
                "coupling exponents must exceed 1, got a_c = {a_c}, b_c = {b_c}"
            )));
        }
        let identity = a_c / (p + 1.0) + b_c / (q + 1.0);
        if (identity - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!(
                "coupling exponents must satisfy a_c/(p+1) + b_c/(q+1) = 1, got {identity}"
            )));
        }
        Ok(HamiltonianSpec {
            kind: HamiltonianKind::CoupledEps { eps, a_c, b_c },
            p,
            q,
            theta: default_theta(p, q),
        })
    }

    /// Symmetric coupling exponents `a_c = (p+1)/2`, `b_c = (q+1)/2`.
    pub fn coupled_symmetric(p: f64, q: f64, eps: f64) -> Result<Self> {
        Self::coupled(p, q, eps, 0.5 * (p + 1.0), 0.5 * (q + 1.0))
    }

    pub fn custom<F>(name: impl Into<String>, p: f64, q: f64, hooks: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> std::result::Result<(f64, f64, f64), String> + Send + Sync + 'static,
    {
        check_exponents(p, q)?;
        Ok(HamiltonianSpec {
            kind: HamiltonianKind::Custom { name: name.into(), hooks: Arc::new(hooks) },
            p,
            q,
            theta: default_theta(p, q),
        })
    }

    pub fn with_theta(mut self, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::domain(format!("theta must lie in (0,1), got {theta}")));
        }
        self.theta = theta;
        Ok(self)
    }

    pub fn is_lane_emden(&self) -> bool {
        matches!(self.kind, HamiltonianKind::LaneEmden)
    }

    /// Coupling exponents used by the (H5) upper bound.
    pub fn coupling_exponents(&self) -> (f64, f64) {
        match self.kind {
            HamiltonianKind::CoupledEps { a_c, b_c, .. } => (a_c, b_c),
            _ => (0.5 * (self.p + 1.0), 0.5 * (self.q + 1.0)),
        }
    }

    pub fn summary(&self) -> HamiltonianSummary {
        let (kind, eps, a_c, b_c) = match &self.kind {
            HamiltonianKind::LaneEmden => ("lane_emden".to_string(), None, None, None),
            HamiltonianKind::CoupledEps { eps, a_c, b_c } => {
                ("coupled_eps".to_string(), Some(*eps), Some(*a_c), Some(*b_c))
            }
            HamiltonianKind::Custom { name, .. } => (format!("custom:{name}"), None, None, None),
        };
        HamiltonianSummary { kind, p: self.p, q: self.q, eps, a_c, b_c, theta: self.theta }
    }

    /// `H(u, v)` with both partial derivatives.
    pub fn eval(&self, u: f64, v: f64) -> Result<HValue> {
        let (p, q) = (self.p, self.q);
        match &self.kind {
            HamiltonianKind::LaneEmden => {
                let hu = signed_pow(u, p);
                let hv = signed_pow(v, q);
                Ok(HValue { h: hu * u / (p + 1.0) + hv * v / (q + 1.0), hu, hv })
            }
            HamiltonianKind::CoupledEps { eps, a_c, b_c } => {
                let (ua, vb) = (u.abs().powf(*a_c), v.abs().powf(*b_c));
                let h = u.abs().powf(p + 1.0) + v.abs().powf(q + 1.0) + eps * ua * vb;
                let hu = (p + 1.0) * signed_pow(u, p) + eps * a_c * signed_pow(u, a_c - 1.0) * vb;
                let hv = (q + 1.0) * signed_pow(v, q) + eps * b_c * ua * signed_pow(v, b_c - 1.0);
                Ok(HValue { h, hu, hv })
            }
            HamiltonianKind::Custom { name, hooks } => {
                let (h, hu, hv) = hooks(u, v)
                    .map_err(|e| Error::Evaluation(format!("custom H `{name}` at ({u}, {v}): {e}")))?;
                if !(h.is_finite() && hu.is_finite() && hv.is_finite()) {
                    return Err(Error::Evaluation(format!(
                        "custom H `{name}` returned non-finite values at ({u}, {v})"
                    )));
                }
                Ok(HValue { h, hu, hv })
            }
        }
    }

    /// Symmetric Hessian `[[H_uu, H_uv], [H_uv, H_vv]]`. Custom hooks are
    /// differentiated by central differences of the gradient.
    pub fn hessian(&self, u: f64, v: f64) -> Result<[[f64; 2]; 2]> {
        let (p, q) = (self.p, self.q);
        match &self.kind {
            HamiltonianKind::LaneEmden => {
                Ok([[p * abs_pow_floor(u, p - 1.0), 0.0], [0.0, q * abs_pow_floor(v, q - 1.0)]])
            }
            HamiltonianKind::CoupledEps { eps, a_c, b_c } => {
                let (a, b) = (*a_c, *b_c);
                let mut huu = (p + 1.0) * p * abs_pow_floor(u, p - 1.0);
                let mut hvv = (q + 1.0) * q * abs_pow_floor(v, q - 1.0);
                let mut huv = 0.0;
                if *eps != 0.0 {
                    huu += eps * a * (a - 1.0) * abs_pow_floor(u, a - 2.0) * v.abs().powf(b);
                    hvv += eps * b * (b - 1.0) * u.abs().powf(a) * abs_pow_floor(v, b - 2.0);
                    huv = eps * a * b * signed_pow(u, a - 1.0) * signed_pow(v, b - 1.0);
                }
                Ok([[huu, huv], [huv, hvv]])
            }
            HamiltonianKind::Custom { .. } => {
                let step = |x: f64| 1e-6 * (1.0 + x.abs());
                let (du, dv) = (step(u), step(v));
                let up = self.eval(u + du, v)?;
                let um = self.eval(u - du, v)?;
                let vp = self.eval(u, v + dv)?;
                let vm = self.eval(u, v - dv)?;
                let huu = (up.hu - um.hu) / (2.0 * du);
                let hvv = (vp.hv - vm.hv) / (2.0 * dv);
                let huv = 0.5 * ((vp.hu - vm.hu) / (2.0 * dv) + (up.hv - um.hv) / (2.0 * du));
                Ok([[huu, huv], [huv, hvv]])
            }
        }
    }
}
