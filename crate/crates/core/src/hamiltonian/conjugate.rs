//! Legendre–Fenchel transform `H*(f, g) = sup_{(u,v)} { f u + g v - H(u, v) }`.
//!
//! For strictly convex, superlinear `H` the supremum is attained at the unique
//! `(u, v)` with `∇H(u, v) = (f, g)`, so `∇H* = (∇H)^{-1}` and
//! `H*(f, g) = f u + g v - H(u, v)`. Lane–Emden nonlinearities use the closed
//! form; everything else inverts `∇H` by damped Newton.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D};

use super::{signed_pow, HamiltonianKind, HamiltonianSpec};

const MAX_ITER: usize = 200;
const MAX_HALVINGS: usize = 60;
const ARMIJO: f64 = 1e-4;
const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugatePoint {
    pub hstar: f64,
    pub u: f64,
    pub v: f64,
}

pub fn conjugate_point(spec: &HamiltonianSpec, f: f64, g: f64) -> Result<ConjugatePoint> {
    if !(f.is_finite() && g.is_finite()) {
        return Err(Error::domain(format!("conjugate evaluated at non-finite ({f}, {g})")));
    }
    match spec.kind {
        HamiltonianKind::LaneEmden => {
            let (p, q) = (spec.p, spec.q);
            let u = signed_pow(f, 1.0 / p);
            let v = signed_pow(g, 1.0 / q);
            // p/(p+1) |f|^{1+1/p} = p/(p+1) f u
            let hstar = p / (p + 1.0) * f * u + q / (q + 1.0) * g * v;
            Ok(ConjugatePoint { hstar, u, v })
        }
        _ => conjugate_point_newton(spec, f, g),
    }
}

fn residual(spec: &HamiltonianSpec, u: f64, v: f64, f: f64, g: f64) -> Result<(f64, f64)> {
    let val = spec.eval(u, v)?;
    Ok((val.hu - f, val.hv - g))
}

/// Inverts `∇H(u, v) = (f, g)` by Newton's method with Armijo backtracking on
/// `|∇H(z) - (f, g)|^2`, regardless of whether a closed form exists.
pub fn conjugate_point_newton(spec: &HamiltonianSpec, f: f64, g: f64) -> Result<ConjugatePoint> {
    let (p, q) = (spec.p, spec.q);
    // Power-law warm start from the uncoupled diagonal growth.
    let (cu, cv) = match spec.kind {
        HamiltonianKind::Custom { .. } => (1.0, 1.0),
        _ => (p + 1.0, q + 1.0),
    };
    let mut z = (signed_pow(f / cu, 1.0 / p), signed_pow(g / cv, 1.0 / q));
    let scale = 1.0 + f.hypot(g);
    let tol = RESIDUAL_TOL * scale;

    let mut r = residual(spec, z.0, z.1, f, g)?;
    let mut merit = r.0 * r.0 + r.1 * r.1;
    let mut converged_at = None;

    for iter in 0..MAX_ITER {
        let norm = merit.sqrt();
        if norm <= tol && converged_at.is_none() {
            converged_at = Some(iter);
        }
        // Two polishing steps past the tolerance, then stop.
        if norm == 0.0 || converged_at.is_some_and(|k| iter >= k + 2) {
            break;
        }
        let hess = spec.hessian(z.0, z.1)?;
        let det = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
        let hnorm = hess[0][0].abs() + hess[1][1].abs() + 2.0 * hess[0][1].abs();
        // Gradient of the merit is H r (H symmetric).
        let grad_merit = (
            hess[0][0] * r.0 + hess[0][1] * r.1,
            hess[1][0] * r.0 + hess[1][1] * r.1,
        );
        let mut dir = if det.is_finite() && det.abs() > 1e-14 * hnorm * hnorm {
            (
                -(hess[1][1] * r.0 - hess[0][1] * r.1) / det,
                -(-hess[1][0] * r.0 + hess[0][0] * r.1) / det,
            )
        } else {
            (-grad_merit.0, -grad_merit.1)
        };
        let mut slope = 2.0 * (grad_merit.0 * dir.0 + grad_merit.1 * dir.1);
        if !(slope < 0.0) || !dir.0.is_finite() || !dir.1.is_finite() {
            dir = (-grad_merit.0, -grad_merit.1);
            slope = -2.0 * (grad_merit.0 * grad_merit.0 + grad_merit.1 * grad_merit.1);
        }

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let trial = (z.0 + t * dir.0, z.1 + t * dir.1);
            let rt = residual(spec, trial.0, trial.1, f, g)?;
            let mt = rt.0 * rt.0 + rt.1 * rt.1;
            if mt.is_finite() && (mt <= merit + ARMIJO * t * slope || (converged_at.is_some() && mt < merit)) {
                z = trial;
                r = rt;
                merit = mt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    let norm = merit.sqrt();
    if norm > tol {
        return Err(Error::ConjugateNonconvergence { f, g, best: z, residual: norm, node: None });
    }
    let h = spec.eval(z.0, z.1)?.h;
    Ok(ConjugatePoint { hstar: f * z.0 + g * z.1 - h, u: z.0, v: z.1 })
}

/// Hessian of `H*` at `(f, g) = ∇H(u, v)`, i.e. the inverse of `∇²H(u, v)`.
pub fn conjugate_hessian(spec: &HamiltonianSpec, u: f64, v: f64) -> Result<[[f64; 2]; 2]> {
    let hs = spec.hessian(u, v)?;
    let det = hs[0][0] * hs[1][1] - hs[0][1] * hs[1][0];
    if !(det.is_finite() && det > 0.0) {
        return Err(Error::Evaluation(format!(
            "Hessian of H is not positive definite at ({u}, {v}); H is not strictly convex there"
        )));
    }
    Ok([[hs[1][1] / det, -hs[0][1] / det], [-hs[1][0] / det, hs[0][0] / det]])
}

/// Nodewise conjugate of a pair of fields.
#[derive(Debug, Clone)]
pub struct ConjugateField {
    /// `h * sum H*(f_i, g_i)`
    pub total: f64,
    pub values: Field,
    pub u: Field,
    pub v: Field,
}

pub fn conjugate_field(spec: &HamiltonianSpec, grid: &Grid1D, f: &Field, g: &Field) -> Result<ConjugateField> {
    grid.check(f)?;
    grid.check(g)?;
    let n = grid.n;
    let mut values = Field::zeros(n);
    let mut u = Field::zeros(n);
    let mut v = Field::zeros(n);
    for i in 0..n {
        let cp = conjugate_point(spec, f[i], g[i]).map_err(|e| match e {
            Error::ConjugateNonconvergence { f, g, best, residual, .. } => {
                Error::ConjugateNonconvergence { f, g, best, residual, node: Some(i) }
            }
            other => other,
        })?;
        values[i] = cp.hstar;
        u[i] = cp.u;
        v[i] = cp.v;
    }
    Ok(ConjugateField { total: grid.h * values.sum(), values, u, v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quadratic_is_self_dual() {
        let h = HamiltonianSpec::lane_emden(1.0, 1.0).unwrap();
        for &(f, g) in &[(0.3, -1.2), (2.0, 0.0), (-4.0, 5.5)] {
            let cp = conjugate_point(&h, f, g).unwrap();
            assert_relative_eq!(cp.hstar, 0.5 * (f * f + g * g), max_relative = 1e-15);
        }
    }

    #[test]
    fn power_law_closed_form() {
        let h = HamiltonianSpec::lane_emden(2.0, 0.5).unwrap();
        let (f, g) = (-3.0_f64, 0.8_f64);
        let cp = conjugate_point(&h, f, g).unwrap();
        let expected = 2.0 / 3.0 * f.abs().powf(1.5) + 0.5 / 1.5 * g.abs().powf(3.0);
        assert_relative_eq!(cp.hstar, expected, max_relative = 1e-14);
        assert_relative_eq!(cp.u, -(3.0_f64).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(cp.v, 0.64, max_relative = 1e-14);
    }

    #[test]
    fn newton_agrees_with_closed_form() {
        for &(p, q) in &[(2.0, 2.0), (0.5, 3.0), (1.0, 0.4)] {
            let h = HamiltonianSpec::lane_emden(p, q).unwrap();
            for &(f, g) in &[(1.7, -0.4), (-0.02, 3.5), (0.0, 1.0), (0.0, 0.0)] {
                let a = conjugate_point(&h, f, g).unwrap();
                let b = conjugate_point_newton(&h, f, g).unwrap();
                assert!((a.hstar - b.hstar).abs() <= 1e-10 * (1.0 + a.hstar.abs()));
                assert!((a.u - b.u).abs() <= 1e-10 * (1.0 + a.u.abs()), "{p} {q} {f} {g}");
                assert!((a.v - b.v).abs() <= 1e-10 * (1.0 + a.v.abs()));
            }
        }
    }

    #[test]
    fn scaling_rule() {
        // (a H)*(w) = a H*(w / a)
        let a = 3.5;
        let base = HamiltonianSpec::lane_emden(2.0, 3.0).unwrap();
        let inner = base.clone();
        let scaled = HamiltonianSpec::custom("scaled", 2.0, 3.0, move |u, v| {
            let val = inner.eval(u, v).map_err(|e| e.to_string())?;
            Ok((a * val.h, a * val.hu, a * val.hv))
        })
        .unwrap();
        for &(f, g) in &[(1.0, 2.0), (-0.7, 0.1), (5.0, -3.0)] {
            let lhs = conjugate_point(&scaled, f, g).unwrap().hstar;
            let rhs = a * conjugate_point(&base, f / a, g / a).unwrap().hstar;
            assert_relative_eq!(lhs, rhs, max_relative = 1e-9);
        }
    }

    #[test]
    fn coupled_roundtrip_and_fenchel_young() {
        let h = HamiltonianSpec::coupled_symmetric(2.0, 2.0, 0.3).unwrap();
        for &(u, v) in &[(0.4, 1.1), (-2.0, 0.3), (0.0, -1.0), (1e-3, 2.0)] {
            let val = h.eval(u, v).unwrap();
            let cp = conjugate_point(&h, val.hu, val.hv).unwrap();
            assert!((cp.u - u).abs() < 1e-9 && (cp.v - v).abs() < 1e-9, "({u}, {v}) -> {cp:?}");
            let fy = cp.hstar + val.h - val.hu * u - val.hv * v;
            assert!(fy.abs() < 1e-10 * (1.0 + val.h.abs()));
        }
    }

    #[test]
    fn nonconvex_coupling_reports_failure_or_valid_root() {
        // Strong coupling breaks strict convexity; inversion must never
        // return a point that does not invert the gradient.
        let h = HamiltonianSpec::coupled(2.0, 2.0, 1e3, 1.5, 1.5).unwrap();
        match conjugate_point(&h, 1.0, -1.0) {
            Ok(cp) => {
                let val = h.eval(cp.u, cp.v).unwrap();
                assert!((val.hu - 1.0).abs() < 1e-9 && (val.hv + 1.0).abs() < 1e-9);
            }
            Err(Error::ConjugateNonconvergence { residual, .. }) => assert!(residual > 0.0),
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn field_conjugate_zero_and_node_index() {
        let grid = Grid1D::new(0.0, 1.0, 5).unwrap();
        let h = HamiltonianSpec::lane_emden(2.0, 2.0).unwrap();
        let z = grid.zeros();
        let cf = conjugate_field(&h, &grid, &z, &z).unwrap();
        assert_eq!(cf.total, 0.0);
        assert_eq!(cf.u, z);
        assert_eq!(cf.v, z);

        let failing = HamiltonianSpec::custom("flat", 2.0, 2.0, |_, _| Ok((0.0, 0.0, 0.0))).unwrap();
        let mut f = grid.zeros();
        f[3] = 1.0;
        match conjugate_field(&failing, &grid, &f, &z) {
            Err(Error::ConjugateNonconvergence { node, .. }) => assert_eq!(node, Some(3)),
            other => panic!("expected nonconvergence, got {other:?}"),
        }
    }
}
