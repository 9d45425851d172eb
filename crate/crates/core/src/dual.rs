//! Dual formulation of the Hamiltonian system. With `𝒜` the inverse of the
//! discrete operator and `H*` the Legendre–Fenchel conjugate,
//!
//! ```text
//! J(f, g) = ∫ H*(f, g) - ∫ g 𝒜 f,     ∇J = (H*_f - 𝒜 g, H*_g - 𝒜 f).
//! ```
//!
//! For superlinear `H` (`pq > 1`) `J` has mountain-pass geometry and its
//! critical points give solutions through `(u, v) = ∇H*(f, g)`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{l2, Field};
use crate::hamiltonian::{conjugate_field, conjugate_hessian, HamiltonianSpec};
use crate::operator::DiscreteOperator;
use crate::polish::NewtonTrigger;
use crate::spectral::PairField;

const ARMIJO: f64 = 1e-4;
const RESPACE_FLOOR: f64 = 1e-4;
const LEVEL_SLACK: f64 = 1e-2;
const MAX_HALVINGS: usize = 60;
const ENDPOINT_DOUBLINGS: usize = 60;

#[derive(Debug, Clone, Serialize)]
pub struct MpaConfig {
    pub path_nodes: usize,
    pub max_outer: usize,
    pub step0: f64,
    /// Target for the gradient norm at the path maximizer.
    pub tol: f64,
    pub k_exp: f64,
    pub l_exp: f64,
    /// Kept for reproducibility records; the default path is deterministic.
    pub seed: u64,
    /// Gradient level, relative to `max(1, |(f, g)|)`, below which Newton
    /// polishing of the path maximizer is attempted.
    pub newton_switch: f64,
    /// Iterations without a 10% gradient improvement at the maximizer before
    /// Newton polishing is attempted anyway.
    pub stall_patience: usize,
}

impl MpaConfig {
    /// Defaults with path exponents chosen for `(p, q)`: `k = l = 2` when
    /// `p, q > 1`, otherwise `k/(k+l)` at the midpoint of the admissible
    /// window `(1/(q+1), p/(p+1))` with the smaller exponent set to 2.
    pub fn for_exponents(p: f64, q: f64) -> Result<Self> {
        let (lo, hi) = (1.0 / (q + 1.0), p / (p + 1.0));
        if !(lo < hi) {
            return Err(Error::config(format!(
                "no path exponents exist for (p, q) = ({p}, {q}); the dual method requires pq > 1"
            )));
        }
        let r = if lo < 0.5 && 0.5 < hi { 0.5 } else { 0.5 * (lo + hi) };
        let (k_exp, l_exp) = if r <= 0.5 { (2.0, 2.0 * (1.0 - r) / r) } else { (2.0 * r / (1.0 - r), 2.0) };
        let cfg = MpaConfig {
            path_nodes: 41,
            max_outer: 5000,
            step0: 1.0,
            tol: 1e-8,
            k_exp,
            l_exp,
            seed: 0,
            newton_switch: 1e-3,
            stall_patience: 300,
        };
        cfg.validate(p, q)?;
        Ok(cfg)
    }

    pub fn validate(&self, p: f64, q: f64) -> Result<()> {
        let (k, l) = (self.k_exp, self.l_exp);
        if !(k > 1.0 && l > 1.0) {
            return Err(Error::config(format!("path exponents must exceed 1, got k = {k}, l = {l}")));
        }
        let r = k / (k + l);
        if !(p / (p + 1.0) > r && q / (q + 1.0) > l / (k + l)) {
            return Err(Error::config(format!(
                "path exponents k = {k}, l = {l} violate p/(p+1) > k/(k+l) or q/(q+1) > l/(k+l) for (p, q) = ({p}, {q})"
            )));
        }
        if self.path_nodes < 3 {
            return Err(Error::config("path_nodes must be at least 3"));
        }
        if !(self.tol > 0.0 && self.step0 > 0.0) {
            return Err(Error::config("tol and step0 must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MpaTelemetry {
    pub iterations: usize,
    pub descent_steps: usize,
    pub newton_steps: usize,
    pub endpoint_rho: f64,
    pub endpoint_level: f64,
    /// Path maximum recorded every 100 outer iterations.
    pub level_trace: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalPair {
    #[serde(skip)]
    pub f: Field,
    #[serde(skip)]
    pub g: Field,
    pub level: f64,
    pub grad_norm: f64,
    #[serde(skip)]
    pub primal_u: Field,
    #[serde(skip)]
    pub primal_v: Field,
    pub r_u: f64,
    pub r_v: f64,
    pub telemetry: MpaTelemetry,
}

impl CriticalPair {
    /// `max(1, |f|_2, |g|_2)`, the magnitude the primal residuals are
    /// measured against.
    pub fn residual_scale(&self, op: &DiscreteOperator) -> f64 {
        1f64.max(l2(&op.grid, &self.f)).max(l2(&op.grid, &self.g))
    }
}

#[derive(Debug, Clone)]
pub struct JValue {
    pub value: f64,
    /// Quadrature representatives: `∂J/∂f_i = h * grad.u[i]`.
    pub grad: PairField,
    /// `∇H*(f, g)`
    pub primal: PairField,
}

impl JValue {
    pub fn grad_norm(&self, op: &DiscreteOperator) -> f64 {
        pair_norm(op, &self.grad)
    }
}

fn pair_norm(op: &DiscreteOperator, z: &PairField) -> f64 {
    l2(&op.grid, &z.u).hypot(l2(&op.grid, &z.v))
}

pub fn eval_j(op: &DiscreteOperator, spec: &HamiltonianSpec, f: &Field, g: &Field) -> Result<JValue> {
    let conj = conjugate_field(spec, &op.grid, f, g)?;
    let af = op.solve(f)?;
    let ag = op.solve(g)?;
    let value = conj.total - op.grid.inner(g, &af);
    Ok(JValue {
        value,
        grad: PairField { u: &conj.u - ag, v: &conj.v - af },
        primal: PairField { u: conj.u, v: conj.v },
    })
}

/// `(u, v) = ∇H*(f, g)` with residuals `|L u - g|_2` and `|L v - f|_2`.
pub fn recover_primal(
    op: &DiscreteOperator,
    spec: &HamiltonianSpec,
    f: &Field,
    g: &Field,
) -> Result<(Field, Field, f64, f64)> {
    let conj = conjugate_field(spec, &op.grid, f, g)?;
    let r_u = l2(&op.grid, &(op.apply(&conj.u)? - g));
    let r_v = l2(&op.grid, &(op.apply(&conj.v)? - f));
    Ok((conj.u, conj.v, r_u, r_v))
}

/// Endpoint `(ρ^k φ_1, ρ^l φ_1)` with `ρ` doubled from 1 until `J < 0`.
/// Returns the endpoint and `ρ`.
pub fn build_mpa_endpoint(
    op: &DiscreteOperator,
    spec: &HamiltonianSpec,
    cfg: &MpaConfig,
) -> Result<(Field, Field, f64)> {
    let phi1 = op.eigendecompose().mode(0);
    let mut rho = 1.0_f64;
    for _ in 0..=ENDPOINT_DOUBLINGS {
        let f = &phi1 * rho.powf(cfg.k_exp);
        let g = &phi1 * rho.powf(cfg.l_exp);
        if eval_j(op, spec, &f, &g)?.value < 0.0 {
            return Ok((f, g, rho));
        }
        rho *= 2.0;
    }
    Err(Error::config(format!(
        "J stayed nonnegative along the ray after {ENDPOINT_DOUBLINGS} doublings; the Hamiltonian does not look superlinear"
    )))
}

struct Node {
    z: PairField,
    value: f64,
}

fn eval_node(op: &DiscreteOperator, spec: &HamiltonianSpec, z: PairField) -> Result<Node> {
    let value = eval_j(op, spec, &z.u, &z.v)?.value;
    Ok(Node { z, value })
}

/// Redistributes the interior nodes along the polygonal path at equal
/// arc length in the metric `|dz| / (|z| + c)`, with `c` a small fraction of
/// the endpoint norm. Plain arc length would leave the ridge near the origin
/// unresolved when the endpoint is orders of magnitude farther out.
fn respace(op: &DiscreteOperator, spec: &HamiltonianSpec, path: &mut Vec<Node>) -> Result<()> {
    let m = path.len();
    let norms: Vec<f64> = path.iter().map(|node| pair_norm(op, &node.z)).collect();
    let c = RESPACE_FLOOR * norms[m - 1];
    let mut cum = vec![0.0; m];
    for j in 1..m {
        let mid = 0.5 * (norms[j] + norms[j - 1]);
        cum[j] = cum[j - 1] + pair_norm(op, &path[j].z.sub(&path[j - 1].z)) / (mid + c);
    }
    let total = cum[m - 1];
    if !(total > 0.0) {
        return Ok(());
    }
    let mut fresh = Vec::with_capacity(m);
    let mut seg = 0;
    for j in 1..m - 1 {
        let target = total * j as f64 / (m - 1) as f64;
        while seg + 1 < m - 1 && cum[seg + 1] < target {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let w = if len > 0.0 { (target - cum[seg]) / len } else { 0.0 };
        let z = path[seg].z.scale(1.0 - w).add(&path[seg + 1].z.scale(w));
        fresh.push(z);
    }
    let fresh = fresh.into_iter().map(|z| eval_node(op, spec, z)).collect::<Result<Vec<_>>>()?;
    // Interpolating across a thin ridge can drop the whole path below the
    // base level; keep the unevenly spaced path in that case.
    if fresh.iter().any(|node| node.value > 0.0) {
        path.splice(1..m - 1, fresh);
    }
    Ok(())
}

/// Newton's method on `∇J = 0` with the Jacobian
/// `[[H*_ff, H*_fg - 𝒜], [H*_gf - 𝒜, H*_gg]]` and a residual-norm line search.
fn dual_newton(
    op: &DiscreteOperator,
    spec: &HamiltonianSpec,
    mut z: PairField,
    tol: f64,
    max_steps: usize,
    steps: &mut usize,
) -> Result<Option<PairField>> {
    let n = op.n();
    let green = op.green_matrix();
    let mut cur = eval_j(op, spec, &z.u, &z.v)?;
    let mut res = cur.grad_norm(op);
    // Iterate past `tol` while it still pays, so that the primal residuals,
    // which amplify the dual gradient by the operator norm, are also small.
    let target = tol * 1e-3;
    for _ in 0..max_steps {
        if res <= target {
            break;
        }
        let mut jac = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            let d = conjugate_hessian(spec, cur.primal.u[i], cur.primal.v[i])?;
            jac[(i, i)] = d[0][0];
            jac[(i, n + i)] = d[0][1];
            jac[(n + i, i)] = d[1][0];
            jac[(n + i, n + i)] = d[1][1];
        }
        for i in 0..n {
            for j in 0..n {
                jac[(i, n + j)] -= green[(i, j)];
                jac[(n + i, j)] -= green[(i, j)];
            }
        }
        let rhs = Field::from_iterator(2 * n, cur.grad.u.iter().chain(cur.grad.v.iter()).map(|x| -x));
        let Some(step) = jac.lu().solve(&rhs) else {
            break;
        };
        let dz = PairField { u: step.rows(0, n).into_owned(), v: step.rows(n, n).into_owned() };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = z.add(&dz.scale(t));
            if let Ok(val) = eval_j(op, spec, &trial.u, &trial.v) {
                let r = val.grad_norm(op);
                if r.is_finite() && r < (1.0 - ARMIJO * t) * res {
                    z = trial;
                    cur = val;
                    res = r;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        *steps += 1;
        if !accepted {
            break;
        }
    }
    Ok((res <= tol).then_some(z))
}

/// Newton's method on the primal system `L u = H_v(u, v)`, `L v = H_u(u, v)`
/// started from `(u, v) = ∇H*(f, g)`. Smooth where the dual Jacobian is
/// singular (`p, q >= 1` and `f` or `g` crossing zero). Returns the dual
/// pair `∇H(u, v)` if it meets `tol`.
fn primal_newton(
    op: &DiscreteOperator,
    spec: &HamiltonianSpec,
    z: &PairField,
    tol: f64,
    max_steps: usize,
    steps: &mut usize,
) -> Result<Option<PairField>> {
    let n = op.n();
    let residual = |w: &PairField| -> Result<(PairField, f64)> {
        let mut r = PairField { u: op.apply(&w.u)?, v: op.apply(&w.v)? };
        for i in 0..n {
            let h = spec.eval(w.u[i], w.v[i])?;
            r.u[i] -= h.hv;
            r.v[i] -= h.hu;
        }
        let norm = pair_norm(op, &r);
        Ok((r, norm))
    };
    let conj = conjugate_field(spec, &op.grid, &z.u, &z.v)?;
    let mut w = PairField { u: conj.u, v: conj.v };
    let (mut r, mut res) = residual(&w)?;
    for _ in 0..max_steps {
        if res <= 1e-3 * tol {
            break;
        }
        let mut jac = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                jac[(i, j)] = op.matrix[(i, j)];
                jac[(n + i, n + j)] = op.matrix[(i, j)];
            }
            let hs = spec.hessian(w.u[i], w.v[i])?;
            // rows 0..n: L u - H_v, rows n..2n: L v - H_u
            jac[(i, i)] -= hs[1][0];
            jac[(i, n + i)] -= hs[1][1];
            jac[(n + i, i)] -= hs[0][0];
            jac[(n + i, n + i)] -= hs[0][1];
        }
        let rhs = Field::from_iterator(2 * n, r.u.iter().chain(r.v.iter()).map(|x| -x));
        let Some(step) = jac.lu().solve(&rhs) else {
            break;
        };
        let dw = PairField { u: step.rows(0, n).into_owned(), v: step.rows(n, n).into_owned() };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = w.add(&dw.scale(t));
            if let Ok((rt, nt)) = residual(&trial) {
                if nt.is_finite() && nt < (1.0 - ARMIJO * t) * res {
                    w = trial;
                    r = rt;
                    res = nt;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        *steps += 1;
        if !accepted {
            break;
        }
    }
    let mut dual = PairField::zeros(n);
    for i in 0..n {
        let h = spec.eval(w.u[i], w.v[i])?;
        dual.u[i] = h.hu;
        dual.v[i] = h.hv;
    }
    let gnorm = eval_j(op, spec, &dual.u, &dual.v)?.grad_norm(op);
    Ok((gnorm <= tol).then_some(dual))
}

/// Newton polishing in whichever variables keep the Jacobian bounded, with
/// the other formulation as fallback.
fn newton_polish(
    op: &DiscreteOperator,
    spec: &HamiltonianSpec,
    z: PairField,
    tol: f64,
    max_steps: usize,
    steps: &mut usize,
) -> Result<Option<PairField>> {
    let primal_first = spec.p >= 1.0 && spec.q >= 1.0;
    if primal_first {
        if let Some(w) = primal_newton(op, spec, &z, tol, max_steps, steps)? {
            return Ok(Some(w));
        }
        dual_newton(op, spec, z, tol, max_steps, steps)
    } else {
        if let Some(w) = dual_newton(op, spec, z.clone(), tol, max_steps, steps)? {
            return Ok(Some(w));
        }
        primal_newton(op, spec, &z, tol, max_steps, steps)
    }
}

/// Mountain-pass search: a path from 0 to the endpoint whose maximizing node
/// is moved downhill (Armijo backtracking on `J`), with arc-length
/// re-spacing after each move, finished by Newton polishing once the
/// gradient at the maximizer is small.
pub fn run_mountain_pass(op: &DiscreteOperator, spec: &HamiltonianSpec, cfg: &MpaConfig) -> Result<CriticalPair> {
    let (p, q) = (spec.p, spec.q);
    if !(p * q > 1.0) {
        return Err(Error::domain(format!(
            "the mountain-pass search requires pq > 1, got pq = {}; use the Nehari minimization",
            p * q
        )));
    }
    cfg.validate(p, q)?;
    let (f1, g1, rho) = build_mpa_endpoint(op, spec, cfg)?;
    let m = cfg.path_nodes;
    let mut path = Vec::with_capacity(m);
    for j in 0..m {
        let t = j as f64 / (m - 1) as f64;
        let z = PairField { u: &f1 * t.powf(cfg.k_exp), v: &g1 * t.powf(cfg.l_exp) };
        path.push(eval_node(op, spec, z)?);
    }
    let mut telemetry = MpaTelemetry {
        iterations: 0,
        descent_steps: 0,
        newton_steps: 0,
        endpoint_rho: rho,
        endpoint_level: path[m - 1].value,
        level_trace: Vec::new(),
    };

    let mut tau = cfg.step0;
    let mut trigger = NewtonTrigger::new(cfg.newton_switch, cfg.stall_patience);
    let mut found: Option<PairField> = None;
    let mut best = path[1].z.clone();
    for iter in 0..cfg.max_outer {
        telemetry.iterations = iter + 1;
        let imax = (1..m - 1)
            .max_by(|&a, &b| path[a].value.total_cmp(&path[b].value))
            .expect("path has interior nodes");
        if iter % 100 == 0 {
            telemetry.level_trace.push(path[imax].value);
        }
        let z = path[imax].z.clone();
        let cur = eval_j(op, spec, &z.u, &z.v)?;
        let gnorm = cur.grad_norm(op);
        best = z.clone();
        if gnorm <= cfg.tol {
            found = newton_polish(op, spec, z.clone(), cfg.tol, 3, &mut telemetry.newton_steps)?.or(Some(z));
            break;
        }
        let scale = 1f64.max(pair_norm(op, &z));
        if trigger.should_try(gnorm, scale) {
            if let Some(w) = newton_polish(op, spec, z.clone(), cfg.tol, 50, &mut telemetry.newton_steps)? {
                // A polished point far above the path maximum is some other
                // critical point that Newton wandered into.
                let level = eval_j(op, spec, &w.u, &w.v)?.value;
                if level > 0.0 && level <= cur.value + LEVEL_SLACK * cur.value.abs().max(1.0) {
                    found = Some(w);
                    break;
                }
            }
            trigger.failed();
        }

        let g2 = gnorm * gnorm;
        let mut t = (2.0 * tau).min(1e6 * cfg.step0);
        let mut moved = None;
        for _ in 0..MAX_HALVINGS {
            let trial = z.sub(&cur.grad.scale(t));
            if let Ok(node) = eval_node(op, spec, trial) {
                if node.value <= cur.value - ARMIJO * t * g2 {
                    moved = Some(node);
                    tau = t;
                    break;
                }
            }
            t *= 0.5;
        }
        match moved {
            Some(node) => {
                path[imax] = node;
                telemetry.descent_steps += 1;
                respace(op, spec, &mut path)?;
            }
            None => {
                found = newton_polish(op, spec, z, cfg.tol, 50, &mut telemetry.newton_steps)?;
                break;
            }
        }
    }

    let converged = found.is_some();
    let z = found.unwrap_or(best);
    let val = eval_j(op, spec, &z.u, &z.v)?;
    let (primal_u, primal_v, r_u, r_v) = recover_primal(op, spec, &z.u, &z.v)?;
    let pair = CriticalPair {
        level: val.value,
        grad_norm: val.grad_norm(op),
        f: z.u,
        g: z.v,
        primal_u,
        primal_v,
        r_u,
        r_v,
        telemetry,
    };
    if converged && pair.level > 0.0 {
        Ok(pair)
    } else {
        let telemetry = pair.telemetry.clone();
        Err(Error::MountainPassNonconvergence { best: Box::new(pair), telemetry })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::hamiltonian::signed_pow;
    use crate::operator::Backend;
    use approx::assert_relative_eq;

    fn op(n: usize, s: f64) -> DiscreteOperator {
        DiscreteOperator::assemble(&Grid1D::new(-1.0, 1.0, n).unwrap(), s, Backend::Restricted).unwrap()
    }

    #[test]
    fn zero_pair_has_zero_level() {
        let o = op(11, 0.4);
        let spec = HamiltonianSpec::lane_emden(2.0, 3.0).unwrap();
        let z = o.grid.zeros();
        let val = eval_j(&o, &spec, &z, &z).unwrap();
        assert_eq!(val.value, 0.0);
        assert_eq!(val.grad.amax(), 0.0);
    }

    #[test]
    fn cross_term_is_symmetric() {
        let o = op(25, 0.35);
        let f = o.grid.field(|x| (3.0 * x).sin() + 0.2);
        let g = o.grid.field(|x| x * x - 0.4);
        let a = o.grid.inner(&g, &o.solve(&f).unwrap());
        let b = o.grid.inner(&f, &o.solve(&g).unwrap());
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn endpoint_cross_term_is_inverse_eigenvalue() {
        let o = op(33, 0.3);
        let sd = o.eigendecompose();
        let phi = sd.mode(0);
        let cross = o.grid.inner(&phi, &o.solve(&phi).unwrap());
        assert_relative_eq!(cross, 1.0 / sd.lambdas[0], max_relative = 1e-10);
    }

    #[test]
    fn endpoint_is_below_zero() {
        let o = op(33, 0.3);
        let spec = HamiltonianSpec::lane_emden(2.0, 2.0).unwrap();
        let cfg = MpaConfig::for_exponents(2.0, 2.0).unwrap();
        let (f, g, rho) = build_mpa_endpoint(&o, &spec, &cfg).unwrap();
        assert!(rho >= 1.0);
        assert!(eval_j(&o, &spec, &f, &g).unwrap().value < 0.0);
    }

    #[test]
    fn path_exponents() {
        let c = MpaConfig::for_exponents(2.0, 3.0).unwrap();
        assert_eq!((c.k_exp, c.l_exp), (2.0, 2.0));
        for &(p, q) in &[(0.5, 5.0), (8.0, 0.3), (1.0, 1.5)] {
            let c = MpaConfig::for_exponents(p, q).unwrap();
            c.validate(p, q).unwrap();
            assert!(c.k_exp >= 2.0 && c.l_exp >= 2.0);
        }
        assert!(matches!(MpaConfig::for_exponents(0.5, 0.5), Err(Error::Config(_))));
        let mut c = MpaConfig::for_exponents(2.0, 2.0).unwrap();
        c.k_exp = 1.0;
        assert!(c.validate(2.0, 2.0).is_err());
    }

    #[test]
    fn recovery_inverts_gradient_map() {
        let o = op(17, 0.6);
        let spec = HamiltonianSpec::lane_emden(1.5, 2.5).unwrap();
        let u = o.grid.field(|x| (1.0 - x * x).powf(0.6) - 0.3);
        let v = o.grid.field(|x| (1.0 - x * x) * (1.0 + x));
        let f = u.map(|x| signed_pow(x, 1.5));
        let g = v.map(|x| signed_pow(x, 2.5));
        let (ur, vr, r_u, r_v) = recover_primal(&o, &spec, &f, &g).unwrap();
        assert!((&ur - &u).amax() <= 1e-10 && (&vr - &v).amax() <= 1e-10);
        assert_relative_eq!(r_u, l2(&o.grid, &(o.apply(&u).unwrap() - &g)), max_relative = 1e-9);
        assert_relative_eq!(r_v, l2(&o.grid, &(o.apply(&v).unwrap() - &f)), max_relative = 1e-9);
    }

    #[test]
    fn manufactured_critical_pair() {
        // H = λ₁(u² + v²)/2 makes (u, v) = (φ₁, φ₁) an exact solution, so
        // (f, g) = ∇H(φ₁, φ₁) is an exact critical point of J.
        let o = op(15, 0.45);
        let sd = o.eigendecompose();
        let lam = sd.lambdas[0];
        let phi = sd.mode(0);
        let spec = HamiltonianSpec::custom("scaled quadratic", 1.0, 1.0, move |u, v| {
            Ok((0.5 * lam * (u * u + v * v), lam * u, lam * v))
        })
        .unwrap();
        let f = &phi * lam;
        let (u, v, r_u, r_v) = recover_primal(&o, &spec, &f, &f).unwrap();
        assert!((&u - &phi).amax() <= 1e-10 && (&v - &phi).amax() <= 1e-10);
        assert!(r_u <= 1e-10 && r_v <= 1e-10);
        assert!(eval_j(&o, &spec, &f, &f).unwrap().grad_norm(&o) <= 1e-10);
    }

    #[test]
    fn rejects_sublinear() {
        let o = op(15, 0.5);
        let spec = HamiltonianSpec::lane_emden(0.5, 0.5).unwrap();
        let cfg = MpaConfig::for_exponents(2.0, 2.0).unwrap();
        assert!(matches!(run_mountain_pass(&o, &spec, &cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn small_mountain_pass() {
        let o = op(33, 0.5);
        let spec = HamiltonianSpec::lane_emden(2.0, 2.0).unwrap();
        let cfg = MpaConfig::for_exponents(2.0, 2.0).unwrap();
        let cp = run_mountain_pass(&o, &spec, &cfg).unwrap();
        assert!(cp.level > 0.0 && cp.grad_norm <= 1e-8);
        let scale = cp.residual_scale(&o);
        assert!(cp.r_u <= 1e-7 * scale && cp.r_v <= 1e-7 * scale);
    }
}
