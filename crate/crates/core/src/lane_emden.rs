//! Ground states of the fractional Lane–Emden system
//! `(-Δ)^s u = |v|^{q-1} v`, `(-Δ)^s v = |u|^{p-1} u` through the reduced
//! functional
//!
//! ```text
//! I(u) = q/(q+1) |L u|_{1+1/q}^{1+1/q} - 1/(p+1) |u|_{p+1}^{p+1}
//! ```
//!
//! constrained to its Nehari manifold `R(u) = <I'(u), u> = 0`. The partner
//! field is recovered as `v = sign(Lu) |Lu|^{1/q}`.
//!
//! For `pq > 1` the ground-state level is positive and `I(t u)` has a single
//! maximum along each ray; for `pq < 1` the level is negative and the ray
//! extremum is a minimum. `pq = 1` is excluded.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{l2, power_sum, reversed, Field};
use crate::hamiltonian::{classify_exponents, signed_pow};
use crate::operator::DiscreteOperator;
use crate::polish::NewtonTrigger;

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

fn check_pq(p: f64, q: f64) -> Result<()> {
    if !(p > 0.0 && q > 0.0) {
        return Err(Error::domain(format!("exponents must satisfy p, q > 0, got p = {p}, q = {q}")));
    }
    if (p * q - 1.0).abs() <= 1e-12 {
        return Err(Error::domain("pq = 1 is excluded (requires pq != 1)"));
    }
    Ok(())
}

fn phi(w: &Field, r: f64) -> Field {
    w.map(|x| signed_pow(x, r))
}

/// Value, quadrature gradient representative and Nehari residual of `I`.
#[derive(Debug, Clone)]
pub struct IValue {
    pub value: f64,
    /// `L Φ_{1/q}(L u) - Φ_p(u)`; the derivative with respect to the nodal
    /// value `u_i` is `h * grad_i`.
    pub grad: Field,
    /// `|L u|_{1+1/q}^{1+1/q} - |u|_{p+1}^{p+1}`
    pub r: f64,
}

pub fn eval_i(op: &DiscreteOperator, p: f64, q: f64, u: &Field) -> Result<IValue> {
    let lu = op.apply(u)?;
    let a = power_sum(&op.grid, &lu, 1.0 + 1.0 / q);
    let b = power_sum(&op.grid, u, p + 1.0);
    let grad = &op.matrix * phi(&lu, 1.0 / q) - phi(u, p);
    Ok(IValue { value: q / (q + 1.0) * a - b / (p + 1.0), grad, r: a - b })
}

/// Scales `u` onto the Nehari manifold: `t = (A/B)^{q/(pq-1)}` with
/// `A = |Lu|_{1+1/q}^{1+1/q}` and `B = |u|_{p+1}^{p+1}`.
pub fn nehari_project(op: &DiscreteOperator, p: f64, q: f64, u: &Field) -> Result<(f64, Field)> {
    check_pq(p, q)?;
    op.grid.check(u)?;
    let b = power_sum(&op.grid, u, p + 1.0);
    if b == 0.0 {
        return Err(Error::domain("cannot project the zero field onto the Nehari manifold"));
    }
    let lu = op.apply(u)?;
    let a = power_sum(&op.grid, &lu, 1.0 + 1.0 / q);
    let t = (a / b).powf(q / (p * q - 1.0));
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Evaluation(format!("ray projection factor is {t} (A = {a:e}, B = {b:e})")));
    }
    Ok((t, u * t))
}

/// A point on the Nehari manifold together with its diagnostics.
#[derive(Debug, Clone)]
pub struct NehariState {
    pub u: Field,
    pub i_value: f64,
    pub r_value: f64,
    pub free_grad_norm: f64,
    /// Ray factor used to reach `u` from the input.
    pub t_last: f64,
}

impl NehariState {
    pub fn project(op: &DiscreteOperator, p: f64, q: f64, u: &Field) -> Result<Self> {
        let (t, u) = nehari_project(op, p, q, u)?;
        let val = eval_i(op, p, q, &u)?;
        Ok(NehariState {
            i_value: val.value,
            r_value: val.r,
            free_grad_norm: l2(&op.grid, &val.grad),
            t_last: t,
            u,
        })
    }
}

#[derive(Debug, Clone)]
pub enum Init {
    /// Solution of `L ξ = 1`.
    Torsion,
    Field(Field),
    /// Smoothed seeded random field, generally sign-changing.
    Random(u64),
}

#[derive(Debug, Clone, Serialize)]
pub struct NehariOptions {
    /// Stop when the free gradient norm is at most `tol * scale`.
    pub tol: f64,
    pub max_iter: usize,
    /// Cadence of the positivity replacement `u <- A(|L u|)`.
    pub positivity_every: usize,
    /// Relative gradient level below which Newton polishing is attempted.
    pub newton_switch: f64,
    /// Iterations without a 10% gradient improvement before Newton
    /// polishing is attempted anyway.
    pub stall_patience: usize,
    pub max_newton: usize,
    /// Dimension used for the regime check.
    pub n_dim: f64,
}

impl Default for NehariOptions {
    fn default() -> Self {
        NehariOptions {
            tol: 1e-8,
            max_iter: 20_000,
            positivity_every: 25,
            newton_switch: 1e-2,
            stall_patience: 300,
            max_newton: 40,
            n_dim: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NehariTelemetry {
    pub iterations: usize,
    pub descent_steps: usize,
    pub positivity_replacements: usize,
    pub newton_steps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundState {
    #[serde(skip)]
    pub u: Field,
    #[serde(skip)]
    pub v: Field,
    pub c_i: f64,
    /// `h Σ u (L v) - h Σ H(u, v)` evaluated from the pair.
    pub energy_k: f64,
    pub r_u: f64,
    pub r_v: f64,
    pub free_grad_norm: f64,
    pub nehari_residual: f64,
    /// Normalization for `free_grad_norm`: `max(1, |Φ_p(u)|_2)`.
    pub scale: f64,
    /// Estimated rounding-error level of `free_grad_norm`; convergence means
    /// `free_grad_norm <= tol * scale + roundoff_floor`.
    pub roundoff_floor: f64,
    pub symmetric: bool,
    pub positive: bool,
    pub telemetry: NehariTelemetry,
}

impl GroundState {
    /// `max(1, |c_I|, h Σ |u|^{p+1})`, the magnitude used for energy identities.
    pub fn energy_scale(&self, op: &DiscreteOperator, p: f64) -> f64 {
        1f64.max(self.c_i.abs()).max(power_sum(&op.grid, &self.u, p + 1.0))
    }
}

fn grad_scale(op: &DiscreteOperator, p: f64, u: &Field) -> f64 {
    l2(&op.grid, &phi(u, p)).max(1.0)
}

/// Running bound on the rounding error of the computed free gradient
/// `L Φ_{1/q}(L u) - Φ_p(u)`. Negligible against `tol * scale` in ordinary
/// regimes; it dominates when `L` is large (fine grids at `s` near 1) and
/// the solution is large.
fn roundoff_floor(op: &DiscreteOperator, abs_l: &DMatrix<f64>, p: f64, q: f64, u: &Field) -> f64 {
    let eps = f64::EPSILON;
    let r = 1.0 / q;
    let lu = &op.matrix * u;
    let err_lu = (abs_l * u.abs()) * eps;
    let err_v = Field::from_fn(u.len(), |i, _| {
        let (a, d) = (lu[i].abs(), err_lu[i]);
        let lipschitz = r * (a + d).powf(r - 1.0) * d;
        if r < 1.0 {
            lipschitz.min(2.0 * d.powf(r))
        } else {
            lipschitz
        }
    });
    let v = phi(&lu, r);
    let bound = abs_l * (v.abs() * eps + err_v) + phi(u, p).abs() * eps;
    l2(&op.grid, &bound)
}

/// Convergence rule for the free gradient: `|G| <= tol * scale + floor`.
struct Acceptance<'a> {
    op: &'a DiscreteOperator,
    abs_l: DMatrix<f64>,
    p: f64,
    q: f64,
    tol: f64,
}

impl<'a> Acceptance<'a> {
    fn new(op: &'a DiscreteOperator, p: f64, q: f64, tol: f64) -> Self {
        Acceptance { op, abs_l: op.matrix.abs(), p, q, tol }
    }

    fn target(&self, u: &Field) -> f64 {
        self.tol * grad_scale(self.op, self.p, u)
    }

    fn floor(&self, u: &Field) -> f64 {
        roundoff_floor(self.op, &self.abs_l, self.p, self.q, u)
    }

    fn met(&self, u: &Field, gnorm: f64) -> bool {
        let target = self.target(u);
        gnorm <= target || (gnorm <= 1e4 * target && gnorm <= target + self.floor(u))
    }
}

fn initial_field(op: &DiscreteOperator, init: &Init) -> Result<Field> {
    match init {
        Init::Torsion => Ok(op.torsion()),
        Init::Field(u) => {
            op.grid.check(u)?;
            Ok(u.clone())
        }
        Init::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let offset: f64 = rng.random_range(-1.0..1.0);
            let noise = Field::from_fn(op.n(), |_, _| offset + rng.random_range(-1.0..1.0));
            op.solve(&noise)
        }
    }
}

/// `A(|L u|)`: dominates `|u|` nodewise and is strictly positive for `u != 0`.
fn positivity_replacement(op: &DiscreteOperator, u: &Field) -> Result<Field> {
    let lu = op.apply(u)?;
    op.solve(&lu.abs())
}

/// Newton's method on the free equation `L Φ_{1/q}(L u) = Φ_p(u)`, with
/// re-projection after each step. Returns `None` unless the result meets
/// the acceptance rule.
fn newton_polish(
    acc: &Acceptance<'_>,
    mut u: Field,
    max_steps: usize,
    steps: &mut usize,
) -> Result<Option<Field>> {
    let (op, p, q) = (acc.op, acc.p, acc.q);
    let n = op.n();
    let mut cur = eval_i(op, p, q, &u)?;
    let mut res = l2(&op.grid, &cur.grad);
    // Iterate past the target while it still pays; the energy identities
    // inherit the final gradient level.
    for _ in 0..max_steps {
        if res <= 1e-3 * acc.target(&u) {
            break;
        }
        let lu = op.apply(&u)?;
        let d1 = lu.map(|x| x.abs().max(1e-300).powf(1.0 / q - 1.0) / q);
        let d2 = u.map(|x| p * x.abs().max(1e-300).powf(p - 1.0));
        let scaled = DMatrix::from_fn(n, n, |i, j| op.matrix[(i, j)] * d1[j]);
        let mut jac = &scaled * &op.matrix;
        for i in 0..n {
            jac[(i, i)] -= d2[i];
        }
        let Some(step) = jac.lu().solve(&(-&cur.grad)) else {
            return Ok(None);
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = &u + &step * t;
            if let Ok((_, proj)) = nehari_project(op, p, q, &trial) {
                let val = eval_i(op, p, q, &proj)?;
                let r = l2(&op.grid, &val.grad);
                if r.is_finite() && r < (1.0 - ARMIJO * t) * res {
                    u = proj;
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
    Ok(acc.met(&u, res).then_some(u))
}

/// Projected steepest descent on the Nehari manifold with periodic positivity
/// replacement, finished by Newton polishing of the free equation.
pub fn minimize_ground_state(
    op: &DiscreteOperator,
    p: f64,
    q: f64,
    init: &Init,
    opts: &NehariOptions,
) -> Result<GroundState> {
    check_pq(p, q)?;
    let verdict = classify_exponents(p, q, opts.n_dim, op.s);
    if !verdict.below_critical_hyperbola {
        return Err(Error::domain(format!(
            "(p, q) = ({p}, {q}) is not below the critical hyperbola for N = {}, s = {}; no positive solutions are expected",
            opts.n_dim, op.s
        )));
    }

    let mut telemetry = NehariTelemetry {
        iterations: 0,
        descent_steps: 0,
        positivity_replacements: 0,
        newton_steps: 0,
    };
    let mut u = nehari_project(op, p, q, &initial_field(op, init)?)?.1;
    let mut tau = 1.0_f64;
    let mut trigger = NewtonTrigger::new(opts.newton_switch, opts.stall_patience);
    let every = opts.positivity_every.max(1);
    let acc = Acceptance::new(op, p, q, opts.tol);
    let mut converged = false;

    for iter in 0..opts.max_iter {
        telemetry.iterations = iter + 1;
        if iter % every == 0 {
            u = nehari_project(op, p, q, &positivity_replacement(op, &u)?)?.1;
            telemetry.positivity_replacements += 1;
        }
        let cur = eval_i(op, p, q, &u)?;
        let gnorm = l2(&op.grid, &cur.grad);
        let scale = grad_scale(op, p, &u);
        let positive = u.iter().all(|&x| x > 0.0);
        if acc.met(&u, gnorm) {
            if positive {
                converged = true;
                break;
            }
            u = nehari_project(op, p, q, &positivity_replacement(op, &u)?)?.1;
            telemetry.positivity_replacements += 1;
            continue;
        }
        if trigger.should_try(gnorm, scale) {
            let polished =
                newton_polish(&acc, u.clone(), opts.max_newton, &mut telemetry.newton_steps)?;
            match polished {
                Some(w) if w.iter().all(|&x| x > 0.0) => {
                    u = w;
                    converged = true;
                    break;
                }
                _ => trigger.failed(),
            }
        }

        let g2 = gnorm * gnorm;
        let mut t = (2.0 * tau).min(1e6);
        let mut stepped = false;
        for _ in 0..MAX_HALVINGS {
            if let Ok((_, trial)) = nehari_project(op, p, q, &(&u - &cur.grad * t)) {
                let val = eval_i(op, p, q, &trial)?.value;
                if val <= cur.value - ARMIJO * t * g2 {
                    u = trial;
                    tau = t;
                    stepped = true;
                    break;
                }
            }
            t *= 0.5;
        }
        telemetry.descent_steps += usize::from(stepped);
        if !stepped {
            // Line search stalled at roundoff level; Newton gets the last word.
            let polished =
                newton_polish(&acc, u.clone(), opts.max_newton, &mut telemetry.newton_steps)?;
            if let Some(w) = polished.filter(|w| w.iter().all(|&x| x > 0.0)) {
                u = w;
                converged = true;
            }
            break;
        }
    }

    let floor = acc.floor(&u);
    let state = finish(op, p, q, u, telemetry, floor)?;
    if converged {
        Ok(state)
    } else {
        Err(Error::GroundStateNonconvergence {
            iterations: state.telemetry.iterations,
            grad_norm: state.free_grad_norm,
            best: Box::new(state),
        })
    }
}

fn finish(
    op: &DiscreteOperator,
    p: f64,
    q: f64,
    u: Field,
    telemetry: NehariTelemetry,
    roundoff_floor: f64,
) -> Result<GroundState> {
    let grid = &op.grid;
    let lu = op.apply(&u)?;
    let v = phi(&lu, 1.0 / q);
    let lv = op.apply(&v)?;
    let ival = eval_i(op, p, q, &u)?;
    let hsum = power_sum(grid, &u, p + 1.0) / (p + 1.0) + power_sum(grid, &v, q + 1.0) / (q + 1.0);
    let energy_k = grid.inner(&u, &lv) - hsum;
    let r_u = l2(grid, &(&lu - phi(&v, q)));
    let r_v = l2(grid, &(&lv - phi(&u, p)));
    let sym_err = l2(grid, &(&u - reversed(&u)));
    Ok(GroundState {
        c_i: ival.value,
        energy_k,
        r_u,
        r_v,
        free_grad_norm: l2(grid, &ival.grad),
        nehari_residual: ival.r,
        scale: grad_scale(op, p, &u),
        roundoff_floor,
        symmetric: sym_err <= 1e-6 * l2(grid, &u),
        positive: u.iter().all(|&x| x > 0.0),
        telemetry,
        u,
        v,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PairComparison {
    pub first: usize,
    pub second: usize,
    /// `|u_1 - u_2|_∞ / max(|u_1|_∞, |u_2|_∞)`
    pub rel_linf: f64,
    /// `min_i u_2 / u_1`
    pub beta0: f64,
    /// `min_i u_1 / u_2`
    pub beta1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    pub trials: usize,
    pub seed: u64,
    pub levels: Vec<f64>,
    pub pairs: Vec<PairComparison>,
    pub max_rel_distance: Option<f64>,
    pub min_beta: Option<f64>,
    #[serde(skip)]
    pub solutions: Vec<GroundState>,
}

/// Minimizes from `trials` seeded random starts and compares the results
/// pairwise. Only meaningful for `pq < 1`.
pub fn uniqueness_probe(
    op: &DiscreteOperator,
    p: f64,
    q: f64,
    trials: usize,
    seed: u64,
    opts: &NehariOptions,
) -> Result<UniquenessReport> {
    check_pq(p, q)?;
    if p * q >= 1.0 {
        return Err(Error::domain(format!("uniqueness probe requires pq < 1, got pq = {}", p * q)));
    }
    let solutions: Vec<GroundState> = (0..trials as u64)
        .into_par_iter()
        .map(|k| minimize_ground_state(op, p, q, &Init::Random(seed.wrapping_add(k)), opts))
        .collect::<Result<_>>()?;

    let mut pairs = Vec::new();
    for i in 0..solutions.len() {
        for j in i + 1..solutions.len() {
            let (u1, u2) = (&solutions[i].u, &solutions[j].u);
            let denom = u1.amax().max(u2.amax());
            let ratio_min = |a: &Field, b: &Field| {
                a.iter().zip(b.iter()).map(|(x, y)| x / y).fold(f64::INFINITY, f64::min)
            };
            pairs.push(PairComparison {
                first: i,
                second: j,
                rel_linf: (u1 - u2).amax() / denom,
                beta0: ratio_min(u2, u1),
                beta1: ratio_min(u1, u2),
            });
        }
    }
    let max_rel_distance = pairs.iter().map(|c| c.rel_linf).reduce(f64::max);
    let min_beta = pairs.iter().map(|c| c.beta0.min(c.beta1)).reduce(f64::min);
    Ok(UniquenessReport {
        trials,
        seed,
        levels: solutions.iter().map(|s| s.c_i).collect(),
        pairs,
        max_rel_distance,
        min_beta,
        solutions,
    })
}
