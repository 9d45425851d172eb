//! The three subcommands. Each returns a report plus whatever tables should
//! be written; writing happens in `main` after the run is complete.

use std::time::Instant;

use fham_core::dual::{run_mountain_pass, CriticalPair, MpaConfig};
use fham_core::grid::{l2, power_sum, Field};
use fham_core::hamiltonian::{conjugate_point, verify_hypotheses, Hypothesis};
use fham_core::lane_emden::{minimize_ground_state, GroundState, Init, NehariOptions};
use fham_core::operator::torsion_exact;
use fham_core::spectral::{apply_power, energy_e, quadratic_form, split_pair};
use fham_core::{
    admissible_alpha_range, classify_exponents, hopf_ratio, Backend, DiscreteOperator, Error, Grid1D,
    HamiltonianSpec, PairField,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, LoadedConfig, RunConfig};
use crate::output::SolutionTable;
use crate::report::{
    CrossChecks, DiagnoseReport, DiagnosticEntry, DualReport, EnergyCertificate, NehariReport, SolveReport,
    Status, SweepReport, SweepRow, Timing,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] Error),
}

fn build_operator(cfg: &RunConfig) -> Result<DiscreteOperator, RunError> {
    let grid = Grid1D::new(cfg.domain.a, cfg.domain.b, cfg.domain.n)?;
    Ok(DiscreteOperator::assemble(&grid, cfg.operator.s, cfg.operator.backend)?)
}

fn nehari_options(cfg: &RunConfig) -> NehariOptions {
    NehariOptions {
        tol: cfg.solver.tol,
        max_iter: cfg.solver.max_iter,
        n_dim: cfg.exponents.n_dim,
        ..NehariOptions::default()
    }
}

fn rel_l2(op: &DiscreteOperator, a: &Field, b: &Field) -> f64 {
    l2(&op.grid, &(a - b)) / l2(&op.grid, b).max(f64::MIN_POSITIVE)
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Nodewise residuals `(L u - H_v, L v - H_u)`.
fn residual_table(op: &DiscreteOperator, spec: &HamiltonianSpec, u: &Field, v: &Field) -> Result<SolutionTable, Error> {
    let lu = op.apply(u)?;
    let lv = op.apply(v)?;
    let n = op.n();
    let mut res_u = Vec::with_capacity(n);
    let mut res_v = Vec::with_capacity(n);
    for i in 0..n {
        let h = spec.eval(u[i], v[i])?;
        res_u.push(lu[i] - h.hv);
        res_v.push(lv[i] - h.hu);
    }
    Ok(SolutionTable {
        x: op.grid.nodes.clone(),
        u: u.iter().copied().collect(),
        v: v.iter().copied().collect(),
        delta: op.grid.delta.clone(),
        res_u,
        res_v,
    })
}

fn run_nehari(op: &DiscreteOperator, cfg: &RunConfig) -> NehariReport {
    let (p, q) = (cfg.exponents.p, cfg.exponents.q);
    let outcome = minimize_ground_state(op, p, q, &Init::Torsion, &nehari_options(cfg));
    let (status, message, result) = match outcome {
        Ok(gs) => (Status::Converged, None, Some(gs)),
        Err(Error::GroundStateNonconvergence { iterations, grad_norm, best }) => (
            Status::Nonconverged,
            Some(format!("stopped after {iterations} iterations with free gradient {grad_norm:e}")),
            Some(*best),
        ),
        Err(e @ Error::Domain(_)) => (Status::RejectedRegime, Some(e.to_string()), None),
        Err(e) => (Status::Nonconverged, Some(e.to_string()), None),
    };
    let (u, v) = match &result {
        Some(gs) => (gs.u.iter().copied().collect(), gs.v.iter().copied().collect()),
        None => (Vec::new(), Vec::new()),
    };
    NehariReport { status, message, result, u, v }
}

fn run_dual(op: &DiscreteOperator, spec: &HamiltonianSpec, cfg: &RunConfig) -> DualReport {
    let (p, q) = (cfg.exponents.p, cfg.exponents.q);
    let mpa = MpaConfig::for_exponents(p, q).map(|c| MpaConfig {
        path_nodes: cfg.solver.path_nodes,
        max_outer: cfg.solver.max_iter,
        tol: cfg.solver.tol,
        seed: cfg.solver.seed,
        ..c
    });
    let (k_exp, l_exp) = match &mpa {
        Ok(c) => (Some(c.k_exp), Some(c.l_exp)),
        Err(_) => (None, None),
    };
    let outcome = mpa.and_then(|c| run_mountain_pass(op, spec, &c));
    let (status, message, result) = match outcome {
        Ok(cp) => (Status::Converged, None, Some(cp)),
        Err(Error::MountainPassNonconvergence { best, .. }) => (
            Status::Nonconverged,
            Some(format!("stopped after {} iterations with gradient {:e}", best.telemetry.iterations, best.grad_norm)),
            Some(*best),
        ),
        Err(e @ Error::Domain(_)) => (Status::RejectedRegime, Some(e.to_string()), None),
        Err(e) => (Status::Nonconverged, Some(e.to_string()), None),
    };
    let vec = |x: &Field| x.iter().copied().collect::<Vec<f64>>();
    let (f, g, u, v) = match &result {
        Some(cp) => (vec(&cp.f), vec(&cp.g), vec(&cp.primal_u), vec(&cp.primal_v)),
        None => Default::default(),
    };
    DualReport { status, message, k_exp, l_exp, result, f, g, u, v }
}

/// Largest relative Fenchel–Young defect `|H(u,v) + H*(f,g) - fu - gv|` at a
/// dual critical point.
fn fenchel_young_defect(spec: &HamiltonianSpec, cp: &CriticalPair) -> Result<f64, Error> {
    let mut worst = 0.0_f64;
    for i in 0..cp.f.len() {
        let (f, g, u, v) = (cp.f[i], cp.g[i], cp.primal_u[i], cp.primal_v[i]);
        let h = spec.eval(u, v)?.h;
        let hstar = conjugate_point(spec, f, g)?.hstar;
        let pairing = f * u + g * v;
        worst = worst.max((h + hstar - pairing).abs() / pairing.abs().max(1.0));
    }
    Ok(worst)
}

fn cross_checks(
    op: &DiscreteOperator,
    spec: &HamiltonianSpec,
    cfg: &RunConfig,
    nehari: Option<&GroundState>,
    dual: Option<&CriticalPair>,
) -> CrossChecks {
    let (p, q, s) = (cfg.exponents.p, cfg.exponents.q, cfg.operator.s);
    let mut cc = CrossChecks::default();

    let primary: Option<(&Field, &Field, f64)> = nehari
        .map(|gs| (&gs.u, &gs.v, gs.scale))
        .or_else(|| dual.map(|cp| (&cp.primal_u, &cp.primal_v, cp.residual_scale(op))));

    if let Some((u, v, scale)) = primary {
        let window = admissible_alpha_range(p, q, cfg.exponents.n_dim, s);
        match window.midpoint() {
            Some(alpha) => {
                let sd = op.eigendecompose();
                let pair = PairField { u: u.clone(), v: v.clone() };
                match energy_e(&sd, alpha, &pair, spec) {
                    Ok(e) => {
                        let grad_norm = e.gradient_norm(&sd);
                        cc.energy_certificate =
                            Some(EnergyCertificate { alpha, grad_norm, scale, passed: grad_norm <= 1e-6 * scale });
                    }
                    Err(e) => cc.notes.push(format!("energy certificate failed: {e}")),
                }
            }
            None => cc.notes.push("no admissible alpha window; energy certificate skipped".to_string()),
        }
        cc.hopf_ratio_u = hopf_ratio(&op.grid, u, s).ok().and_then(finite);
        cc.hopf_ratio_v = hopf_ratio(&op.grid, v, s).ok().and_then(finite);
        if spec.is_lane_emden() {
            cc.power_balance = finite((power_sum(&op.grid, u, p + 1.0) - power_sum(&op.grid, v, q + 1.0)).abs());
        }
    }
    if let Some(gs) = nehari {
        cc.energy_identity = finite((gs.energy_k - gs.c_i).abs());
    }
    if let Some(cp) = dual {
        match fenchel_young_defect(spec, cp) {
            Ok(d) => cc.fenchel_young = finite(d),
            Err(e) => cc.notes.push(format!("Fenchel-Young check failed: {e}")),
        }
    }
    if let (Some(gs), Some(cp)) = (nehari, dual) {
        let d = rel_l2(op, &cp.primal_u, &gs.u);
        cc.dual_vs_nehari = finite(d);
        if d > 1e-2 {
            cc.notes.push(format!(
                "dual and Nehari solutions differ by {d:.2e} in relative L2; the mountain pass may have reached another critical point"
            ));
        }
    }
    cc
}

pub struct SolveOutcome {
    pub report: SolveReport,
    /// `(file name, table)` pairs; empty for a rejected regime.
    pub tables: Vec<(&'static str, SolutionTable)>,
}

pub fn solve(loaded: &LoadedConfig) -> Result<SolveOutcome, RunError> {
    let start = Instant::now();
    let cfg = &loaded.config;
    let (p, q, n_dim, s) = (cfg.exponents.p, cfg.exponents.q, cfg.exponents.n_dim, cfg.operator.s);
    let spec = cfg.hamiltonian_spec()?;
    let verdict = classify_exponents(p, q, n_dim, s);
    let alpha_window = admissible_alpha_range(p, q, n_dim, s);
    let op = build_operator(cfg)?;
    let mut timing = Timing::default();

    let regime_reject = |what: &str| {
        format!(
            "(p, q) = ({p}, {q}) is not below the critical hyperbola for N = {n_dim}, s = {s}; {what} skipped"
        )
    };

    let nehari = cfg.method.runs_nehari().then(|| {
        if !verdict.below_critical_hyperbola {
            return NehariReport {
                status: Status::RejectedRegime,
                message: Some(regime_reject("Nehari minimization")),
                result: None,
                u: Vec::new(),
                v: Vec::new(),
            };
        }
        let t = Instant::now();
        let r = run_nehari(&op, cfg);
        timing.nehari_seconds = Some(t.elapsed().as_secs_f64());
        r
    });
    let dual = cfg.method.runs_dual().then(|| {
        if !verdict.below_critical_hyperbola {
            return DualReport {
                status: Status::RejectedRegime,
                message: Some(regime_reject("mountain pass")),
                k_exp: None,
                l_exp: None,
                result: None,
                f: Vec::new(),
                g: Vec::new(),
                u: Vec::new(),
                v: Vec::new(),
            };
        }
        let t = Instant::now();
        let r = run_dual(&op, &spec, cfg);
        timing.dual_seconds = Some(t.elapsed().as_secs_f64());
        r
    });

    let gs = nehari.as_ref().and_then(|r| r.result.as_ref());
    let cp = dual.as_ref().and_then(|r| r.result.as_ref());
    let cross = cross_checks(&op, &spec, cfg, gs, cp);

    let mut tables = Vec::new();
    match (gs, cp) {
        (Some(gs), cp) => {
            tables.push(("solution.csv", residual_table(&op, &spec, &gs.u, &gs.v)?));
            if let Some(cp) = cp {
                tables.push(("solution_dual.csv", residual_table(&op, &spec, &cp.primal_u, &cp.primal_v)?));
            }
        }
        (None, Some(cp)) => tables.push(("solution.csv", residual_table(&op, &spec, &cp.primal_u, &cp.primal_v)?)),
        (None, None) => {}
    }

    let status = nehari
        .iter()
        .map(|r| r.status)
        .chain(dual.iter().map(|r| r.status))
        .fold(Status::Converged, Status::combine);
    timing.total_seconds = start.elapsed().as_secs_f64();
    let report = SolveReport {
        status,
        config: cfg.clone(),
        warnings: loaded.warnings.clone(),
        verdict,
        alpha_window,
        hamiltonian: spec.summary(),
        nehari,
        dual,
        cross_checks: cross,
        timing,
    };
    Ok(SolveOutcome { report, tables })
}

fn entry(name: &str, measured: f64, rule: &str, passed: bool, detail: Option<String>) -> DiagnosticEntry {
    DiagnosticEntry { name: name.to_string(), measured: finite(measured), rule: rule.to_string(), passed, detail }
}

fn le_entry(name: &str, measured: f64, limit: f64) -> DiagnosticEntry {
    entry(name, measured, &format!("<= {limit:e}"), measured <= limit, None)
}

fn random_field(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Field {
    Field::from_fn(n, |_, _| rng.random_range(lo..hi))
}

const DIAGNOSE_DRAWS: usize = 20;
const HYPOTHESIS_SAMPLES: usize = 200;

pub fn diagnose(loaded: &LoadedConfig) -> Result<DiagnoseReport, RunError> {
    let start = Instant::now();
    let cfg = &loaded.config;
    let s = cfg.operator.s;
    let spec = cfg.hamiltonian_spec()?;
    let op = build_operator(cfg)?;
    let n = op.n();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.solver.seed);
    let mut entries = Vec::new();

    let xi = op.torsion();
    if cfg.operator.backend == Backend::Restricted {
        let exact = torsion_exact(&op.grid, s);
        entries.push(le_entry("torsion_l2_error", rel_l2(&op, &xi, &exact), 0.05));
    } else {
        entries.push(DiagnosticEntry {
            name: "torsion_l2_error".to_string(),
            measured: None,
            rule: "skipped".to_string(),
            passed: true,
            detail: Some("the closed-form torsion function is for the restricted operator".to_string()),
        });
    }

    let mut worst = f64::INFINITY;
    for _ in 0..DIAGNOSE_DRAWS {
        let f = random_field(&mut rng, n, 0.0, 1.0);
        let u = op.solve(&f)?;
        worst = worst.min(u.min() / u.amax().max(f64::MIN_POSITIVE));
    }
    entries.push(entry("comparison_min_ratio", worst, ">= -1e-12", worst >= -1e-12, None));

    let hopf = hopf_ratio(&op.grid, &xi, s)?;
    entries.push(entry("torsion_hopf_ratio", hopf, "> 0", hopf > 0.0, None));

    let m = &op.matrix;
    let off_diag = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| m[(i, j)])
        .fold(f64::NEG_INFINITY, f64::max);
    let diag_min = (0..n).map(|i| m[(i, i)]).fold(f64::INFINITY, f64::min);
    let green = op.green_matrix();
    let green_min = green.min() / green.amax();
    let m_matrix = diag_min > 0.0 && off_diag <= 0.0 && green_min >= -1e-12;
    entries.push(entry(
        "m_matrix",
        green_min,
        "diag > 0, off-diagonal <= 0, inverse >= -1e-12",
        m_matrix,
        Some(format!("min diagonal {diag_min:e}, max off-diagonal {off_diag:e}")),
    ));

    let sd = op.eigendecompose();
    let mut semigroup = 0.0_f64;
    let mut full = 0.0_f64;
    let mut signs = 0.0_f64;
    for _ in 0..DIAGNOSE_DRAWS {
        let u = random_field(&mut rng, n, -1.0, 1.0);
        let a = rng.random_range(-1.0..2.0 * s);
        let b = rng.random_range(-1.0..2.0 * s);
        let ab = apply_power(&sd, a, &apply_power(&sd, b, &u)?)?;
        let direct = apply_power(&sd, a + b, &u)?;
        semigroup = semigroup.max((&ab - &direct).norm() / direct.norm());
        let lu = op.apply(&u)?;
        full = full.max((&apply_power(&sd, 2.0 * s, &u)? - &lu).norm() / lu.norm());

        let alpha = rng.random_range(0.05 * s..1.95 * s);
        let z = PairField { u: random_field(&mut rng, n, -1.0, 1.0), v: random_field(&mut rng, n, -1.0, 1.0) };
        let (plus, minus) = split_pair(&sd, alpha, &z)?;
        let qp = quadratic_form(&sd, alpha, &plus)?;
        let qm = quadratic_form(&sd, alpha, &minus)?;
        let scale = qp.abs().max(qm.abs()).max(f64::MIN_POSITIVE);
        signs = signs.max((-qp / scale).max(qm / scale));
    }
    entries.push(le_entry("semigroup_error", semigroup, 1e-10));
    entries.push(le_entry("a2s_vs_operator", full, 1e-8));
    entries.push(le_entry("e_pm_sign_violation", signs, 1e-12));

    let mut roundtrip = 0.0_f64;
    let mut young = 0.0_f64;
    for _ in 0..1000 {
        let z = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let hv = spec.eval(z.0, z.1)?;
        let cp = conjugate_point(&spec, hv.hu, hv.hv)?;
        let zs = 1f64.max(z.0.abs()).max(z.1.abs());
        roundtrip = roundtrip.max((cp.u - z.0).abs().max((cp.v - z.1).abs()) / zs);
        let pairing = z.0 * hv.hu + z.1 * hv.hv;
        young = young.max((hv.h + cp.hstar - pairing).abs() / pairing.abs().max(1.0));
    }
    entries.push(le_entry("fenchel_roundtrip", roundtrip, 1e-8));
    entries.push(le_entry("fenchel_young", young, 1e-8));

    let hyp = verify_hypotheses(&spec, &Hypothesis::ALL, cfg.solver.seed, HYPOTHESIS_SAMPLES)?;
    let passed = entries.iter().all(|e| e.passed);
    let verdict = classify_exponents(cfg.exponents.p, cfg.exponents.q, cfg.exponents.n_dim, s);
    Ok(DiagnoseReport {
        passed,
        config: cfg.clone(),
        warnings: loaded.warnings.clone(),
        verdict,
        entries,
        hypotheses: hyp.outcomes,
        timing: Timing { total_seconds: start.elapsed().as_secs_f64(), ..Timing::default() },
    })
}

/// Lattice `{p_min, p_max, q_min, q_max, steps}` for `sweep`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepGrid {
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub steps: usize,
}

impl SweepGrid {
    pub fn parse(text: &str) -> Result<SweepGrid, ConfigError> {
        let bad = |m: String| ConfigError::Invalid { field: "--grid".to_string(), message: m };
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != 5 {
            return Err(bad(format!("expected pmin,pmax,qmin,qmax,steps, got {text:?}")));
        }
        let num = |i: usize| parts[i].parse::<f64>().map_err(|e| bad(format!("{:?}: {e}", parts[i])));
        let steps = parts[4].parse::<usize>().map_err(|e| bad(format!("steps {:?}: {e}", parts[4])))?;
        let grid = SweepGrid { p_min: num(0)?, p_max: num(1)?, q_min: num(2)?, q_max: num(3)?, steps };
        if !(grid.p_min > 0.0 && grid.q_min > 0.0 && grid.p_min <= grid.p_max && grid.q_min <= grid.q_max) {
            return Err(bad("need 0 < pmin <= pmax and 0 < qmin <= qmax".to_string()));
        }
        if !(grid.p_max.is_finite() && grid.q_max.is_finite()) {
            return Err(bad("bounds must be finite".to_string()));
        }
        if steps < 2 {
            return Err(bad(format!("steps must be at least 2, got {steps}")));
        }
        Ok(grid)
    }

    fn axis(lo: f64, hi: f64, steps: usize, i: usize) -> f64 {
        lo + (hi - lo) * i as f64 / (steps - 1) as f64
    }

    /// Lattice points, `p` outer and `q` inner.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let k = self.steps;
        (0..k)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .map(|(i, j)| (Self::axis(self.p_min, self.p_max, k, i), Self::axis(self.q_min, self.q_max, k, j)))
            .collect()
    }
}

/// `FHAM_THREADS` when set to a positive integer, else every available core.
pub fn sweep_threads() -> usize {
    std::env::var("FHAM_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&k| k > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|k| k.get()).unwrap_or(1))
}

fn sweep_point(op: &DiscreteOperator, cfg: &RunConfig, p: f64, q: f64) -> SweepRow {
    let (n_dim, s) = (cfg.exponents.n_dim, cfg.operator.s);
    let verdict = classify_exponents(p, q, n_dim, s);
    let mut row =
        SweepRow { p, q, subcritical: verdict.subcritical, pq_constraint: verdict.pq_constraint, c_i: None, status: String::new() };
    if (p * q - 1.0).abs() <= 1e-12 {
        row.status = "skipped: pq = 1".to_string();
        return row;
    }
    if !verdict.below_critical_hyperbola {
        row.status = "skipped: not below the critical hyperbola".to_string();
        return row;
    }
    let opts = NehariOptions { tol: cfg.solver.tol, max_iter: cfg.solver.max_iter, n_dim, ..NehariOptions::default() };
    match minimize_ground_state(op, p, q, &Init::Torsion, &opts) {
        Ok(gs) => {
            row.c_i = finite(gs.c_i);
            row.status = Status::Converged.as_str().to_string();
        }
        Err(Error::GroundStateNonconvergence { best, .. }) => {
            row.c_i = finite(best.c_i);
            row.status = Status::Nonconverged.as_str().to_string();
        }
        Err(e) => row.status = format!("skipped: {e}"),
    }
    row
}

pub fn sweep(loaded: &LoadedConfig, grid: SweepGrid) -> Result<SweepReport, RunError> {
    let start = Instant::now();
    let cfg = &loaded.config;
    let op = build_operator(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(sweep_threads())
        .build()
        .map_err(|e| Error::Evaluation(format!("cannot start the sweep thread pool: {e}")))?;
    // `collect` on an indexed parallel iterator keeps lattice order.
    let rows: Vec<SweepRow> =
        pool.install(|| grid.points().into_par_iter().map(|(p, q)| sweep_point(&op, cfg, p, q)).collect());
    Ok(SweepReport {
        config: cfg.clone(),
        grid: [grid.p_min, grid.p_max, grid.q_min, grid.q_max],
        steps: grid.steps,
        rows,
        timing: Timing { total_seconds: start.elapsed().as_secs_f64(), ..Timing::default() },
    })
}
