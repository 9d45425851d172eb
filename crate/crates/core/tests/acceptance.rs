//! Acceptance gate: runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion. Exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use fham_core::dual::{eval_j, run_mountain_pass, MpaConfig};
use fham_core::grid::{l2, power_sum, reversed, Field, Grid1D};
use fham_core::hamiltonian::{
    classify_exponents, conjugate_point, conjugate_point_newton, signed_pow, HamiltonianSpec,
};
use fham_core::lane_emden::{eval_i, minimize_ground_state, uniqueness_probe, GroundState, Init, NehariOptions};
use fham_core::operator::{Backend, DiscreteOperator};
use fham_core::spectral::{
    admissible_alpha_range, apply_power, energy_e, quadratic_form, split_pair, PairField,
};
use fham_core::{hopf_ratio, SpectralData};
use nalgebra::DVector;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn operator(n: usize, s: f64) -> DiscreteOperator {
    DiscreteOperator::assemble(&Grid1D::new(-1.0, 1.0, n).unwrap(), s, Backend::Restricted).unwrap()
}

fn ensure(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, format!("runtime {:.1}s exceeds {:.0}s", t.as_secs_f64(), limit.as_secs_f64()))
}

fn random_field(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Field {
    Field::from_fn(n, |_, _| rng.random_range(lo..hi))
}

fn comparison_and_hopf() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = f64::INFINITY;
    let mut min_hopf = f64::INFINITY;
    for &s in &[0.25, 0.5, 0.75] {
        let op = operator(256, s);
        for _ in 0..200 {
            let keep: f64 = rng.random_range(0.05..1.0);
            let f = Field::from_fn(256, |_, _| {
                if rng.random_bool(keep) {
                    rng.random_range(0.0..1.0)
                } else {
                    0.0
                }
            });
            let u = op.solve(&f).map_err(|e| e.to_string())?;
            let ratio = u.min() / u.amax().max(f64::MIN_POSITIVE);
            worst = worst.min(ratio);
        }
        let xi = op.torsion();
        min_hopf = min_hopf.min(hopf_ratio(&op.grid, &xi, s).map_err(|e| e.to_string())?);
    }
    ensure(worst >= -1e-12, format!("min u / |u|_inf = {worst:e}"))?;
    ensure(min_hopf > 0.0, format!("hopf ratio {min_hopf:e}"))?;
    within_time(start, Duration::from_secs(10))?;
    Ok(format!("min u/|u|_inf = {worst:.3e}, min Hopf ratio = {min_hopf:.4}"))
}

fn torsion_oracle() -> Check {
    let start = Instant::now();
    let mut errs = Vec::new();
    for &n in &[256, 512, 1024] {
        let op = operator(n, 0.5);
        let xi = op.torsion();
        let exact = op.grid.field(|x| (1.0 - x * x).sqrt());
        errs.push(l2(&op.grid, &(&xi - &exact)) / l2(&op.grid, &exact));
    }
    ensure(errs[0] > errs[1] && errs[1] > errs[2], format!("errors not decreasing: {errs:?}"))?;
    ensure(errs[2] <= 0.05, format!("error at n = 1024 is {:e}", errs[2]))?;
    within_time(start, Duration::from_secs(30))?;
    Ok(format!("relative L2 errors {:.3e}, {:.3e}, {:.3e}", errs[0], errs[1], errs[2]))
}

fn spectral_calculus() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut semigroup = 0.0_f64;
    let mut full = 0.0_f64;
    let mut sign_violation = 0.0_f64;
    for &s in &[0.3, 0.75] {
        let op = operator(128, s);
        let sd = op.eigendecompose();
        for _ in 0..20 {
            let u = random_field(&mut rng, 128, -1.0, 1.0);
            let a: f64 = rng.random_range(-1.0..2.0 * s);
            let b: f64 = rng.random_range(-1.0..2.0 * s);
            let ab = apply_power(&sd, a, &apply_power(&sd, b, &u).unwrap()).unwrap();
            let direct = apply_power(&sd, a + b, &u).unwrap();
            semigroup = semigroup.max((&ab - &direct).norm() / direct.norm());
            let lu = op.apply(&u).unwrap();
            let spec_lu = apply_power(&sd, 2.0 * s, &u).unwrap();
            full = full.max((&spec_lu - &lu).norm() / lu.norm());
        }
        for _ in 0..100 {
            let alpha = rng.random_range(0.05..2.0 * s - 0.05);
            let z = PairField::new(random_field(&mut rng, 128, -1.0, 1.0), random_field(&mut rng, 128, -1.0, 1.0))
                .unwrap();
            let (plus, minus) = split_pair(&sd, alpha, &z).unwrap();
            let qp = quadratic_form(&sd, alpha, &plus).unwrap();
            let qm = quadratic_form(&sd, alpha, &minus).unwrap();
            let scale = qp.abs().max(qm.abs()).max(1e-300);
            sign_violation = sign_violation.max((-qp / scale).max(qm / scale));
        }
    }
    ensure(semigroup <= 1e-10, format!("semigroup error {semigroup:e}"))?;
    ensure(full <= 1e-8, format!("A^(2s) vs operator error {full:e}"))?;
    ensure(sign_violation <= 1e-12, format!("E+/E- sign violation {sign_violation:e}"))?;
    Ok(format!("semigroup {semigroup:.2e}, A^(2s) {full:.2e}, E± signs ok"))
}

fn fenchel_engine() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let specs = [
        HamiltonianSpec::lane_emden(2.0, 3.0).unwrap(),
        HamiltonianSpec::lane_emden(0.5, 0.7).unwrap(),
        HamiltonianSpec::coupled_symmetric(2.0, 3.0, 0.1).unwrap(),
        HamiltonianSpec::coupled_symmetric(1.5, 1.5, 0.05).unwrap(),
    ];
    let mut roundtrip = 0.0_f64;
    let mut fy = 0.0_f64;
    let mut closed = 0.0_f64;
    for spec in &specs {
        for _ in 0..1000 {
            let z = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let hv = spec.eval(z.0, z.1).map_err(|e| e.to_string())?;
            let cp = conjugate_point(spec, hv.hu, hv.hv).map_err(|e| e.to_string())?;
            let zs = 1f64.max(z.0.abs()).max(z.1.abs());
            roundtrip = roundtrip.max((cp.u - z.0).abs().max((cp.v - z.1).abs()) / zs);
            let pairing = z.0 * hv.hu + z.1 * hv.hv;
            fy = fy.max((hv.h + cp.hstar - pairing).abs() / 1f64.max(pairing.abs()));
            if spec.is_lane_emden() {
                let nt = conjugate_point_newton(spec, hv.hu, hv.hv).map_err(|e| e.to_string())?;
                let d = (nt.hstar - cp.hstar).abs() / (1.0 + cp.hstar.abs());
                let du = (nt.u - cp.u).abs() / (1.0 + cp.u.abs());
                let dv = (nt.v - cp.v).abs() / (1.0 + cp.v.abs());
                closed = closed.max(d).max(du).max(dv);
            }
        }
    }
    ensure(roundtrip <= 1e-8, format!("roundtrip error {roundtrip:e}"))?;
    ensure(fy <= 1e-8, format!("Fenchel-Young residual {fy:e}"))?;
    ensure(closed <= 1e-10, format!("closed form vs Newton {closed:e}"))?;
    Ok(format!("roundtrip {roundtrip:.2e}, Fenchel-Young {fy:.2e}, closed vs Newton {closed:.2e}"))
}

fn directional_error<F: Fn(&Field) -> f64>(value: F, grad: &Field, x: &Field, d: &Field, h: f64) -> f64 {
    let eps = 1e-5 * x.amax().max(1.0) / d.amax();
    let fd = (value(&(x + d * eps)) - value(&(x - d * eps))) / (2.0 * eps);
    let an = h * grad.dot(d);
    (fd - an).abs() / an.abs().max(1e-8)
}

fn gradient_certificates() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let op = operator(48, 0.3);
    let h = op.grid.h;
    let n = op.n();
    let mut worst = [0.0_f64; 3];

    for &(p, q) in &[(2.0, 2.0), (0.5, 3.0), (3.0, 0.6)] {
        let mut tested = 0;
        while tested < 5 {
            let u = op.solve(&random_field(&mut rng, n, 0.2, 1.5)).unwrap();
            if op.apply(&u).unwrap().iter().any(|x| x.abs() <= 1e-3) {
                continue;
            }
            let val = eval_i(&op, p, q, &u).unwrap();
            let d = random_field(&mut rng, n, -1.0, 1.0);
            let e = directional_error(|w| eval_i(&op, p, q, w).unwrap().value, &val.grad, &u, &d, h);
            worst[0] = worst[0].max(e);
            tested += 1;
        }
    }

    let spec = HamiltonianSpec::lane_emden(2.0, 3.0).unwrap();
    for _ in 0..5 {
        let f = random_field(&mut rng, n, 0.2, 1.0);
        let g = random_field(&mut rng, n, 0.2, 1.0);
        let val = eval_j(&op, &spec, &f, &g).unwrap();
        let df = random_field(&mut rng, n, -1.0, 1.0);
        let dg = random_field(&mut rng, n, -1.0, 1.0);
        let joint = |t: f64| eval_j(&op, &spec, &(&f + &df * t), &(&g + &dg * t)).unwrap().value;
        let eps = 1e-6;
        let fd = (joint(eps) - joint(-eps)) / (2.0 * eps);
        let an = h * (val.grad.u.dot(&df) + val.grad.v.dot(&dg));
        worst[1] = worst[1].max((fd - an).abs() / an.abs().max(1e-8));
    }

    let sd = op.eigendecompose();
    let alpha = 0.25;
    for _ in 0..5 {
        let z = PairField::new(random_field(&mut rng, n, -1.0, 1.0), random_field(&mut rng, n, -1.0, 1.0)).unwrap();
        let val = energy_e(&sd, alpha, &z, &spec).unwrap();
        let dz = PairField::new(random_field(&mut rng, n, -1.0, 1.0), random_field(&mut rng, n, -1.0, 1.0)).unwrap();
        let joint = |t: f64| energy_e(&sd, alpha, &z.add(&dz.scale(t)), &spec).unwrap().value;
        let eps = 1e-6;
        let fd = (joint(eps) - joint(-eps)) / (2.0 * eps);
        let an = h * (val.gradient.u.dot(&dz.u) + val.gradient.v.dot(&dz.v));
        worst[2] = worst[2].max((fd - an).abs() / an.abs().max(1e-8));
    }

    ensure(worst.iter().all(|&e| e <= 1e-5), format!("relative FD errors I, J, E = {worst:?}"))?;
    Ok(format!("relative FD errors: I {:.2e}, J {:.2e}, E {:.2e}", worst[0], worst[1], worst[2]))
}

fn nehari_ground_state(op: &DiscreteOperator) -> Result<GroundState, String> {
    minimize_ground_state(op, 2.0, 2.0, &Init::Torsion, &NehariOptions::default()).map_err(|e| e.to_string())
}

fn nehari_criterion(op: &DiscreteOperator, gs: &Result<GroundState, String>, elapsed: Duration) -> Check {
    let gs = gs.as_ref().map_err(|e| e.clone())?;
    let tol = NehariOptions::default().tol;
    ensure(gs.free_grad_norm <= tol * gs.scale, format!("free gradient {:e}", gs.free_grad_norm))?;
    ensure(gs.u.iter().all(|&x| x > 0.0), "u is not positive".into())?;
    let sym = l2(&op.grid, &(&gs.u - reversed(&gs.u))) / l2(&op.grid, &gs.u);
    ensure(sym <= 1e-6, format!("asymmetry {sym:e}"))?;
    ensure(gs.c_i > 0.0, format!("c_I = {}", gs.c_i))?;
    let escale = gs.energy_scale(op, 2.0);
    let ident = (gs.energy_k - gs.c_i).abs();
    ensure(ident <= 1e-8 * escale, format!("|K - I| = {ident:e}, scale {escale:e}"))?;
    let pow = (power_sum(&op.grid, &gs.u, 3.0) - power_sum(&op.grid, &gs.v, 3.0)).abs();
    ensure(pow <= 10.0 * tol, format!("|∫u^3 - ∫v^3| = {pow:e}"))?;
    ensure(elapsed < Duration::from_secs(60), format!("runtime {:.1}s", elapsed.as_secs_f64()))?;
    Ok(format!(
        "c_I = {:.10}, gradient {:.2e} (scale {:.3}), |K - I| = {ident:.2e}, asymmetry {sym:.1e}, {:.2}s",
        gs.c_i,
        gs.free_grad_norm,
        gs.scale,
        elapsed.as_secs_f64()
    ))
}

/// Monotone fixed-point iteration `u <- 𝒜 Φ_q(𝒜 Φ_p(u))` from the torsion
/// function, with its own Cholesky factorization.
fn monotone_oracle(op: &DiscreteOperator, p: f64, q: f64) -> Field {
    let chol = op.matrix.clone().cholesky().expect("operator is SPD");
    let mut u = chol.solve(&DVector::from_element(op.n(), 1.0));
    for _ in 0..10_000 {
        let v = chol.solve(&u.map(|x| signed_pow(x, p)));
        let next = chol.solve(&v.map(|x| signed_pow(x, q)));
        let change = (&next - &u).amax() / next.amax();
        u = next;
        if change <= 1e-14 {
            break;
        }
    }
    u
}

fn uniqueness() -> Check {
    let start = Instant::now();
    let op = operator(257, 0.3);
    let (p, q) = (0.5, 0.5);
    let rep = uniqueness_probe(&op, p, q, 5, 2024, &NehariOptions::default()).map_err(|e| e.to_string())?;
    let dist = rep.max_rel_distance.unwrap_or(f64::INFINITY);
    let beta = rep.min_beta.unwrap_or(0.0);
    ensure(dist <= 1e-4, format!("max pairwise relative distance {dist:e}"))?;
    ensure(beta >= 1.0 - 1e-3, format!("min beta ratio {beta}"))?;
    ensure(rep.levels.iter().all(|&c| c < 0.0), format!("levels {:?}", rep.levels))?;
    let oracle = monotone_oracle(&op, p, q);
    let mismatch = rep
        .solutions
        .iter()
        .map(|s| (&s.u - &oracle).amax() / oracle.amax())
        .fold(0.0, f64::max);
    ensure(mismatch <= 1e-4, format!("oracle mismatch {mismatch:e}"))?;
    within_time(start, Duration::from_secs(120))?;
    Ok(format!(
        "distance {dist:.2e}, min beta {beta:.8}, c_I = {:.8}, oracle mismatch {mismatch:.2e}, {:.2}s",
        rep.levels[0],
        start.elapsed().as_secs_f64()
    ))
}

fn dual_method() -> Check {
    let start = Instant::now();
    let op = operator(129, 0.3);
    let spec = HamiltonianSpec::lane_emden(2.0, 2.0).unwrap();
    let cfg = MpaConfig::for_exponents(2.0, 2.0).unwrap();
    let cp = run_mountain_pass(&op, &spec, &cfg).map_err(|e| e.to_string())?;
    ensure(cp.grad_norm <= 1e-8, format!("gradient {:e}", cp.grad_norm))?;
    ensure(cp.level > 0.0, format!("level {}", cp.level))?;
    let scale = cp.residual_scale(&op);
    ensure(
        cp.r_u <= 1e-6 * scale && cp.r_v <= 1e-6 * scale,
        format!("residuals {:e}, {:e} (scale {scale})", cp.r_u, cp.r_v),
    )?;
    let cross = match nehari_ground_state(&op) {
        Ok(gs) => {
            let d = l2(&op.grid, &(&cp.primal_u - &gs.u)) / l2(&op.grid, &gs.u);
            let verdict = if d <= 1e-2 { "agrees" } else { "DIFFERS (reported only)" };
            format!("Nehari cross-check {verdict}: relative L2 {d:.2e}")
        }
        Err(e) => format!("Nehari cross-check unavailable: {e}"),
    };
    Ok(format!(
        "level {:.10}, gradient {:.2e}, residuals {:.2e}/{:.2e}; {cross}; {:.2}s",
        cp.level,
        cp.grad_norm,
        cp.r_u,
        cp.r_v,
        start.elapsed().as_secs_f64()
    ))
}

fn energy_certificate(op: &DiscreteOperator, gs: &Result<GroundState, String>) -> Check {
    let gs = gs.as_ref().map_err(|e| e.clone())?;
    let window = admissible_alpha_range(2.0, 2.0, 1.0, op.s);
    let alpha = window.midpoint().ok_or("alpha window is empty")?;
    let sd: SpectralData = op.eigendecompose();
    let spec = HamiltonianSpec::lane_emden(2.0, 2.0).unwrap();
    let z = PairField::new(gs.u.clone(), gs.v.clone()).unwrap();
    let e = energy_e(&sd, alpha, &z, &spec).map_err(|e| e.to_string())?;
    let g = e.gradient_norm(&sd);
    ensure(g <= 1e-6 * gs.scale, format!("|E'| = {g:e} at alpha = {alpha}"))?;
    Ok(format!("|E'| = {g:.2e} at alpha = {alpha:.4} (window ({:.4}, {:.4}))", window.lo, window.hi))
}

fn classifier_table() -> Check {
    let mut mismatches = Vec::new();
    let cases = [(Ratio::from_integer(1i64), Ratio::new(1i64, 4)), (Ratio::from_integer(3), Ratio::new(1, 2))];
    let one = Ratio::from_integer(1i64);
    let mut checked = 0;
    for &(nd, s) in &cases {
        for i in 0..41i64 {
            for j in 0..41i64 {
                let p = Ratio::new(2 + i, 10);
                let q = Ratio::new(2 + j, 10);
                let sum = one / (p + one) + one / (q + one);
                let crit = (nd - s * 2) / nd;
                let below = nd <= s * 2 || sum > crit;
                let subcritical = sum < one && below;
                let pq_constraint = (nd - s * 4) * p.max(q) < nd + s * 4;
                let superlinear = p * q > one;
                let to_f = |r: Ratio<i64>| *r.numer() as f64 / *r.denom() as f64;
                let v = classify_exponents(to_f(p), to_f(q), to_f(nd), to_f(s));
                let expected = (subcritical, below, pq_constraint, superlinear);
                let got = (v.subcritical, v.below_critical_hyperbola, v.pq_constraint, v.superlinear);
                if expected != got {
                    mismatches.push(format!("N={nd} s={s} p={p} q={q}: expected {expected:?} got {got:?}"));
                }
                checked += 1;
            }
        }
    }
    if let Some(first) = mismatches.first() {
        return Err(format!("{} mismatches, first: {first}", mismatches.len()));
    }
    Ok(format!("{checked} lattice points, 0 mismatches"))
}

fn main() -> ExitCode {
    let op6 = operator(257, 0.3);
    let t = Instant::now();
    let gs6 = nehari_ground_state(&op6);
    let nehari_time = t.elapsed();

    let results: Vec<(&str, Check)> = vec![
        ("1 comparison principle and Hopf ratio", comparison_and_hopf()),
        ("2 torsion closed form", torsion_oracle()),
        ("3 spectral calculus", spectral_calculus()),
        ("4 Fenchel engine", fenchel_engine()),
        ("5 gradient certificates", gradient_certificates()),
        ("6 Nehari ground state", nehari_criterion(&op6, &gs6, nehari_time)),
        ("7 uniqueness for pq < 1", uniqueness()),
        ("8 dual mountain pass", dual_method()),
        ("9 indefinite energy certificate", energy_certificate(&op6, &gs6)),
        ("10 classifier truth table", classifier_table()),
    ];
    let mut failed = 0;
    for (name, res) in &results {
        match res {
            Ok(msg) => println!("PASS  criterion {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  criterion {name}: {msg}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
