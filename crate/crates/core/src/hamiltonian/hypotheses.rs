//! Falsification checks for the structural hypotheses (H1)–(H7) on `H`.
//!
//! Inequalities with unspecified constants cannot be certified from samples.
//! Each check evaluates the inequality, or the ratio that defines its
//! constant, on seeded samples drawn from the boxes `[-R, R]^2` with
//! `R ∈ {1, 10, 100}`. A pass only means that no witness was found.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::HamiltonianSpec;
use crate::error::Result;

pub const BOXES: [f64; 3] = [1.0, 10.0, 100.0];

/// Relative slack for non-strict inequalities that hold with equality.
const SLACK: f64 = 1e-12;
/// A supremum that grows by more than this factor from the inner boxes to the
/// outermost box (or toward the origin, for local bounds) counts as unbounded.
const GROWTH_FACTOR: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Hypothesis {
    H1,
    H2,
    H3,
    H4,
    H5,
    H6,
    H7,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 7] = [
        Hypothesis::H1,
        Hypothesis::H2,
        Hypothesis::H3,
        Hypothesis::H4,
        Hypothesis::H5,
        Hypothesis::H6,
        Hypothesis::H7,
    ];
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisOutcome {
    pub hypothesis: Hypothesis,
    pub passed: bool,
    /// Empirical constant or extremal ratio supporting the verdict.
    pub statistic: f64,
    /// For (H2): the smallest scanned radius with no violation.
    pub smallest_r: Option<f64>,
    /// Violating sample(s): one point, or two points for (H6).
    pub witness: Option<Vec<(f64, f64)>>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub seed: u64,
    pub samples_per_box: usize,
    pub outcomes: Vec<HypothesisOutcome>,
    pub caveat: &'static str,
}

impl HypothesisReport {
    pub fn get(&self, h: Hypothesis) -> Option<&HypothesisOutcome> {
        self.outcomes.iter().find(|o| o.hypothesis == h)
    }

    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

struct Samples {
    /// `boxes[k]` holds samples uniform in `[-R_k, R_k]^2`.
    boxes: Vec<Vec<(f64, f64)>>,
    /// Log-uniform magnitudes in `[1e-6, 1]`, grouped by decade band:
    /// `near[0]` for `[1e-6, 1e-3)`, `near[1]` for `[1e-3, 1]`.
    near: [Vec<(f64, f64)>; 2],
    /// Pairs for the monotonicity check.
    pairs: Vec<((f64, f64), (f64, f64))>,
}

fn signed(rng: &mut ChaCha8Rng, mag: f64) -> f64 {
    if rng.random::<bool>() {
        mag
    } else {
        -mag
    }
}

fn draw(seed: u64, count: usize) -> Samples {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let boxes = BOXES
        .iter()
        .map(|&r| (0..count).map(|_| (rng.random_range(-r..=r), rng.random_range(-r..=r))).collect())
        .collect();
    let mut near: [Vec<(f64, f64)>; 2] = [Vec::new(), Vec::new()];
    for _ in 0..count {
        let e = rng.random_range(-6.0..0.0);
        let band = usize::from(e >= -3.0);
        let m = 10f64.powf(e);
        let (a, b): (f64, f64) = (rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0));
        let u = signed(&mut rng, m * a);
        let v = signed(&mut rng, m * b);
        near[band].push((u, v));
    }
    let mut pairs = Vec::with_capacity(2 * count);
    for &r in &BOXES {
        for _ in 0..count {
            let z1 = (rng.random_range(-r..=r), rng.random_range(-r..=r));
            // Close pairs probe local convexity, far pairs the global shape.
            let rel = 10f64.powf(rng.random_range(-4.0..0.0)) * r;
            let z2 = (z1.0 + rng.random_range(-rel..=rel), z1.1 + rng.random_range(-rel..=rel));
            pairs.push((z1, z2));
        }
    }
    Samples { boxes, near, pairs }
}

fn bounded_sup(inner: f64, outer: f64) -> bool {
    outer.is_finite() && inner.is_finite() && outer <= GROWTH_FACTOR * inner.max(f64::MIN_POSITIVE)
}

pub fn verify_hypotheses(
    spec: &HamiltonianSpec,
    which: &[Hypothesis],
    seed: u64,
    count: usize,
) -> Result<HypothesisReport> {
    let count = count.max(1);
    let samples = draw(seed, count);
    let mut outcomes = Vec::with_capacity(which.len());
    for &h in which {
        outcomes.push(match h {
            Hypothesis::H1 => check_h1(spec, &samples)?,
            Hypothesis::H2 => check_h2(spec, &samples)?,
            Hypothesis::H3 => check_h3(spec, &samples)?,
            Hypothesis::H4 => check_h4(spec, &samples)?,
            Hypothesis::H5 => check_h5(spec, &samples)?,
            Hypothesis::H6 => check_h6(spec, &samples)?,
            Hypothesis::H7 => check_h7(spec, &samples)?,
        });
    }
    Ok(HypothesisReport {
        seed,
        samples_per_box: count,
        outcomes,
        caveat: "falsification only: a pass means no violating sample was found",
    })
}

fn all_box_samples(s: &Samples) -> impl Iterator<Item = &(f64, f64)> {
    s.boxes.iter().flatten()
}

fn check_h1(spec: &HamiltonianSpec, s: &Samples) -> Result<HypothesisOutcome> {
    let mut min = f64::INFINITY;
    let mut witness = None;
    for &(u, v) in all_box_samples(s).chain(s.near.iter().flatten()) {
        let h = spec.eval(u, v)?.h;
        if h < min {
            min = h;
            if h < 0.0 {
                witness = Some(vec![(u, v)]);
            }
        }
    }
    Ok(HypothesisOutcome {
        hypothesis: Hypothesis::H1,
        passed: witness.is_none(),
        statistic: min,
        smallest_r: None,
        witness,
        detail: format!("min sampled H = {min:e}"),
    })
}

fn check_h2(spec: &HamiltonianSpec, s: &Samples) -> Result<HypothesisOutcome> {
    let (p, q) = (spec.p, spec.q);
    let mut smallest = None;
    let mut witness = None;
    let mut worst = f64::INFINITY;
    for &r0 in &BOXES {
        let mut violated = None;
        for &(u, v) in all_box_samples(s).filter(|(u, v)| u.abs() + v.abs() >= r0) {
            let val = spec.eval(u, v)?;
            let lhs = val.hu * u / (p + 1.0) + val.hv * v / (q + 1.0);
            let margin = lhs - val.h;
            worst = worst.min(margin / val.h.abs().max(f64::MIN_POSITIVE));
            if margin < -SLACK * val.h.abs().max(lhs.abs()) || val.h <= 0.0 {
                violated = Some((u, v));
                break;
            }
        }
        match violated {
            None => {
                smallest = Some(r0);
                break;
            }
            Some(z) => witness = Some(vec![z]),
        }
    }
    let passed = smallest.is_some();
    Ok(HypothesisOutcome {
        hypothesis: Hypothesis::H2,
        passed,
        statistic: worst,
        smallest_r: smallest,
        witness: if passed { None } else { witness },
        detail: match smallest {
            Some(r) => format!("no violation for |u|+|v| >= {r} (smallest scanned radius that passes)"),
            None => "violated for every scanned radius".to_string(),
        },
    })
}

fn check_h3(spec: &HamiltonianSpec, s: &Samples) -> Result<HypothesisOutcome> {
    let (p, q) = (spec.p, spec.q);
    let mut sups = [0.0f64; 2];
    let mut arg = [(0.0, 0.0); 2];
    for (band, pts) in s.near.iter().enumerate() {
        for &(u, v) in pts {
            let denom = u.abs().powf(p + 1.0) + v.abs().powf(q + 1.0);
            if denom == 0.0 {
                continue;
            }
            let ratio = spec.eval(u, v)?.h.abs() / denom;
            if !(ratio <= sups[band]) {
                sups[band] = ratio;
                arg[band] = (u, v);
            }
        }
    }
    // The band closest to the origin must not blow up relative to the outer one.
    let passed = bounded_sup(sups[1], sups[0]);
    Ok(HypothesisOutcome {
        hypothesis: Hypothesis::H3,
        passed,
        statistic: sups[0].max(sups[1]),
        smallest_r: None,
        witness: if passed { None } else { Some(vec![arg[0]]) },
        detail: format!(
            "sup |H|/(|u|^(p+1)+|v|^(q+1)) near 0: {:e} (|z|<1e-3), {:e} (|z|<1)",
            sups[0], sups[1]
        ),
    })
}

fn check_h4(spec: &HamiltonianSpec, s: &Samples) -> Result<HypothesisOutcome> {
    let (p, q) = (spec.p, spec.q);
    let eu = p * (q + 1.0) / (p + 1.0);
    let ev = q * (p + 1.0) / (q + 1.0);
    let mut sups = vec![0.0f64; BOXES.len()];
    let mut arg = (0.0, 0.0);
    for (k, pts) in s.boxes.iter().enumerate() {
        for &(u, v) in pts {
            let val = spec.eval(u, v)?;
            let ru = val.hu.abs() / (u.abs().powf(p) + v.abs().powf(eu) + 1.0);
            let rv = val.hv.abs() / (v.abs().powf(q) + u.abs().powf(ev) + 1.0);
            let r = ru.max(rv);
            if !(r <= sups[k]) {
                sups[k] = r;
                if k == BOXES.len() - 1 {
                    arg = (u, v);
                }
            }
        }
    }
    let inner = sups[..BOXES.len() - 1].iter().copied().fold(0.0, f64::max);
    let outer = sups[BOXES.len() - 1];
    let passed = bounded_sup(inner, outer);
    Ok(HypothesisOutcome {
        hypothesis: Hypothesis::H4,
        passed,
        statistic: inner.max(outer),
        smallest_r: None,
        witness: if passed { None } else { Some(vec![arg]) },
        detail: format!("sup gradient growth ratio: {inner:e} (R <= 10), {outer:e} (R = 100)"),
    })
}

fn check_h5(spec: &HamiltonianSpec, s: &Samples) -> Result<HypothesisOutcome> {
    let (p, q) = (spec.p, spec.q);
    let (a, b) = spec.coupling_exponents();
    let mut lower = f64::INFINITY;
    let mut lower_arg = (0.0, 0.0);
    let mut sups = vec![0.0f64; BOXES.len()];
    for (k, pts) in s.boxes.iter().enumerate() {
        for &(u, v) in pts {
            let val = spec.eval(u, v)?;
            let cross = u.abs().powf(a) * v.abs().powf(b);
            let (uu, vv) = (u.abs().powf(p + 1.0), v.abs().powf(q + 1.0));
            if uu > 0.0 {
                let lo = val.hu * u / uu;
                if lo < lower {
                    lower = lo;
                    lower_arg = (u, v);
                }
                sups[k] = sups[k].max(val.hu * u / (uu + cross));
            }
            if vv > 0.0 {
                let lo = val.hv * v / vv;
                if lo < lower {
                    lower = lo;
                    lower_arg = (u, v);
                }
                sups[k] = sups[k].max(val.hv * v / (vv + cross));
            }
        }
    }
    let inner = sups[..BOXES.len() - 1].iter().copied().fold(0.0, f64::max);
    let outer = sups[BOXES.len() - 1];
    let lower_ok = lower > 0.0;
    let upper_ok = bounded_sup(inner, outer);
    Ok(HypothesisOutcome {
        hypothesis: Hypothesis::H5,
        passed: lower_ok && upper_ok,
        statistic: lower,
        smallest_r: None,
        witness: if lower_ok { None } else { Some(vec![lower_arg]) },
        detail: format!("empirical C1 = {lower:e}, C2 sup = {:e}", inner.max(outer)),
    })
}

fn check_h6(spec: &HamiltonianSpec, s: &Samples) -> Result<HypothesisOutcome> {
    let mut min = f64::INFINITY;
    let mut witness = None;
    for &(z1, z2) in &s.pairs {
        if z1 == z2 {
            continue;
        }
        let g1 = spec.eval(z1.0, z1.1)?;
        let g2 = spec.eval(z2.0, z2.1)?;
        let dz = (z1.0 - z2.0, z1.1 - z2.1);
        let prod = (g1.hu - g2.hu) * dz.0 + (g1.hv - g2.hv) * dz.1;
        let rel = prod / (dz.0 * dz.0 + dz.1 * dz.1);
        if rel < min {
            min = rel;
        }
        if prod <= 0.0 && witness.is_none() {
            witness = Some(vec![z1, z2]);
        }
    }
    Ok(HypothesisOutcome {
        hypothesis: Hypothesis::H6,
        passed: witness.is_none(),
        statistic: min,
        smallest_r: None,
        detail: match &witness {
            None => format!("min <∇H(z1)-∇H(z2), z1-z2>/|z1-z2|^2 = {min:e}"),
            Some(w) => format!("monotonicity fails between {:?} and {:?}", w[0], w[1]),
        },
        witness,
    })
}

fn check_h7(spec: &HamiltonianSpec, s: &Samples) -> Result<HypothesisOutcome> {
    let (p, q, theta) = (spec.p, spec.q, spec.theta);
    let mut min = f64::INFINITY;
    let mut arg = (0.0, 0.0);
    // Far field only: C4 absorbs any bounded region.
    let far = s.boxes.last().into_iter().flatten().filter(|(u, v)| u.abs() + v.abs() >= 10.0);
    for &(u, v) in far {
        let val = spec.eval(u, v)?;
        let lhs = theta * val.hu * u + (1.0 - theta) * val.hv * v - val.h;
        let ratio = lhs / (u.abs().powf(p + 1.0) + v.abs().powf(q + 1.0));
        if ratio < min {
            min = ratio;
            arg = (u, v);
        }
    }
    let passed = min > 0.0;
    Ok(HypothesisOutcome {
        hypothesis: Hypothesis::H7,
        passed,
        statistic: min,
        smallest_r: None,
        witness: if passed { None } else { Some(vec![arg]) },
        detail: format!("theta = {theta}, empirical C3 = {min:e} on |u|+|v| >= 10"),
    })
}

/// Empirical constants of two-sided power-growth bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sandwich {
    /// `inf H / (|u|^{p+1} + |v|^{q+1})`
    pub a1: f64,
    /// `sup H / (|u|^{p+1} + |v|^{q+1})`
    pub a2: f64,
    /// `inf H* / (|f|^{1+1/p} + |g|^{1+1/q})`
    pub a3: f64,
    /// `sup H* / (|f|^{1+1/p} + |g|^{1+1/q})`
    pub a4: f64,
}

pub fn sandwich_constants(spec: &HamiltonianSpec, seed: u64, count: usize) -> Result<Sandwich> {
    let (p, q) = (spec.p, spec.q);
    let samples = draw(seed, count.max(1));
    let mut out = Sandwich {
        a1: f64::INFINITY,
        a2: 0.0,
        a3: f64::INFINITY,
        a4: 0.0,
    };
    for &(u, v) in all_box_samples(&samples) {
        let d = u.abs().powf(p + 1.0) + v.abs().powf(q + 1.0);
        if d > 0.0 {
            let r = spec.eval(u, v)?.h / d;
            out.a1 = out.a1.min(r);
            out.a2 = out.a2.max(r);
        }
        // Reuse the same points as dual arguments.
        let (f, g) = (u, v);
        let d = f.abs().powf(1.0 + 1.0 / p) + g.abs().powf(1.0 + 1.0 / q);
        if d > 0.0 {
            let r = super::conjugate_point(spec, f, g)?.hstar / d;
            out.a3 = out.a3.min(r);
            out.a4 = out.a4.max(r);
        }
    }
    Ok(out)
}
