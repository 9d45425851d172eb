//! Fractional powers `A^α u = sum_j λ_j^{α/2s} <u, φ_j> φ_j` of the discrete
//! operator and the pair-space machinery built on them: the splitting into
//! `E⁺ ⊕ E⁻`, the operator `L(u, v) = (A^{2s-2α} v, A^{2α-2s} u)`, and the
//! strongly indefinite energy `ℰ(u, v) = ∫ A^α u A^{2s-α} v - ∫ H(u, v)`.
//!
//! Nothing here solves for critical points; `ℰ` serves as an independent
//! criticality certificate for pairs produced by the other solvers.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{l2, Field};
use crate::hamiltonian::{classify_exponents, HamiltonianSpec};
use crate::operator::SpectralData;

#[derive(Debug, Clone, PartialEq)]
pub struct PairField {
    pub u: Field,
    pub v: Field,
}

impl PairField {
    pub fn new(u: Field, v: Field) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::SizeMismatch { expected: u.len(), got: v.len() });
        }
        Ok(PairField { u, v })
    }

    pub fn zeros(n: usize) -> Self {
        PairField { u: Field::zeros(n), v: Field::zeros(n) }
    }

    pub fn add(&self, other: &PairField) -> PairField {
        PairField { u: &self.u + &other.u, v: &self.v + &other.v }
    }

    pub fn sub(&self, other: &PairField) -> PairField {
        PairField { u: &self.u - &other.u, v: &self.v - &other.v }
    }

    pub fn scale(&self, c: f64) -> PairField {
        PairField { u: &self.u * c, v: &self.v * c }
    }

    pub fn amax(&self) -> f64 {
        self.u.amax().max(self.v.amax())
    }
}

fn check_field(spec: &SpectralData, u: &Field) -> Result<()> {
    if u.len() != spec.n() {
        return Err(Error::SizeMismatch { expected: spec.n(), got: u.len() });
    }
    Ok(())
}

fn check_pair(spec: &SpectralData, z: &PairField) -> Result<()> {
    check_field(spec, &z.u)?;
    check_field(spec, &z.v)
}

fn check_alpha(spec: &SpectralData, alpha: f64) -> Result<()> {
    let two_s = 2.0 * spec.s;
    if !(alpha > 0.0 && alpha < two_s) {
        return Err(Error::domain(format!("alpha must lie in (0, {two_s}), got {alpha}")));
    }
    Ok(())
}

/// `A^α u` for any real `α`.
pub fn apply_power(spec: &SpectralData, alpha: f64, u: &Field) -> Result<Field> {
    if !alpha.is_finite() {
        return Err(Error::domain(format!("power must be finite, got {alpha}")));
    }
    check_field(spec, u)?;
    let expo = alpha / (2.0 * spec.s);
    let mut c = spec.coefficients(u);
    for (cj, lj) in c.iter_mut().zip(spec.lambdas.iter()) {
        *cj *= lj.powf(expo);
    }
    Ok(spec.synthesize(&c))
}

/// Splits `z` into its `E⁺` and `E⁻` components.
pub fn split_pair(spec: &SpectralData, alpha: f64, z: &PairField) -> Result<(PairField, PairField)> {
    check_alpha(spec, alpha)?;
    check_pair(spec, z)?;
    let s2 = 2.0 * spec.s;
    let av = apply_power(spec, s2 - 2.0 * alpha, &z.v)?;
    let au = apply_power(spec, 2.0 * alpha - s2, &z.u)?;
    let plus = PairField { u: (&z.u + &av) * 0.5, v: (&z.v + &au) * 0.5 };
    let minus = PairField { u: (&z.u - &av) * 0.5, v: (&z.v - &au) * 0.5 };
    Ok((plus, minus))
}

/// `L(u, v) = (A^{2s-2α} v, A^{2α-2s} u)`.
pub fn apply_l(spec: &SpectralData, alpha: f64, z: &PairField) -> Result<PairField> {
    check_alpha(spec, alpha)?;
    check_pair(spec, z)?;
    let s2 = 2.0 * spec.s;
    Ok(PairField {
        u: apply_power(spec, s2 - 2.0 * alpha, &z.v)?,
        v: apply_power(spec, 2.0 * alpha - s2, &z.u)?,
    })
}

/// Inner product of `E^α × E^{2s-α}`:
/// `∫ A^α u₁ A^α u₂ + ∫ A^{2s-α} v₁ A^{2s-α} v₂`.
pub fn pair_inner(spec: &SpectralData, alpha: f64, z: &PairField, w: &PairField) -> Result<f64> {
    check_pair(spec, z)?;
    check_pair(spec, w)?;
    let beta = 2.0 * spec.s - alpha;
    let h = spec.grid.h;
    let uu = apply_power(spec, alpha, &z.u)?.dot(&apply_power(spec, alpha, &w.u)?);
    let vv = apply_power(spec, beta, &z.v)?.dot(&apply_power(spec, beta, &w.v)?);
    Ok(h * (uu + vv))
}

/// Quadratic part `∫ A^α u A^{2s-α} v` of the energy.
pub fn quadratic_form(spec: &SpectralData, alpha: f64, z: &PairField) -> Result<f64> {
    check_pair(spec, z)?;
    let au = apply_power(spec, alpha, &z.u)?;
    let bv = apply_power(spec, 2.0 * spec.s - alpha, &z.v)?;
    Ok(spec.grid.h * au.dot(&bv))
}

#[derive(Debug, Clone)]
pub struct EnergyValue {
    pub value: f64,
    /// Quadrature representative of `ℰ'`: `(A^{2s} v - H_u, A^{2s} u - H_v)`.
    pub gradient: PairField,
}

impl EnergyValue {
    /// Discrete `L^2` norm of the gradient pair.
    pub fn gradient_norm(&self, spec: &SpectralData) -> f64 {
        let g = &spec.grid;
        (l2(g, &self.gradient.u).powi(2) + l2(g, &self.gradient.v).powi(2)).sqrt()
    }
}

pub fn energy_e(spec: &SpectralData, alpha: f64, z: &PairField, ham: &HamiltonianSpec) -> Result<EnergyValue> {
    check_alpha(spec, alpha)?;
    check_pair(spec, z)?;
    let n = spec.n();
    let quad = quadratic_form(spec, alpha, z)?;
    let mut hsum = 0.0;
    let mut hu = DVector::zeros(n);
    let mut hv = DVector::zeros(n);
    for i in 0..n {
        let val = ham.eval(z.u[i], z.v[i])?;
        hsum += val.h;
        hu[i] = val.hu;
        hv[i] = val.hv;
    }
    let s2 = 2.0 * spec.s;
    let gradient = PairField {
        u: apply_power(spec, s2, &z.v)? - hu,
        v: apply_power(spec, s2, &z.u)? - hv,
    };
    Ok(EnergyValue { value: quad - spec.grid.h * hsum, gradient })
}

/// Window of admissible interpolation exponents `α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaWindow {
    /// `N (1/2 - 1/(max(p,q)+1))`
    pub raw_lo: f64,
    /// `N (1/(min(p,q)+1) - (N-4s)/(2N))`
    pub raw_hi: f64,
    /// Window clipped to `(0, 2s)`.
    pub lo: f64,
    pub hi: f64,
    /// The clipped window is nonempty and the exponent conditions it relies on hold.
    pub admissible: bool,
}

impl AlphaWindow {
    pub fn midpoint(&self) -> Option<f64> {
        self.admissible.then(|| 0.5 * (self.lo + self.hi))
    }

    pub fn contains(&self, alpha: f64) -> bool {
        self.admissible && alpha > self.lo && alpha < self.hi
    }
}

pub fn admissible_alpha_range(p: f64, q: f64, n_dim: f64, s: f64) -> AlphaWindow {
    let raw_lo = n_dim * (0.5 - 1.0 / (p.max(q) + 1.0));
    let raw_hi = n_dim * (1.0 / (p.min(q) + 1.0) - (n_dim - 4.0 * s) / (2.0 * n_dim));
    let lo = raw_lo.max(0.0);
    let hi = raw_hi.min(2.0 * s);
    let verdict = classify_exponents(p, q, n_dim, s);
    let admissible = lo < hi && verdict.subcritical && verdict.pq_constraint;
    AlphaWindow { raw_lo, raw_hi, lo, hi, admissible }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::operator::{Backend, DiscreteOperator};
    use approx::assert_relative_eq;

    fn setup(n: usize, s: f64) -> (DiscreteOperator, SpectralData) {
        let g = Grid1D::new(-1.0, 1.0, n).unwrap();
        let op = DiscreteOperator::assemble(&g, s, Backend::Restricted).unwrap();
        let sd = op.eigendecompose();
        (op, sd)
    }

    #[test]
    fn zero_power_is_identity() {
        let (op, sd) = setup(40, 0.35);
        let u = op.grid.field(|x| x.exp() * (1.0 - x * x));
        assert!((apply_power(&sd, 0.0, &u).unwrap() - &u).amax() < 1e-10 * u.amax());
    }

    #[test]
    fn full_power_matches_operator() {
        let (op, sd) = setup(40, 0.35);
        let u = op.grid.field(|x| (2.0 * x).cos() + x);
        let a = apply_power(&sd, 0.7, &u).unwrap();
        let b = op.apply(&u).unwrap();
        assert!((a - &b).amax() < 1e-8 * b.amax());
    }

    #[test]
    fn single_mode_scaling() {
        let (_, sd) = setup(30, 0.5);
        let phi = sd.mode(0);
        let out = apply_power(&sd, 0.37, &phi).unwrap();
        let expected = &phi * sd.lambdas[0].powf(0.37);
        assert!((out - expected).amax() < 1e-10 * phi.amax());
        assert!(apply_power(&sd, f64::NAN, &phi).is_err());
    }

    #[test]
    fn first_pair_mode_lies_in_plus_space() {
        let (_, sd) = setup(30, 0.4);
        let alpha = 0.3;
        let s2 = 0.8;
        let l1 = sd.lambdas[0];
        let phi = sd.mode(0);
        let e1 = PairField { u: &phi * l1.powf(-alpha / s2), v: &phi * l1.powf((alpha - s2) / s2) };
        let (plus, minus) = split_pair(&sd, alpha, &e1).unwrap();
        assert!((plus.sub(&e1)).amax() < 1e-12);
        assert!(minus.amax() < 1e-12);
    }

    #[test]
    fn minus_space_and_reconstruction() {
        let (op, sd) = setup(30, 0.4);
        let alpha = 0.5;
        let u = op.grid.field(|x| (1.0 - x * x) * (1.0 + x));
        let z = PairField { v: -apply_power(&sd, 2.0 * alpha - 0.8, &u).unwrap(), u };
        let (plus, minus) = split_pair(&sd, alpha, &z).unwrap();
        assert!(plus.amax() < 1e-12 * z.amax());
        assert!(minus.sub(&z).amax() < 1e-12 * z.amax());
        assert!(matches!(split_pair(&sd, 0.8, &z), Err(Error::Domain(_))));
        assert!(matches!(apply_l(&sd, 0.0, &z), Err(Error::Domain(_))));
    }

    #[test]
    fn l_acts_as_plus_minus_identity() {
        let (op, sd) = setup(25, 0.3);
        let alpha = 0.2;
        let z = PairField { u: op.grid.field(|x| x.sin() + 0.3), v: op.grid.field(|x| x * x) };
        let (plus, minus) = split_pair(&sd, alpha, &z).unwrap();
        let lp = apply_l(&sd, alpha, &plus).unwrap();
        let lm = apply_l(&sd, alpha, &minus).unwrap();
        assert!(lp.sub(&plus).amax() < 1e-10 * plus.amax());
        assert!(lm.add(&minus).amax() < 1e-10 * minus.amax());
    }

    #[test]
    fn energy_trivial_values() {
        let (_, sd) = setup(25, 0.3);
        let h = HamiltonianSpec::lane_emden(2.0, 2.0).unwrap();
        let zero = PairField::zeros(25);
        assert_eq!(energy_e(&sd, 0.3, &zero, &h).unwrap().value, 0.0);
        let flat = HamiltonianSpec::custom("zero", 2.0, 2.0, |_, _| Ok((0.0, 0.0, 0.0))).unwrap();
        let phi = sd.mode(0);
        let e = energy_e(&sd, 0.25, &PairField { u: phi.clone(), v: phi }, &flat).unwrap();
        assert_relative_eq!(e.value, sd.lambdas[0], max_relative = 1e-10);
    }

    #[test]
    fn window_examples() {
        let w = admissible_alpha_range(2.0, 2.0, 1.0, 0.25);
        assert_relative_eq!(w.lo, 1.0 / 6.0, max_relative = 1e-14);
        assert_relative_eq!(w.hi, 1.0 / 3.0, max_relative = 1e-14);
        assert!(w.admissible);
        assert!(w.contains(w.midpoint().unwrap()));

        let lin = admissible_alpha_range(1.0, 1.0, 1.0, 0.25);
        assert!(!lin.admissible);
        assert!(lin.midpoint().is_none());
    }
}
