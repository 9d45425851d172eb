use serde::Serialize;

/// Relative band within which an inequality is treated as an equality and
/// reported on the boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Exponent-regime flags for `(p, q)` in dimension `N` at order `s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentVerdict {
    /// `1 > 1/(p+1) + 1/(q+1) > (N-2s)/N`, both strict.
    pub subcritical: bool,
    /// Only the right-hand inequality: strictly below the critical hyperbola.
    pub below_critical_hyperbola: bool,
    /// `(N - 4s) max(p, q) < N + 4s`.
    pub pq_constraint: bool,
    /// `pq > 1`.
    pub superlinear: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Cmp {
    Less,
    Boundary,
    Greater,
}

fn compare(lhs: f64, rhs: f64) -> Cmp {
    let band = BOUNDARY_TOL * lhs.abs().max(rhs.abs()).max(1.0);
    if (lhs - rhs).abs() <= band {
        Cmp::Boundary
    } else if lhs < rhs {
        Cmp::Less
    } else {
        Cmp::Greater
    }
}

pub fn classify_exponents(p: f64, q: f64, n_dim: f64, s: f64) -> ExponentVerdict {
    let mut notes = Vec::new();
    let sum = 1.0 / (p + 1.0) + 1.0 / (q + 1.0);

    let left = match compare(sum, 1.0) {
        Cmp::Less => true,
        Cmp::Boundary => {
            notes.push("1/(p+1) + 1/(q+1) = 1: pq = 1 boundary".to_string());
            false
        }
        Cmp::Greater => false,
    };

    let right = if n_dim <= 2.0 * s {
        notes.push(format!(
            "N = {n_dim} <= 2s = {}: lower inequality is vacuous; existence theory requires N > 2s",
            2.0 * s
        ));
        true
    } else {
        match compare(sum, (n_dim - 2.0 * s) / n_dim) {
            Cmp::Greater => true,
            Cmp::Boundary => {
                notes.push("critical hyperbola boundary".to_string());
                false
            }
            Cmp::Less => false,
        }
    };

    let pq_constraint = match compare((n_dim - 4.0 * s) * p.max(q), n_dim + 4.0 * s) {
        Cmp::Less => true,
        Cmp::Boundary => {
            notes.push("(N-4s) max(p,q) = N+4s: constraint boundary".to_string());
            false
        }
        Cmp::Greater => false,
    };

    let pq = p * q;
    let superlinear = match compare(pq, 1.0) {
        Cmp::Greater => true,
        Cmp::Boundary => {
            notes.push("pq = 1: resonant case, excluded by the solvers".to_string());
            false
        }
        Cmp::Less => {
            notes.push("pq < 1: sublinear regime".to_string());
            false
        }
    };
    if s >= 1.0 {
        notes.push("s = 1 is a validation limit only".to_string());
    }

    ExponentVerdict {
        subcritical: left && right,
        below_critical_hyperbola: right,
        pq_constraint,
        superlinear,
        notes,
    }
}
