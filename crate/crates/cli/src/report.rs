use fham_core::dual::CriticalPair;
use fham_core::hamiltonian::{HamiltonianSummary, HypothesisOutcome};
use fham_core::lane_emden::GroundState;
use fham_core::{AlphaWindow, ExponentVerdict};
use serde::Serialize;

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    Nonconverged,
    RejectedRegime,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::Nonconverged => "nonconverged",
            Status::RejectedRegime => "rejected-regime",
        }
    }

    /// The worse of two statuses.
    pub fn combine(self, other: Status) -> Status {
        use Status::*;
        match (self, other) {
            (RejectedRegime, _) | (_, RejectedRegime) => RejectedRegime,
            (Nonconverged, _) | (_, Nonconverged) => Nonconverged,
            _ => Converged,
        }
    }
}

/// Wall-clock measurements; the only part of a report that differs between
/// identical runs.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub nehari_seconds: Option<f64>,
    pub dual_seconds: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NehariReport {
    pub status: Status,
    pub message: Option<String>,
    pub result: Option<GroundState>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualReport {
    pub status: Status,
    pub message: Option<String>,
    pub k_exp: Option<f64>,
    pub l_exp: Option<f64>,
    pub result: Option<CriticalPair>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyCertificate {
    pub alpha: f64,
    pub grad_norm: f64,
    pub scale: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CrossChecks {
    /// `|ℰ'(u, v)|` at the midpoint of the admissible α window.
    pub energy_certificate: Option<EnergyCertificate>,
    /// `|K(u, v) - I(u)|`
    pub energy_identity: Option<f64>,
    /// `|∫|u|^{p+1} - ∫|v|^{q+1}|`
    pub power_balance: Option<f64>,
    pub hopf_ratio_u: Option<f64>,
    pub hopf_ratio_v: Option<f64>,
    /// Relative `L²` distance between the dual and Nehari `u`.
    pub dual_vs_nehari: Option<f64>,
    /// Largest nodewise Fenchel–Young defect at the dual critical point.
    pub fenchel_young: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub status: Status,
    pub config: RunConfig,
    pub warnings: Vec<String>,
    pub verdict: ExponentVerdict,
    pub alpha_window: AlphaWindow,
    pub hamiltonian: HamiltonianSummary,
    pub nehari: Option<NehariReport>,
    pub dual: Option<DualReport>,
    pub cross_checks: CrossChecks,
    pub timing: Timing,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticEntry {
    pub name: String,
    /// `None` when the measurement is not a finite number.
    pub measured: Option<f64>,
    /// Human-readable acceptance rule, e.g. `"<= 0.05"`.
    pub rule: String,
    pub passed: bool,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnoseReport {
    pub passed: bool,
    pub config: RunConfig,
    pub warnings: Vec<String>,
    pub verdict: ExponentVerdict,
    pub entries: Vec<DiagnosticEntry>,
    pub hypotheses: Vec<HypothesisOutcome>,
    pub timing: Timing,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub q: f64,
    pub subcritical: bool,
    pub pq_constraint: bool,
    pub c_i: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub config: RunConfig,
    pub grid: [f64; 4],
    pub steps: usize,
    pub rows: Vec<SweepRow>,
    pub timing: Timing,
}

impl SweepReport {
    /// True when every attempted solve converged.
    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.status != "nonconverged")
    }
}
