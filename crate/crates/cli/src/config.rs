//! TOML run configuration.
//!
//! ```toml
//! method = "nehari"          # nehari | dual | both
//!
//! [domain]
//! a = -1.0
//! b = 1.0
//! n = 257
//!
//! [operator]
//! s = 0.3
//! backend = "restricted"     # restricted | spectral
//!
//! [exponents]
//! p = 2.0
//! q = 2.0
//! N_dim = 1.0
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use fham_core::hamiltonian::HamiltonianSpec;
use fham_core::Backend;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Parse(String),
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.to_string(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Nehari,
    Dual,
    Both,
}

impl Method {
    pub fn runs_nehari(self) -> bool {
        matches!(self, Method::Nehari | Method::Both)
    }

    pub fn runs_dual(self) -> bool {
        matches!(self, Method::Dual | Method::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianKindConfig {
    #[default]
    LaneEmden,
    CoupledEps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

fn minus_one() -> f64 {
    -1.0
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    #[serde(default = "minus_one")]
    pub a: f64,
    #[serde(default = "one")]
    pub b: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    pub s: f64,
    #[serde(default)]
    pub backend: Backend,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsConfig {
    pub p: f64,
    pub q: f64,
    #[serde(rename = "N_dim", default = "one")]
    pub n_dim: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianConfig {
    #[serde(default)]
    pub kind: HamiltonianKindConfig,
    pub eps: Option<f64>,
    pub a_c: Option<f64>,
    pub b_c: Option<f64>,
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub path_nodes: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol: 1e-8, max_iter: 20_000, seed: 0, path_nodes: 41 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("fham-out"), formats: vec![Format::Csv, Format::Json] }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub method: Method,
    pub domain: DomainConfig,
    pub operator: OperatorConfig,
    pub exponents: ExponentsConfig,
    #[serde(default)]
    pub hamiltonian: HamiltonianConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A validated configuration plus any warnings raised while checking it.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub warnings: Vec<String>,
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<LoadedConfig, ConfigError> {
    let config: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let warnings = config.validate()?;
    Ok(LoadedConfig { config, warnings })
}

impl RunConfig {
    /// Checks every precondition that can be decided without solving and
    /// returns warnings for settings that are allowed but unusual.
    pub fn validate(&self) -> Result<Vec<String>, ConfigError> {
        let mut warnings = Vec::new();
        let d = &self.domain;
        if !(d.a.is_finite() && d.b.is_finite() && d.a < d.b) {
            return Err(invalid("domain", format!("need finite a < b, got a = {}, b = {}", d.a, d.b)));
        }
        if d.n < 3 {
            return Err(invalid("domain.n", format!("need at least 3 interior nodes, got {}", d.n)));
        }
        let s = self.operator.s;
        if !(s > 0.0 && s <= 1.0) {
            return Err(invalid("operator.s", format!("s must lie in (0,1], got {s}")));
        }
        let e = &self.exponents;
        for (name, v) in [("exponents.p", e.p), ("exponents.q", e.q)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        if !(e.n_dim > 0.0 && e.n_dim.is_finite()) {
            return Err(invalid("exponents.N_dim", format!("must be positive, got {}", e.n_dim)));
        }
        if e.n_dim <= 2.0 * s {
            warnings.push(format!(
                "exponents.N_dim = {} does not exceed 2s = {}; the existence theory assumes N > 2s",
                e.n_dim,
                2.0 * s
            ));
        }
        let pq = e.p * e.q;
        if self.method.runs_nehari() && (pq - 1.0).abs() <= 1e-12 {
            return Err(invalid(
                "exponents",
                format!("pq = 1 is excluded for method {}: the Nehari reduction requires pq != 1", self.method_name()),
            ));
        }
        if self.method.runs_dual() && pq <= 1.0 {
            return Err(invalid("method", format!("the dual method requires pq > 1, got pq = {pq}")));
        }
        if self.method.runs_nehari() && self.hamiltonian.kind != HamiltonianKindConfig::LaneEmden {
            return Err(invalid("method", "the Nehari reduction applies to hamiltonian.kind = \"lane_emden\" only"));
        }
        self.hamiltonian_spec()?;

        let sv = &self.solver;
        if !(sv.tol > 0.0 && sv.tol.is_finite()) {
            return Err(invalid("solver.tol", format!("must be positive, got {}", sv.tol)));
        }
        if sv.max_iter == 0 {
            return Err(invalid("solver.max_iter", "must be at least 1"));
        }
        if sv.path_nodes < 3 {
            return Err(invalid("solver.path_nodes", format!("need at least 3 path nodes, got {}", sv.path_nodes)));
        }
        if self.output.formats.is_empty() {
            return Err(invalid("output.formats", "select at least one of \"csv\", \"json\""));
        }
        Ok(warnings)
    }

    pub fn method_name(&self) -> &'static str {
        match self.method {
            Method::Nehari => "nehari",
            Method::Dual => "dual",
            Method::Both => "both",
        }
    }

    pub fn hamiltonian_spec(&self) -> Result<HamiltonianSpec, ConfigError> {
        let (p, q) = (self.exponents.p, self.exponents.q);
        let h = &self.hamiltonian;
        let spec = match h.kind {
            HamiltonianKindConfig::LaneEmden => {
                for (name, v) in [("hamiltonian.eps", h.eps), ("hamiltonian.a_c", h.a_c), ("hamiltonian.b_c", h.b_c)] {
                    if v.is_some() {
                        return Err(invalid(name, "only meaningful for kind = \"coupled_eps\""));
                    }
                }
                HamiltonianSpec::lane_emden(p, q)
            }
            HamiltonianKindConfig::CoupledEps => HamiltonianSpec::coupled(
                p,
                q,
                h.eps.unwrap_or(0.0),
                h.a_c.unwrap_or(0.5 * (p + 1.0)),
                h.b_c.unwrap_or(0.5 * (q + 1.0)),
            ),
        }
        .map_err(|e| invalid("hamiltonian", e.to_string()))?;
        match h.theta {
            Some(t) => spec.with_theta(t).map_err(|e| invalid("hamiltonian.theta", e.to_string())),
            None => Ok(spec),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[domain]\nn = 257\n[operator]\ns = 0.3\n[exponents]\np = 2\nq = 2\n";

    #[test]
    fn defaults_are_filled() {
        let c = parse_config(MINIMAL).unwrap();
        let r = &c.config;
        assert_eq!((r.domain.a, r.domain.b, r.domain.n), (-1.0, 1.0, 257));
        assert_eq!(r.method, Method::Nehari);
        assert_eq!(r.solver.tol, 1e-8);
        assert_eq!(r.exponents.n_dim, 1.0);
        assert_eq!(r.operator.backend, Backend::Restricted);
        assert!(c.warnings.is_empty());
    }

    #[test]
    fn order_out_of_range() {
        let err = parse_config(&MINIMAL.replace("s = 0.3", "s = 1.5")).unwrap_err();
        assert!(err.to_string().contains("s must lie in (0,1]"), "{err}");
        assert!(err.to_string().starts_with("operator.s"));
    }

    #[test]
    fn resonant_exponents_rejected_for_nehari() {
        let err = parse_config(&MINIMAL.replace("q = 2", "q = 0.5")).unwrap_err();
        assert!(err.to_string().contains("pq != 1"), "{err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config(&format!("{MINIMAL}bogus = 1\n")).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let err = parse_config(&MINIMAL.replace("n = 257", "n = 257\nm = 3")).unwrap_err();
        assert!(err.to_string().contains("`m`"), "{err}");
    }

    #[test]
    fn parse_error_has_position() {
        let err = parse_config("[domain]\nn = \n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn low_dimension_warns() {
        let c = parse_config(&MINIMAL.replace("s = 0.3", "s = 0.75")).unwrap();
        assert_eq!(c.warnings.len(), 1);
    }

    #[test]
    fn dual_needs_superlinear_exponents() {
        let text = format!("method = \"dual\"\n{}", MINIMAL.replace("p = 2", "p = 0.5"));
        assert!(parse_config(&text).unwrap_err().to_string().contains("pq > 1"));
    }

    #[test]
    fn coupled_hamiltonian() {
        let text = format!(
            "method = \"dual\"\n{MINIMAL}[hamiltonian]\nkind = \"coupled_eps\"\neps = 0.1\n"
        );
        let c = parse_config(&text).unwrap();
        assert!(!c.config.hamiltonian_spec().unwrap().is_lane_emden());
        let text = format!("{MINIMAL}[hamiltonian]\nkind = \"coupled_eps\"\neps = 0.1\n");
        assert!(parse_config(&text).is_err());
    }
}
