use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::config::{Format, OutputConfig};
use crate::report::SweepReport;

#[derive(Debug, Error)]
#[error("cannot write {path}: {source}")]
pub struct OutputError {
    pub path: PathBuf,
    pub source: std::io::Error,
}

fn write_file(path: &Path, contents: &str) -> Result<(), OutputError> {
    fs::write(path, contents).map_err(|source| OutputError { path: path.to_path_buf(), source })
}

fn ensure_dir(dir: &Path) -> Result<(), OutputError> {
    fs::create_dir_all(dir).map_err(|source| OutputError { path: dir.to_path_buf(), source })
}

/// Nodal table written as `x,u,v,delta,res_u,res_v`.
#[derive(Debug, Clone)]
pub struct SolutionTable {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub delta: Vec<f64>,
    pub res_u: Vec<f64>,
    pub res_v: Vec<f64>,
}

/// Seventeen significant digits: enough to round-trip any `f64`.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

impl SolutionTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,u,v,delta,res_u,res_v\n");
        for i in 0..self.x.len() {
            let row = [self.x[i], self.u[i], self.v[i], self.delta[i], self.res_u[i], self.res_v[i]];
            let cells: Vec<String> = row.iter().map(|&c| num(c)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Writes `report.json` and the given solution tables (file name, table).
pub fn write_solve_outputs<T: Serialize>(
    out: &OutputConfig,
    report: &T,
    tables: &[(&str, &SolutionTable)],
) -> Result<Vec<PathBuf>, OutputError> {
    ensure_dir(&out.dir)?;
    let mut written = Vec::new();
    if out.wants(Format::Json) {
        let path = out.dir.join("report.json");
        write_file(&path, &to_json(report))?;
        written.push(path);
    }
    if out.wants(Format::Csv) {
        for (name, table) in tables {
            let path = out.dir.join(name);
            write_file(&path, &table.to_csv())?;
            written.push(path);
        }
    }
    Ok(written)
}

pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = String::from("p,q,subcritical,pq_constraint,c_I,status\n");
    for r in &report.rows {
        let c = r.c_i.map(num).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{},{},{}", r.p, r.q, r.subcritical, r.pq_constraint, c, r.status);
    }
    out
}

pub fn write_sweep_outputs(out: &OutputConfig, report: &SweepReport) -> Result<Vec<PathBuf>, OutputError> {
    ensure_dir(&out.dir)?;
    let mut written = Vec::new();
    if out.wants(Format::Csv) {
        let path = out.dir.join("sweep.csv");
        write_file(&path, &sweep_csv(report))?;
        written.push(path);
    }
    if out.wants(Format::Json) {
        let path = out.dir.join("sweep.json");
        write_file(&path, &to_json(report))?;
        written.push(path);
    }
    Ok(written)
}
