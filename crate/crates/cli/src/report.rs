use std::fmt::Write as _;

use hlab_core::integrate::{Estimate, Method};
use hlab_core::operators::OperatorSpec;
use hlab_core::verify::{ConvergenceRow, Finding};
use serde::Serialize;
use serde_json::Value;

/// Top-level JSON document, validated by `report.schema.json`. Everything
/// except `runtime_ms` is a function of the invocation.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub spec: Option<SpecSummary>,
    pub convention: &'static str,
    pub closed_form: Option<f64>,
    pub oracles: Vec<OracleEntry>,
    pub pass: bool,
    pub seed: u64,
    pub runtime_ms: u64,
    pub findings: Vec<Finding>,
    pub details: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpecSummary {
    pub operator: &'static str,
    pub n: usize,
    pub m: usize,
    pub alphas: Vec<f64>,
    pub convention: &'static str,
}

impl From<&OperatorSpec<f64>> for SpecSummary {
    fn from(spec: &OperatorSpec<f64>) -> Self {
        Self {
            operator: spec.kind.as_str(),
            n: spec.dim.n(),
            m: spec.m(),
            alphas: spec.profile.alphas().to_vec(),
            convention: spec.convention.as_str(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleEntry {
    pub name: &'static str,
    pub method: &'static str,
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub rel_err: Option<f64>,
    pub sigma_distance: Option<f64>,
}

impl OracleEntry {
    pub fn new(name: &'static str, e: &Estimate<f64>, rel_err: Option<f64>, sigma_distance: Option<f64>) -> Self {
        Self {
            name,
            method: match e.method {
                Method::Quad => "quad",
                Method::MonteCarlo => "mc",
            },
            value: e.value,
            std_error: e.std_error,
            n_samples: e.n_samples,
            rel_err,
            sigma_distance,
        }
    }
}

pub const CSV_HEADER: &str = "n_samples,estimate,std_error,closed_form";

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:e},{:e},{:e}",
            r.n_samples, r.estimate, r.std_error, r.closed_form
        );
    }
    out
}

pub fn json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report values always serialize");
    s.push('\n');
    s
}

/// Shared text trailer: oracle lines, findings and the verdict.
pub fn text_summary(report: &Report) -> String {
    let mut out = String::new();
    if let Some(spec) = &report.spec {
        let _ = writeln!(
            out,
            "{} on H^{}, m = {}, alphas = {:?}, convention {}",
            spec.operator, spec.n, spec.m, spec.alphas, spec.convention
        );
    }
    if let Some(c) = report.closed_form {
        let _ = writeln!(out, "closed form  {c:.15e}");
    }
    for o in &report.oracles {
        let _ = write!(
            out,
            "{:<12} {:.15e} ± {:.3e} ({} {})",
            o.name, o.value, o.std_error, o.n_samples, o.method
        );
        if let Some(e) = o.rel_err {
            let _ = write!(out, "  rel err {e:.3e}");
        }
        if let Some(s) = o.sigma_distance {
            let _ = write!(out, "  {s:+.2}σ");
        }
        out.push('\n');
    }
    for f in &report.findings {
        let tag = if f.detected { "FLAGGED" } else { "not reproduced" };
        let _ = writeln!(out, "[{tag}] {}: {}", f.id, f.summary);
    }
    let _ = writeln!(
        out,
        "seed {}  {}",
        report.seed,
        if report.pass { "PASS" } else { "FAIL" }
    );
    out
}
