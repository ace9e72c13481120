use anyhow::{Context, Result};
use hlab_core::hgroup::{geometric_unit_ball_volume, unit_ball_volume, VolumeConvention};
use hlab_core::operators::OperatorSpec;
use hlab_core::specfun::closed_form;
use hlab_core::verify::{
    convergence_rows, discrepancy_report, mc_ball_volume, mc_oracle, upper_bound_search, verify_constant,
    verify_extremal, VerificationReport, SIGMA_LIMIT,
};
use serde_json::json;

use crate::args::{CommandArg, Format, RunConfig};
use crate::report::{convergence_csv, text_summary, OracleEntry, Report, SpecSummary};

pub struct Outcome {
    pub report: Report,
    /// Body for `--format csv`.
    pub csv: Option<String>,
    /// Command-specific lines printed before the shared text summary.
    pub text: String,
}

impl Outcome {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => crate::report::json(&self.report),
            Format::Csv => self.csv.clone().unwrap_or_default(),
            Format::Text => format!("{}{}", self.text, text_summary(&self.report)),
        }
    }
}

fn spec(cfg: &RunConfig) -> &OperatorSpec<f64> {
    cfg.spec
        .as_ref()
        .expect("validated: spec present for operator commands")
}

fn base(cfg: &RunConfig, spec: Option<&OperatorSpec<f64>>) -> Report {
    Report {
        command: cfg.command.as_str(),
        spec: spec.map(SpecSummary::from),
        convention: cfg.convention.as_str(),
        closed_form: None,
        oracles: Vec::new(),
        pass: false,
        seed: cfg.seed,
        runtime_ms: 0,
        findings: Vec::new(),
        details: json!({}),
    }
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command {
        CommandArg::Constants => constants(cfg),
        CommandArg::Verify => verify(cfg),
        CommandArg::Extremal => extremal(cfg),
        CommandArg::Search => search(cfg),
        CommandArg::Geometry => geometry(cfg),
        CommandArg::Discrepancies => discrepancies(cfg),
    }
}

fn constants(cfg: &RunConfig) -> Result<Outcome> {
    let spec = spec(cfg);
    let c = closed_form(spec).context("closed form")?;
    let mut report = base(cfg, Some(spec));
    report.closed_form = Some(c.value);
    report.pass = c.value.is_finite();
    report.details = json!({ "value": c.value, "formula": c.formula_id });
    let alphas: Vec<String> = spec.profile.alphas().iter().map(f64::to_string).collect();
    let csv = format!(
        "operator,n,m,alphas,convention,value\n{},{},{},{},{},{:e}\n",
        spec.kind.as_str(),
        spec.dim.n(),
        spec.m(),
        alphas.join(";"),
        spec.convention.as_str(),
        c.value
    );
    Ok(Outcome {
        report,
        csv: Some(csv),
        text: String::new(),
    })
}

fn oracle_entries(r: &VerificationReport, quad_name: &'static str) -> Vec<OracleEntry> {
    let mut out = Vec::new();
    if let Some(q) = &r.oracle_quad {
        out.push(OracleEntry::new(quad_name, q, r.rel_err_quad, None));
    }
    if let Some(mc) = &r.oracle_mc {
        out.push(OracleEntry::new("monte_carlo", mc, None, r.sigma_distance_mc));
    }
    out
}

fn verify(cfg: &RunConfig) -> Result<Outcome> {
    let spec = spec(cfg);
    let r = verify_constant(spec, cfg.samples, cfg.seed, cfg.tol).context("verify")?;
    let mut report = base(cfg, Some(spec));
    report.closed_form = Some(r.closed_form);
    report.oracles = oracle_entries(&r, "quadrature");
    report.pass = r.pass;
    report.details = json!({
        "tol": r.tol,
        "sigma_limit": SIGMA_LIMIT,
        "n_samples": r.n_samples,
        "quadrature_skipped": r.oracle_quad.is_none(),
    });
    let csv = if cfg.format == Format::Csv {
        let rows = convergence_rows(cfg.samples, r.closed_form, |n| mc_oracle(spec, n, cfg.seed))?;
        Some(convergence_csv(&rows))
    } else {
        None
    };
    Ok(Outcome {
        report,
        csv,
        text: String::new(),
    })
}

fn extremal(cfg: &RunConfig) -> Result<Outcome> {
    let spec = spec(cfg);
    let r = verify_extremal(spec, &cfg.gauges, cfg.directions, cfg.seed, cfg.tol).context("extremal scan")?;
    let mut report = base(cfg, Some(spec));
    report.closed_form = Some(r.closed_form);
    report.oracles = oracle_entries(&r, "scan_mean");
    report.pass = r.pass;
    report.details = json!({
        "tol": r.tol,
        "spread": r.spread,
        "gauges": cfg.gauges,
        "directions": cfg.directions,
    });
    let text = format!(
        "relative spread {:.3e} over {} points\n",
        r.spread.unwrap_or(f64::NAN),
        cfg.gauges.len() * cfg.directions
    );
    Ok(Outcome {
        report,
        csv: None,
        text,
    })
}

fn search(cfg: &RunConfig) -> Result<Outcome> {
    let spec = spec(cfg);
    let r = upper_bound_search(spec, cfg.trials, cfg.seed, cfg.tol).context("upper-bound search")?;
    let mut report = base(cfg, Some(spec));
    report.closed_form = Some(r.bound);
    report.pass = r.pass;
    report.details = json!({
        "trials": r.trials,
        "tol": r.tol,
        "violations": r.violations,
        "max_ratio": r.max_ratio,
        "max_ratio_over_bound": r.max_ratio / r.bound,
        "attaining": r.attaining_description,
    });
    let text = format!(
        "{} trials, {} violations, max ratio {:.12e} ({:.9} of the bound)\nattained by {}\n",
        r.trials,
        r.violations,
        r.max_ratio,
        r.max_ratio / r.bound,
        r.attaining_description
    );
    Ok(Outcome {
        report,
        csv: None,
        text,
    })
}

fn geometry(cfg: &RunConfig) -> Result<Outcome> {
    let dim = cfg.dim;
    let expected = unit_ball_volume::<f64>(dim, cfg.convention);
    let mc = mc_ball_volume(dim, cfg.samples, cfg.seed).context("ball volume")?;
    let sigma = (mc.value - expected) / mc.std_error;
    let mut report = base(cfg, None);
    report.closed_form = Some(expected);
    report.oracles = vec![OracleEntry::new("monte_carlo", &mc, None, Some(sigma))];
    report.pass = sigma.abs() <= SIGMA_LIMIT;
    report.details = json!({
        "n": dim.n(),
        "q": dim.q(),
        "geometric": geometric_unit_ball_volume::<f64>(dim),
        "paper_formula": unit_ball_volume::<f64>(dim, VolumeConvention::PaperFormula),
        "mc_over_closed_form": mc.value / expected,
    });
    let csv = if cfg.format == Format::Csv {
        let rows = convergence_rows(cfg.samples, expected, |n| mc_ball_volume(dim, n, cfg.seed))?;
        Some(convergence_csv(&rows))
    } else {
        None
    };
    let text = format!("unit gauge ball of H^{} (Q = {})\n", dim.n(), dim.q());
    Ok(Outcome { report, csv, text })
}

fn discrepancies(cfg: &RunConfig) -> Result<Outcome> {
    let d = discrepancy_report(&cfg.n_values, cfg.samples, cfg.seed).context("discrepancy report")?;
    let mut report = base(cfg, None);
    report.findings = d.findings.clone();
    report.pass = true;
    report.details = json!({
        "n_samples": d.n_samples,
        "volumes": d.volumes,
        "i_m": d.i_m,
        "homogeneity": d.homogeneity,
    });
    // the shared summary repeats the findings
    let text: String = d
        .text()
        .lines()
        .filter(|l| !l.starts_with('['))
        .map(|l| format!("{l}\n"))
        .collect();
    Ok(Outcome {
        report,
        csv: None,
        text,
    })
}
