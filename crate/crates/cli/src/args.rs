use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hlab_core::hgroup::{GroupDim, VolumeConvention};
use hlab_core::operators::{OperatorKind, OperatorSpec};
use hlab_core::specfun::AlphaProfile;

#[derive(Debug, Parser)]
#[command(
    name = "hlab",
    version,
    about = "Sharp constants of multilinear operators on the Heisenberg group"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArg,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum CommandArg {
    /// Print the closed-form sharp constant
    Constants,
    /// Check the closed form against quadrature and Monte Carlo oracles
    Verify,
    /// Check that the extremal power functions attain the constant
    Extremal,
    /// Randomized search for violations of the upper bound
    Search,
    /// Monte Carlo volume of the unit gauge ball
    Geometry,
    /// Ball-volume factor, I_m closed form and kernel homogeneity findings
    Discrepancies,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OperatorArg {
    Hardy,
    Hlp,
    Hilbert,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Geometric,
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, global = true, value_enum, default_value = "hardy")]
    pub operator: OperatorArg,
    /// Heisenberg group index
    #[arg(long = "n", global = true, default_value_t = 1)]
    pub n: usize,
    /// Number of factors; defaults to the length of --alphas
    #[arg(long = "m", global = true)]
    pub m: Option<usize>,
    /// Comma-separated weight exponents
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub alphas: Vec<f64>,
    #[arg(long, global = true, value_enum, default_value = "geometric")]
    pub convention: ConventionArg,
    /// Monte Carlo sample budget; 0 skips the Monte Carlo oracle of `verify`
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, global = true, env = "HLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Relative tolerance; defaults depend on the command
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads for the estimators
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Gauges scanned by `extremal`
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        default_value = "0.5,1,2,10",
        allow_negative_numbers = true
    )]
    pub gauges: Vec<f64>,
    /// Sphere directions scanned by `extremal`
    #[arg(long, global = true, default_value_t = 5)]
    pub directions: usize,
    /// Random test tuples tried by `search`
    #[arg(long, global = true, default_value_t = 100)]
    pub trials: usize,
    /// Group indices examined by `discrepancies`
    #[arg(long = "n-values", global = true, value_delimiter = ',', default_value = "1,2,3")]
    pub n_values: Vec<usize>,
}

/// A fully validated invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandArg,
    pub dim: GroupDim,
    pub spec: Option<OperatorSpec<f64>>,
    pub convention: VolumeConvention,
    pub samples: u64,
    pub seed: u64,
    pub tol: f64,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub gauges: Vec<f64>,
    pub directions: usize,
    pub trials: usize,
    pub n_values: Vec<usize>,
}

impl CommandArg {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandArg::Constants => "constants",
            CommandArg::Verify => "verify",
            CommandArg::Extremal => "extremal",
            CommandArg::Search => "search",
            CommandArg::Geometry => "geometry",
            CommandArg::Discrepancies => "discrepancies",
        }
    }

    fn needs_spec(self) -> bool {
        !matches!(self, CommandArg::Geometry | CommandArg::Discrepancies)
    }

    fn supports_csv(self) -> bool {
        matches!(self, CommandArg::Constants | CommandArg::Verify | CommandArg::Geometry)
    }
}

fn positive_finite(flag: &str, v: f64) -> Result<(), String> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(format!("{flag}: {v} must be positive and finite"))
    }
}

impl RunConfig {
    /// Checks every flag before any computation. The message names the
    /// offending flag.
    pub fn from_cli(cli: Cli) -> Result<Self, String> {
        let c = cli.common;
        let command = cli.command;
        let dim = GroupDim::new(c.n).map_err(|_| "--n: must be at least 1".to_string())?;
        let convention = match c.convention {
            ConventionArg::Geometric => VolumeConvention::Geometric,
            ConventionArg::Paper => VolumeConvention::PaperFormula,
        };
        if c.format == Format::Csv && !command.supports_csv() {
            return Err(format!("--format: csv is not available for {}", command.as_str()));
        }

        let spec = if command.needs_spec() {
            if c.alphas.is_empty() {
                return Err(format!("--alphas: required for {}", command.as_str()));
            }
            if let Some(m) = c.m {
                if m != c.alphas.len() {
                    return Err(format!(
                        "--m: {m} does not match the {} values of --alphas",
                        c.alphas.len()
                    ));
                }
            }
            if let Some((i, a)) = c.alphas.iter().enumerate().find(|(_, a)| !a.is_finite()) {
                return Err(format!("--alphas: alpha_{} = {a} is not finite", i + 1));
            }
            let profile = AlphaProfile::from_f64s(&c.alphas)
                .map_err(|_| format!("--alphas: every value must lie in (0, Q = {})", dim.q()))?;
            let violations = profile.violations(dim);
            if !violations.is_empty() {
                let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
                return Err(format!("--alphas: {}", list.join(", ")));
            }
            let kind = match c.operator {
                OperatorArg::Hardy => OperatorKind::Hardy,
                OperatorArg::Hlp => OperatorKind::Hlp,
                OperatorArg::Hilbert => OperatorKind::Hilbert,
            };
            Some(OperatorSpec::new(kind, dim, profile, convention).map_err(|e| format!("--alphas: {e}"))?)
        } else {
            None
        };

        let m = spec.as_ref().map_or(1, OperatorSpec::m);
        let tol = c.tol.unwrap_or(match command {
            CommandArg::Search => 1e-3,
            CommandArg::Extremal => 1e-6,
            _ if m == 1 => 1e-10,
            _ => 1e-6,
        });
        positive_finite("--tol", tol)?;

        let mc_required = matches!(command, CommandArg::Geometry | CommandArg::Discrepancies)
            || (c.format == Format::Csv && command != CommandArg::Constants);
        if c.samples == 1 || (mc_required && c.samples == 0) {
            return Err(format!("--samples: {} is too small, need at least 2", c.samples));
        }
        if c.threads == Some(0) {
            return Err("--threads: must be at least 1".into());
        }
        if c.gauges.is_empty() {
            return Err("--gauges: at least one gauge is required".into());
        }
        for &g in &c.gauges {
            positive_finite("--gauges", g)?;
        }
        if c.directions == 0 {
            return Err("--directions: must be at least 1".into());
        }
        if c.trials == 0 {
            return Err("--trials: must be at least 1".into());
        }
        if c.n_values.is_empty() || c.n_values.contains(&0) {
            return Err("--n-values: every group index must be at least 1".into());
        }

        Ok(Self {
            command,
            dim,
            spec,
            convention,
            samples: c.samples,
            seed: c.seed,
            tol,
            format: c.format,
            output: c.output,
            threads: c.threads,
            gauges: c.gauges,
            directions: c.directions,
            trials: c.trials,
            n_values: c.n_values,
        })
    }
}
