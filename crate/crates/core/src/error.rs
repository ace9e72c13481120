use thiserror::Error;

/// An exponent `alpha_i` outside the open interval `(0, Q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaViolation {
    /// 1-based index into the profile.
    pub index: usize,
    pub value: f64,
    pub q: usize,
}

impl std::fmt::Display for AlphaViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.value >= self.q as f64 {
            write!(f, "alpha_{} = {} >= Q = {}", self.index, self.value, self.q)
        } else {
            write!(f, "alpha_{} = {} <= 0", self.index, self.value)
        }
    }
}

fn join_violations(v: &[AlphaViolation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: H^{left} vs H^{right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("group index n must be positive")]
    ZeroGroupIndex,

    #[error("expected {expected} coordinates, got {got}")]
    CoordinateCount { expected: usize, got: usize },

    #[error("coordinate {index} is not finite")]
    NonFiniteCoordinate { index: usize },

    #[error("invalid {name}: {value} (must be positive and finite)")]
    NonPositive { name: &'static str, value: f64 },

    #[error("divergent constant: {}", join_violations(.0))]
    DivergentConstant(Vec<AlphaViolation>),

    #[error("convergence condition violated: {0}")]
    ConvergenceCondition(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {estimate}, error {error})")]
    NonConvergence {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("integrand returned a non-finite value at {point:?}")]
    NonFiniteEvaluation { point: Vec<f64> },

    #[error("no accepted samples out of {draws} draws")]
    NoAcceptedSamples { draws: u64 },

    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(u64),

    #[error("operators are not defined at the origin")]
    EvaluationAtOrigin,

    #[error("the quadrature engine requires gauge-radial test functions ({0} is not)")]
    EngineMismatch(String),

    #[error("expected {expected} test functions, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("kernel fails the homogeneity probe (worst relative deviation {worst})")]
    HomogeneityProbe { worst: f64 },

    #[error("integral diverges: {0}")]
    Divergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
