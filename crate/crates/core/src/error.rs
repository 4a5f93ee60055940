use thiserror::Error;

/// Error states surfaced by the toolkit.  Numerical error states keep the
/// originating module's name so the CLI can map them to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("boundary: eigenvalues not strictly decreasing at index {0}")]
    NonMonotone(usize),
    #[error("boundary: positive eigenvalue {0} not allowed")]
    PositiveEigenvalue(f64),
    #[error("operator: {0}")]
    InvalidOperator(String),
    #[error("conormal: operator dimension {op_n} does not match boundary dimension {spec_n}")]
    DimensionMismatch { op_n: i64, spec_n: i64 },
    #[error("conormal: mode {0} polynomial is identically zero")]
    IdenticallyZero(usize),
    #[error("conormal: coefficient of order {0} has no principal symbol consistent with its order budget")]
    UnsupportedCoefficient(usize),
    #[error("domains: extension is not dilation invariant")]
    NotDilationInvariant,
    #[error("domains: classification requires gamma = 0 and p = 2 (got gamma={gamma}, p={p})")]
    WrongWeight { gamma: f64, p: f64 },
    #[error("domains: {0} is only implemented for the Laplacian preset family")]
    UnsupportedOperator(&'static str),
    #[error("ellipticity: |gamma| = {gamma} is outside the admissible range < {limit}")]
    WeightOutOfRange { gamma: f64, limit: f64 },
    #[error("ellipticity: rule and numeric verdicts for the model-cone condition disagree")]
    E3MethodsDisagree,
    #[error("mellin: pole at {0} lies within {1:e} of a weight line")]
    PoleOnLine(String, f64),
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),
    #[error("resolvent: mode {mode} solve ill-conditioned (estimate {estimate:.3e})")]
    IllConditioned { mode: usize, estimate: f64 },
    #[error("resolvent: mode {mode} admits {count} admissible boundary behaviours; the solver needs exactly one")]
    IllPosedBoundary { mode: usize, count: usize },
    #[error("resolvent: slope undefined, need at least two magnitudes")]
    SlopeUndefined,
    #[error("io: {0}")]
    Io(String),
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
