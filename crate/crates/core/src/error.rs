use thiserror::Error;

/// Errors raised by the regularization toolkit.
///
/// Numeric context is carried as `f64` regardless of the scalar type in use.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("signal must contain at least one entry")]
    EmptySignal,
    #[error("signal entry {index} is not finite")]
    NonFinite { index: usize },
    #[error("grid spacing must be positive and finite, got {0}")]
    InvalidGridSpacing(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix rows have inconsistent lengths")]
    RaggedMatrix,
    #[error("operator is not injective: numerical rank {rank} < {cols} columns")]
    RankDeficient { rank: usize, cols: usize },
    #[error("convolution kernel must be non-empty and finite")]
    InvalidKernel,
    #[error("proximal map is not available for the {0} penalty")]
    UnsupportedProx(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid discrepancy radii: need 1 < tau_lower ({tau_lower}) <= tau_upper ({tau_upper}) < inf")]
    InvalidRadii { tau_lower: f64, tau_upper: f64 },
    #[error("noise level must be positive and finite, got {0}")]
    InvalidNoiseLevel(f64),
    #[error(
        "no admissible alpha: window [{window_low}, {window_high}], residual {residual_small} at alpha {alpha_small}, {residual_large} at alpha {alpha_large}"
    )]
    NoAdmissibleAlpha {
        window_low: f64,
        window_high: f64,
        alpha_small: f64,
        residual_small: f64,
        alpha_large: f64,
        residual_large: f64,
    },
    #[error("solver did not converge at alpha {alpha}: defect {defect} after {iterations} iterations")]
    SolverFailure {
        alpha: f64,
        defect: f64,
        iterations: usize,
    },
    #[error("invalid index function: {0}")]
    InvalidIndexFunction(String),
    #[error("insufficient data: need {needed} usable points, found {found}")]
    InsufficientData { needed: usize, found: usize },
    #[error("incomplete record: missing {0}")]
    IncompleteRecord(&'static str),
    #[error("linear system is singular")]
    SingularSystem,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
