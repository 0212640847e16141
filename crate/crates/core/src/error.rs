use thiserror::Error;

pub type Result<T> = std::result::Result<T, FracError>;

#[derive(Debug, Clone, Error)]
pub enum FracError {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("grid mismatch: function has {found} values, grid has {expected} nodes")]
    GridMismatch { expected: usize, found: usize },

    #[error("eigensolver did not converge for index {index} after {iterations} iterations (off-diagonal {residual:e})")]
    EigenNonConvergence {
        index: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("spectral tail mass {tail:e} exceeds tolerance {tolerance:e}; retain more modes")]
    TruncatedSpectrum { tail: f64, tolerance: f64 },

    #[error("function is identically zero")]
    ZeroFunction,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quotient increased at iteration {iteration}: {previous} -> {current}")]
    NonMonotone {
        iteration: usize,
        previous: f64,
        current: f64,
        history: Vec<f64>,
    },

    #[error("no convergence after {iterations} iterations (last decrease {last_decrease:e}, residual {residual:e})")]
    MaxIterations {
        iterations: usize,
        last_decrease: f64,
        residual: f64,
    },

    #[error("kernel calibration residual {residual:e} above {limit:e}")]
    Calibration { residual: f64, limit: f64 },

    #[error("evaluation at a singular point: {0}")]
    Singular(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("resolution too coarse: {0}")]
    Resolution(String),
}
