use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("player index {index} out of range for a game with {n} players")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid action interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("point is outside the joint action set at coordinate {0}")]
    Infeasible(usize),

    #[error("negative Lipschitz constant at index {0}")]
    NegativeLipschitz(usize),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("game is not strongly monotone: smallest eigenvalue of the symmetric Jacobian part is {lambda_min}")]
    NotStronglyMonotone { lambda_min: f64 },

    #[error("invalid generator configuration: {0}")]
    InvalidGenerator(String),

    #[error("equilibrium oracle did not converge after {iterations} iterations (residual {residual})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("inadmissible tuning input: {0}")]
    InadmissibleInput(String),

    #[error("tuning invariant violated: {0}")]
    TuningViolation(String),

    #[error("inequality domain error: {0}")]
    Domain(String),

    #[error("rate fit window too short: {0} usable points, need at least 3")]
    WindowTooShort(usize),

    #[error("trace has no bound column")]
    MissingBound,

    #[error("invalid run configuration: {0}")]
    InvalidRun(String),
}

pub type Result<T> = std::result::Result<T, Error>;
