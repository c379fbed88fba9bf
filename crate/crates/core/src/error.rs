use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("gamma function pole at non-positive integer {0}")]
    Pole(f64),
    #[error("result overflows the floating-point range: {0}")]
    Overflow(String),
    #[error("time grid reaches the bridge horizon: t_max = {t_max} >= T = {horizon}")]
    GridReachesHorizon { t_max: f64, horizon: f64 },
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("covariance matrix is not positive semi-definite (pivot {pivot} at row {row})")]
    Decomposition { row: usize, pivot: f64 },
    #[error("circulant embedding has a negative eigenvalue {value} (relative {relative})")]
    EmbeddingNegative { value: f64, relative: f64 },
    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),
    #[error("estimator denominator vanishes (degenerate path)")]
    ZeroDenominator,
    #[error("hermite index ({m}, {n}) exceeds the degree cap {cap}")]
    CapExceeded { m: usize, n: usize, cap: usize },
    #[error("grid of {points} points exceeds the Cholesky cap {cap}")]
    GridTooLarge { points: usize, cap: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
