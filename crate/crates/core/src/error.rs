use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("signals live on different grids")]
    GridMismatch,

    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("quadrature failure: integrand is {value} at node pair ({i}, {j})")]
    Quadrature { i: usize, j: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("no sign change of {what} in [{lo}, {hi}]")]
    NoSignChange { what: &'static str, lo: f64, hi: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("format error in {path}: {msg}")]
    Format { path: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
