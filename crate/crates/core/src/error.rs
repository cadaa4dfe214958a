use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution parameters: {0}")]
    InvalidParameters(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge (achieved error bound {achieved:e})")]
    QuadratureNonConvergence { achieved: f64 },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("sample too small: need at least {needed} observations, got {got}")]
    UndersizedSample { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("all {workers} workers failed")]
    AllWorkersFailed { workers: usize },

    #[error("data error at row {row}: {message}")]
    Data { row: usize, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
