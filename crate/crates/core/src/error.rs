use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A model or experiment configuration violates one of its invariants.
    #[error("configuration error: {0}")]
    Config(String),

    /// A point was given outside every chart of the model.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite integrand value {value} at node r={radius}, theta={theta}")]
    NonFinite { value: f64, radius: f64, theta: f64 },

    #[error("gram matrix is not positive definite: pivot {index} = {pivot:e}")]
    IllConditioned { index: usize, pivot: f64 },

    #[error("root finder did not converge: worst backward error {worst_residual:e} (at {worst_root})")]
    RootFinder {
        worst_residual: f64,
        worst_root: Complex64,
    },

    #[error("current support (radius {support}) leaves the cover chart (radius {chart})")]
    UnsupportedSupport { support: f64, chart: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("experiment failed: {0}")]
    Experiment(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the experiment runner: 2 for invalid
    /// configurations, 3 for everything raised while computing.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) => 2,
            _ => 3,
        }
    }
}
