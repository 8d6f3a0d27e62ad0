use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point (t = {t}, x = {x:?}) lies outside the chart domain")]
    OutOfDomain { t: f64, x: Vec<f64> },

    #[error("metric is not positive definite at t = {t} (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { t: f64, min_eigenvalue: f64 },

    #[error("metric is singular at t = {t}")]
    SingularMetric { t: f64 },

    #[error("initial frame is not orthonormal (defect {defect:e})")]
    NotOrthonormal { defect: f64 },

    #[error("integrator step failure: {0}")]
    StepFailure(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("weight function is not positive: f({t}) = {value}")]
    NonPositiveWeight { t: f64, value: f64 },

    #[error("unsupported dimension {0} (expected 1..=10)")]
    UnsupportedDimension(usize),

    #[error("degenerate ratio: the reference tube recorded no hits")]
    DegenerateRatio,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn out_of_domain(t: f64, x: &[f64]) -> Self {
        Error::OutOfDomain { t, x: x.to_vec() }
    }
}
