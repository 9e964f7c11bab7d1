use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("probability {0} is outside the open interval (0, 1)")]
    Domain(f64),

    #[error("correlation {0} is singular; the Gaussian copula density needs |rho| < 1")]
    SingularCorrelation(f64),

    #[error("correlation {0} is outside (-1, 1]")]
    InvalidCorrelation(f64),

    #[error("coefficient vector has length {got}, calibration expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("sampler consistency violated: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// True for errors caused by bad user input rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Consistency(_) | Error::Io(_) | Error::Json(_))
    }
}
