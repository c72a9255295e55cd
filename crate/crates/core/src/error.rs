use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("unsupported dimension {0} (only 2 and 3 are supported)")]
    UnsupportedDimension(usize),

    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("operator is not unitary (max |U†U - I| = {0:e})")]
    NotUnitary(f64),

    #[error("pulse must contain at least one segment")]
    EmptyPulse,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("noise trace too short: covers {available:e} s, protocol needs {required:e} s")]
    TraceTooShort { available: f64, required: f64 },

    #[error("pulse window {window} contains no noise samples")]
    EmptyWindow { window: usize },

    #[error("at N = {n}, param = {param}: {source}")]
    GridPoint {
        n: usize,
        param: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn at_grid_point(self, n: usize, param: f64) -> Self {
        Error::GridPoint {
            n,
            param,
            source: Box::new(self),
        }
    }
}
