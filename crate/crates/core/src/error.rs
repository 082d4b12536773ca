use thiserror::Error;

/// Errors produced by the library and mapped to CLI exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("analytic density is not available for the {0} model")]
    UnsupportedDensity(&'static str),
    #[error("rejection sampler acceptance rate {rate:.3e} is below the floor {floor:.3e}")]
    LowAcceptance { rate: f64, floor: f64 },
    #[error("point {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("graph has no edges")]
    Edgeless,
    #[error("no sweep cut with finite normalized cut in ({lower}, {upper})")]
    NoCluster { lower: f64, upper: f64 },
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit status: 2 for configuration and input problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::LowAcceptance { .. }
            | Error::Disconnected { .. }
            | Error::Edgeless
            | Error::NoCluster { .. }
            | Error::Numeric(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
