use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("associated-function scan cap exceeded (rho = {rho}, pmax = {pmax})")]
    ScanCapExceeded { rho: f64, pmax: u64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("off-grid translate requires closed form (shift {0} is not a grid multiple)")]
    OffGridTranslate(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{key}`: {msg}")]
    InvalidParameter { key: String, msg: String },

    #[error("window is identically zero")]
    ZeroWindow,

    #[error("E′ must be the Hölder dual of E")]
    NotHolderDual,

    #[error("closed form required: {0}")]
    ClosedFormRequired(String),

    #[error("cannot parse `{key}`: {msg}")]
    Parse { key: String, msg: String },
}

impl Error {
    pub(crate) fn param(key: &str, msg: impl Into<String>) -> Self {
        Error::InvalidParameter {
            key: key.to_string(),
            msg: msg.into(),
        }
    }

    pub(crate) fn parse(key: &str, msg: impl Into<String>) -> Self {
        Error::Parse {
            key: key.to_string(),
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
