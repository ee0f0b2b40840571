use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid scheduler state: {0}")]
    State(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("accounting error: {0}")]
    Accounting(String),

    #[error("no fully evaluated iteration to select an optimum from")]
    EmptyResult,

    #[error("I/O failure at {coordinate}: {source}")]
    Io {
        coordinate: String,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV failure at {coordinate}: {source}")]
    Csv {
        coordinate: String,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
