use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A value outside its legal set. `field` is a dotted path such as
    /// `dimensions[0].tp`.
    #[error("{field}: {value} is not one of {legal}")]
    IllegalValue {
        field: String,
        value: String,
        legal: String,
    },

    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("configuration {0} is not part of this space")]
    NotInSpace(String),

    #[error("no transmit power entry for {0} dBm")]
    MissingTxPower(i8),

    #[error("failed to parse {what}: {reason}")]
    Parse { what: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn illegal(
        field: impl Into<String>,
        value: impl std::fmt::Display,
        legal: impl Into<String>,
    ) -> Self {
        Error::IllegalValue {
            field: field.into(),
            value: value.to_string(),
            legal: legal.into(),
        }
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
