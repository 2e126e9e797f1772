use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied arguments outside an operation's domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("graph is disconnected: vertex {vertex} is unreachable from {source_vertex}")]
    Disconnected { source_vertex: usize, vertex: usize },

    #[error("eigensolver failed: {message} (max residual {residual:.3e})")]
    Numeric { message: String, residual: f64 },

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn param(message: impl Into<String>) -> Self {
        Error::Parameter(message.into())
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// True when the root cause is a caller error rather than a runtime failure.
    pub fn is_parameter(&self) -> bool {
        match self {
            Error::Parameter(_) => true,
            Error::Context { source, .. } => source.is_parameter(),
            _ => false,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        if err.is_io_error() {
            match err.into_kind() {
                csv::ErrorKind::Io(io) => Error::Io(io),
                other => Error::Csv(format!("{other:?}")),
            }
        } else {
            Error::Csv(err.to_string())
        }
    }
}
