use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A cell in a delimited input file could not be interpreted. Row and
    /// column are 1-based and count the header as row 1.
    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate weight vector")]
    DegenerateWeights,

    #[error("invalid weight at index {0}")]
    InvalidWeight(usize),

    #[error("class {0} too small to split")]
    ClassTooSmall(usize),

    #[error("evaluation budget exhausted")]
    BudgetExhausted,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
