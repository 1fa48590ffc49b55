use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Input bytes are not a supported or well-formed file.
    #[error("format error: {0}")]
    Format(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("coordinate ({row}, {col}) lies outside the sampling domain")]
    OutOfBounds { row: f64, col: f64 },

    #[error("{width}x{height} image has no interior pixels for radius {radius}")]
    TooSmall {
        width: usize,
        height: usize,
        radius: usize,
    },

    /// Wraps another error with the file it came from.
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub fn with_path(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// True when the root cause is an operating-system I/O failure rather
    /// than bad input.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::File { source, .. } => source.is_io(),
            _ => false,
        }
    }
}
