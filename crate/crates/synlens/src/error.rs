use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("CSV has no column named {0:?}")]
    MissingColumn(String),

    #[error("embedding on line {line} has {dim} dimensions but line {first_line} has {first_dim}")]
    EmbeddingDims {
        first_line: u64,
        first_dim: usize,
        line: u64,
        dim: usize,
    },

    #[error("corpus needs at least 2 usable examples, found {0}")]
    TooFewExamples(usize),

    #[error("input is not valid UTF-8: {0}")]
    Utf8(#[from] std::str::Utf8Error),

    #[error("{module}: {source}")]
    Analysis {
        module: &'static str,
        #[source]
        source: synlens_core::Error,
    },

    #[error("no requested metric can be computed on this corpus")]
    NoMetrics,

    #[error("bundle JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("bundle version {found:?} is not supported (expected {expected:?})")]
    BundleVersion { found: String, expected: &'static str },

    #[error("invalid bundle: {0}")]
    InvalidBundle(String),

    #[error("fixture spec line {line}: {message}")]
    FixtureSpec { line: usize, message: String },

    #[error("fixture generation: {0}")]
    Fixture(String),

    #[error("cannot listen on port {port}: {source}")]
    Bind {
        port: u16,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn analysis(module: &'static str) -> impl FnOnce(synlens_core::Error) -> Error {
        move |source| Error::Analysis { module, source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
