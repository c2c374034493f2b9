use std::path::PathBuf;

/// Errors produced anywhere in the estimation pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: timestamp {t} is earlier than the previous event ({prev})")]
    Ordering { line: usize, t: f64, prev: f64 },

    #[error("structural error: {0}")]
    Structure(String),

    #[error("unknown {what}: {id}")]
    Lookup { what: &'static str, id: String },

    #[error("second {t} outside session range [{start}, {end})")]
    Range { t: i64, start: i64, end: i64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("label error: {0}")]
    Label(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("join error: {0}")]
    Join(String),

    #[error("pairing error: {0}")]
    Pairing(String),

    #[error("schema mismatch: expected {expected}, found {found}")]
    Schema { expected: String, found: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json { path: path.into(), source }
    }

    pub(crate) fn lookup(what: &'static str, id: impl Into<String>) -> Self {
        Error::Lookup { what, id: id.into() }
    }
}
