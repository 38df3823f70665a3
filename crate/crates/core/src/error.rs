use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,

    #[error("observation window size is required in timeseries mode")]
    MissingWindow,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("rule was never observed; no probability estimate exists")]
    NeverObserved,

    #[error("premise was never observed; confidence is undefined")]
    ZeroPremiseCount,

    #[error("conclusion has zero support; lift is undefined")]
    ZeroConclusionSupport,

    #[error("infeasible chain packing: {0}")]
    InfeasiblePacking(String),

    #[error("invalid rule: {0}")]
    InvalidRule(String),

    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("dataset is not in {expected} mode")]
    WrongMode { expected: &'static str },

    #[error("{0}")]
    Unsupported(&'static str),

    #[error("entity exclusion needs at least two entities, found {0}")]
    SingleEntity(usize),

    #[error("{what} at line {line} is not tagged with an entity")]
    MissingEntity { what: &'static str, line: usize },

    #[error("{path}:{line}: {kind}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        kind: ParseErrorKind,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    Header,
    Field,
    Unsorted,
    DuplicateSymbol,
}

impl std::fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ParseErrorKind::Empty => "empty input",
            ParseErrorKind::Header => "bad header",
            ParseErrorKind::Field => "bad field",
            ParseErrorKind::Unsorted => "timestamps not sorted",
            ParseErrorKind::DuplicateSymbol => "duplicate symbol in record",
        };
        f.write_str(s)
    }
}

impl Error {
    /// Stable machine-readable category, used for CLI exit reporting.
    pub fn category(&self) -> &'static str {
        match self {
            Error::EmptyDataset => "E_EMPTY",
            Error::MissingWindow | Error::InvalidParam { .. } => "E_PARAM",
            Error::NeverObserved | Error::ZeroPremiseCount | Error::ZeroConclusionSupport => {
                "E_UNDEFINED"
            }
            Error::InfeasiblePacking(_) => "E_INFEASIBLE",
            Error::InvalidRule(_) | Error::InvalidRecord(_) | Error::WrongMode { .. } => {
                "E_INPUT"
            }
            Error::Unsupported(_) => "E_UNSUPPORTED",
            Error::SingleEntity(_) | Error::MissingEntity { .. } => "E_ENTITY",
            Error::Parse { kind, .. } => match kind {
                ParseErrorKind::Empty => "E_EMPTY",
                ParseErrorKind::Unsorted => "E_UNSORTED",
                ParseErrorKind::DuplicateSymbol => "E_DUPLICATE",
                ParseErrorKind::Header | ParseErrorKind::Field => "E_PARSE",
            },
            Error::Io { .. } => "E_IO",
            Error::Json(_) => "E_JSON",
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }
}
