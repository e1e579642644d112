use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("unknown slot id {0}")]
    UnknownSlot(u32),

    #[error("unknown tag id {0}")]
    UnknownTag(u32),

    #[error("unknown user id {0}")]
    UnknownUser(u32),

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("slot {0} is already selected")]
    DuplicateSlot(u32),

    #[error("tag {0} is already selected")]
    DuplicateTag(u32),

    #[error("infeasible budget: requested {requested} {what} but only {available} available")]
    InfeasibleBudget {
        what: &'static str,
        requested: usize,
        available: usize,
    },

    #[error("exhaustive search would evaluate {candidates} candidates, cap is {cap}")]
    CapExceeded { candidates: u128, cap: u128 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
