use thiserror::Error;

use super::bar::BarType;
use super::filter::Comparator;

/// Failure reported by a remote or cached query backend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendFailure {
    Timeout,
    Http(u16),
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error("bar {label} has type {actual:?}, expansion needs {expected:?}")]
    TypeMismatch {
        label: String,
        expected: BarType,
        actual: BarType,
    },
    #[error("label {0} is not in the parent chart")]
    UnknownLabel(String),
    #[error("no pane with id {0}")]
    UnknownPane(usize),
    #[error("{0} is not a declared class")]
    UnknownClass(String),
    #[error("comparator {comparator:?} needs a numeric value, got {value:?}")]
    InvalidComparator {
        comparator: Comparator,
        value: String,
    },
    #[error("bar {0} cannot be expanded further")]
    NotExpandable(String),
    #[error("the initial pane cannot be closed")]
    RootPane,
    #[error("unsupported path: {0}")]
    UnsupportedPath(String),
    #[error("query backend failed: {message}")]
    Backend {
        failure: BackendFailure,
        message: String,
    },
}

impl ExploreError {
    pub fn backend(failure: BackendFailure, message: impl Into<String>) -> Self {
        ExploreError::Backend {
            failure,
            message: message.into(),
        }
    }
}
