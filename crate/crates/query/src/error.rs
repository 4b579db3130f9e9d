use std::time::Duration;

use ldx_core::explore::{BackendFailure, ExploreError};
use ldx_core::sparql::{EvalError, PlanShape};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClientError {
    #[error("endpoint did not answer within {0:?}")]
    Timeout(Duration),
    /// `status` is `None` when the endpoint could not be reached at all.
    #[error("endpoint request failed ({}): {message}", status.map_or("unreachable".to_string(), |s| format!("HTTP {s}")))]
    Http { status: Option<u16>, message: String },
    #[error("malformed endpoint response: {0}")]
    MalformedResponse(String),
    #[error("gave up after {attempts} attempts, last failure: {last}")]
    TooManyRetries { attempts: u32, last: String },
    #[error("invalid endpoint configuration: {0}")]
    InvalidConfig(String),
}

impl ClientError {
    /// Failures worth another attempt: timeouts and 5xx answers.
    pub fn is_transient(&self) -> bool {
        match self {
            ClientError::Timeout(_) => true,
            ClientError::Http { status: Some(s), .. } => *s >= 500,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error(transparent)]
    Endpoint(#[from] ClientError),
    #[error(transparent)]
    Embedded(#[from] EvalError),
    #[error(transparent)]
    Plan(#[from] ExploreError),
    #[error("{0:?} plans cannot be evaluated in chunks")]
    NotDistributive(PlanShape),
    #[error("query manager is shutting down")]
    CancelledByShutdown,
}

impl QueryError {
    pub fn is_timeout(&self) -> bool {
        matches!(
            self,
            QueryError::Endpoint(ClientError::Timeout(_)) | QueryError::Embedded(EvalError::Timeout)
        )
    }

    pub fn failure(&self) -> BackendFailure {
        match self {
            _ if self.is_timeout() => BackendFailure::Timeout,
            QueryError::Endpoint(ClientError::Http { status: Some(s), .. }) => BackendFailure::Http(*s),
            _ => BackendFailure::Other,
        }
    }
}

impl From<QueryError> for ExploreError {
    fn from(e: QueryError) -> Self {
        match e {
            QueryError::Plan(e) => e,
            e => ExploreError::backend(e.failure(), e.to_string()),
        }
    }
}
