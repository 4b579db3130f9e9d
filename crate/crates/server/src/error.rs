use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use ldx_core::explore::{BackendFailure, ExploreError};
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("{0}")]
    BadRequest(String),
    #[error("no session with id {0}")]
    UnknownSession(String),
    /// The dataset named at session creation could not be loaded or reached.
    #[error("{0}")]
    Unprocessable(String),
    #[error(transparent)]
    Explore(#[from] ExploreError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ApiError::Unprocessable(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
            ApiError::Explore(e) => match e {
                ExploreError::UnknownPane(_) | ExploreError::UnknownClass(_) => StatusCode::NOT_FOUND,
                ExploreError::UnknownLabel(_)
                | ExploreError::TypeMismatch { .. }
                | ExploreError::NotExpandable(_)
                | ExploreError::RootPane => StatusCode::CONFLICT,
                ExploreError::InvalidComparator { .. } => StatusCode::BAD_REQUEST,
                ExploreError::UnsupportedPath(_) => StatusCode::UNPROCESSABLE_ENTITY,
                ExploreError::Backend { failure, .. } => match failure {
                    BackendFailure::Timeout => StatusCode::GATEWAY_TIMEOUT,
                    BackendFailure::Http(_) | BackendFailure::Other => StatusCode::BAD_GATEWAY,
                },
            },
        }
    }

    /// Stable machine-readable error name.
    pub fn code(&self) -> &'static str {
        match self {
            ApiError::BadRequest(_) => "bad_request",
            ApiError::UnknownSession(_) => "unknown_session",
            ApiError::Unprocessable(_) => "unprocessable_source",
            ApiError::Internal(_) => "internal",
            ApiError::Explore(e) => match e {
                ExploreError::TypeMismatch { .. } => "type_mismatch",
                ExploreError::UnknownLabel(_) => "unknown_label",
                ExploreError::UnknownPane(_) => "unknown_pane",
                ExploreError::UnknownClass(_) => "unknown_class",
                ExploreError::InvalidComparator { .. } => "invalid_comparator",
                ExploreError::NotExpandable(_) => "not_expandable",
                ExploreError::RootPane => "root_pane",
                ExploreError::UnsupportedPath(_) => "unsupported_path",
                ExploreError::Backend { .. } => "backend",
            },
        }
    }

    pub fn body(&self) -> serde_json::Value {
        json!({ "error": { "code": self.code(), "message": self.to_string() } })
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if matches!(self, ApiError::Internal(_)) {
            log::error!("{self}");
        }
        (self.status(), Json(self.body())).into_response()
    }
}
