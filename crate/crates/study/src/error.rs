use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("{0} not found")]
    NotFound(String),
    #[error("{0}")]
    MethodNotAllowed(String),
    #[error("{0}")]
    Conflict(String),
    #[error("infeasible plan: {0}")]
    Infeasible(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("study {0} has no completed trials")]
    EmptyStudy(String),
    #[error("corrupt study data: {0}")]
    Corrupt(String),
    #[error("{path}: {source}")]
    Io { path: std::path::PathBuf, source: std::io::Error },
}

impl StudyError {
    pub fn code(&self) -> &'static str {
        match self {
            StudyError::NotFound(_) => "not_found",
            StudyError::MethodNotAllowed(_) => "method_not_allowed",
            StudyError::Conflict(_) => "conflict",
            StudyError::Infeasible(_) => "infeasible",
            StudyError::BadRequest(_) => "bad_request",
            StudyError::EmptyStudy(_) => "empty_study",
            StudyError::Corrupt(_) => "corrupt",
            StudyError::Io { .. } => "io",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            StudyError::NotFound(_) => StatusCode::NOT_FOUND,
            StudyError::MethodNotAllowed(_) => StatusCode::METHOD_NOT_ALLOWED,
            StudyError::Conflict(_) => StatusCode::CONFLICT,
            StudyError::Infeasible(_) | StudyError::EmptyStudy(_) => StatusCode::UNPROCESSABLE_ENTITY,
            StudyError::BadRequest(_) => StatusCode::BAD_REQUEST,
            StudyError::Corrupt(_) | StudyError::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

/// Body of every error response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct ErrorEnvelope {
    pub code: String,
    pub message: String,
}

impl IntoResponse for StudyError {
    fn into_response(self) -> Response {
        let body = ErrorEnvelope { code: self.code().to_string(), message: self.to_string() };
        (self.status(), Json(body)).into_response()
    }
}
