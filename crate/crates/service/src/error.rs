use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;
use thiserror::Error;

use crate::SCHEMA_VERSION;

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("unknown template `{0}`")]
    UnknownTemplate(String),
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("session is {0}, not live")]
    SessionNotLive(&'static str),
    #[error("action id {0} is not in 0..=6")]
    InvalidAction(i64),
    #[error("session has no recorded actions")]
    EmptySession,
    #[error("unknown run `{0}`")]
    UnknownRun(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    Internal(String),
}

impl ApiError {
    pub fn code(&self) -> &'static str {
        match self {
            ApiError::UnknownTemplate(_) => "unknown_template",
            ApiError::UnknownSession(_) => "unknown_session",
            ApiError::SessionNotLive(_) => "session_not_live",
            ApiError::InvalidAction(_) => "invalid_action",
            ApiError::EmptySession => "empty_session",
            ApiError::UnknownRun(_) => "unknown_run",
            ApiError::BadRequest(_) => "bad_request",
            ApiError::Internal(_) => "internal",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::UnknownTemplate(_) | ApiError::UnknownSession(_) | ApiError::UnknownRun(_) => StatusCode::NOT_FOUND,
            ApiError::SessionNotLive(_) | ApiError::EmptySession => StatusCode::CONFLICT,
            ApiError::InvalidAction(_) | ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({
            "schema_version": SCHEMA_VERSION,
            "error": self.code(),
            "message": self.to_string(),
        });
        (self.status(), Json(body)).into_response()
    }
}
