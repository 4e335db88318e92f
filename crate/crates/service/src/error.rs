use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("no such session")]
    NotFound,
    #[error("stale version; current is {current}")]
    VersionConflict { current: u64 },
    #[error(transparent)]
    Core(#[from] sens_core::Error),
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    Internal(String),
}

impl From<std::io::Error> for ApiError {
    fn from(e: std::io::Error) -> Self {
        ApiError::Internal(e.to_string())
    }
}

impl ApiError {
    /// HTTP status and machine-readable reason.
    pub fn status_reason(&self) -> (StatusCode, &'static str) {
        use sens_core::Error as E;
        match self {
            ApiError::NotFound => (StatusCode::NOT_FOUND, "not_found"),
            ApiError::VersionConflict { .. } => (StatusCode::CONFLICT, "version_conflict"),
            ApiError::BadRequest(_) => (StatusCode::BAD_REQUEST, "bad_request"),
            ApiError::Internal(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
            ApiError::Core(e) => match e {
                E::Complete => (StatusCode::CONFLICT, "complete"),
                E::Suspended(_) => (StatusCode::CONFLICT, "suspended"),
                E::WrongPrompt { .. } => (StatusCode::CONFLICT, "wrong_prompt"),
                E::NothingToUndo => (StatusCode::CONFLICT, "nothing_to_undo"),
                E::Config(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_config"),
                E::Input(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_input"),
                E::Estimate(_) => (StatusCode::UNPROCESSABLE_ENTITY, "estimate_unavailable"),
                E::Parse { .. } | E::Json(_) => (StatusCode::BAD_REQUEST, "bad_request"),
                E::Io(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, reason) = self.status_reason();
        let mut body = json!({ "error": reason, "message": self.to_string() });
        if let ApiError::VersionConflict { current } = self {
            body["version"] = json!(current);
        }
        (status, Json(body)).into_response()
    }
}
