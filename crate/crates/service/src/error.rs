use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use gavf_core::elicitation::SessionError;
use serde_json::json;

/// An error response: status, a stable `error` code and a message.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub hints: Vec<String>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            hints: Vec::new(),
        }
    }

    pub fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn not_found(id: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "UnknownSession",
            format!("no session `{id}`"),
        )
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", message)
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let message = e.to_string();
        let (status, code) = match &e {
            SessionError::InvalidK(_) => (StatusCode::BAD_REQUEST, "InvalidK"),
            SessionError::Items(_) => (StatusCode::BAD_REQUEST, "InvalidItems"),
            SessionError::NetNotAcyclic(_) => (StatusCode::UNPROCESSABLE_ENTITY, "NetNotAcyclic"),
            SessionError::BaseSystemInfeasible { .. } => {
                (StatusCode::UNPROCESSABLE_ENTITY, "BaseSystemInfeasible")
            }
            SessionError::EmptyItemSet => (StatusCode::UNPROCESSABLE_ENTITY, "EmptyItemSet"),
            SessionError::ChosenNotDisplayed(_) => {
                (StatusCode::UNPROCESSABLE_ENTITY, "ChosenNotDisplayed")
            }
            SessionError::NotActive(_) => (StatusCode::CONFLICT, "NotActive"),
            SessionError::Solver(_) | SessionError::Snapshot(_) => {
                (StatusCode::INTERNAL_SERVER_ERROR, "Internal")
            }
        };
        let hints = match e {
            SessionError::BaseSystemInfeasible { hints } => hints,
            _ => Vec::new(),
        };
        Self {
            status,
            code,
            message,
            hints,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.code, "message": self.message });
        if !self.hints.is_empty() {
            body["hints"] = json!(self.hints);
        }
        (self.status, Json(body)).into_response()
    }
}
