use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use serde_json::Value;

use glens_core::community::CommunityError;
use glens_core::contagion::ContagionError;
use glens_core::graph::GraphError;
use glens_core::metrics::MetricsError;
use glens_core::patterns::PatternError;
use glens_core::risk::RiskError;

/// Error body shared by every endpoint: `{code, message, detail}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: String,
    pub message: String,
    pub detail: Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: impl Into<String>, message: impl Into<String>) -> Self {
        ApiError { status, code: code.into(), message: message.into(), detail: Value::Null }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "BadRequest", message)
    }

    pub fn not_found(code: &str, what: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, format!("{what} not found"))
    }

    fn domain(code: &str, message: String) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, code, message)
    }

    /// Panics and join failures; the message never carries the cause.
    pub fn internal() -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", "internal error")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

impl From<CommunityError> for ApiError {
    fn from(e: CommunityError) -> Self {
        ApiError::domain(e.code(), e.to_string())
    }
}

impl From<ContagionError> for ApiError {
    fn from(e: ContagionError) -> Self {
        match e {
            ContagionError::UnknownNode(ref id) => {
                ApiError::not_found(e.code(), format!("enterprise {id}")).with_detail(Value::String(id.clone()))
            }
            _ => ApiError::domain(e.code(), e.to_string()),
        }
    }
}

impl From<PatternError> for ApiError {
    fn from(e: PatternError) -> Self {
        ApiError::domain(e.code(), e.to_string())
    }
}

impl From<MetricsError> for ApiError {
    fn from(e: MetricsError) -> Self {
        ApiError::domain(e.code(), e.to_string())
    }
}

impl From<RiskError> for ApiError {
    fn from(e: RiskError) -> Self {
        ApiError::domain(e.code(), e.to_string())
    }
}

impl From<GraphError> for ApiError {
    fn from(e: GraphError) -> Self {
        ApiError::domain(e.code(), e.to_string())
    }
}
