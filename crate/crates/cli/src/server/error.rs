use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use prognos_core::Error as CoreError;
use serde::{Deserialize, Serialize};

/// The JSON body of every failed request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    #[serde(default)]
    pub detail: Option<String>,
    #[serde(skip)]
    pub status: u16,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            code: code.to_string(),
            message: message.into(),
            detail: None,
            status: status.as_u16(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", message)
    }

    pub fn not_found(code: &str, message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, code, message)
    }

    pub fn conflict(code: &str, message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::CONFLICT, code, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<CoreError> for ApiError {
    fn from(err: CoreError) -> Self {
        let text = err.to_string();
        match err {
            CoreError::InvalidArgument(_)
            | CoreError::DimensionMismatch { .. }
            | CoreError::NonFinite { .. }
            | CoreError::InvalidGeometry(_) => ApiError::invalid("request rejected by the engine").with_detail(text),
            CoreError::GeometryMismatch(_) => {
                ApiError::conflict("geometry_mismatch", "request does not fit the bundle geometry").with_detail(text)
            }
            _ => ApiError::internal("engine failure").with_detail(text),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

pub type ApiResult<T> = Result<T, ApiError>;
