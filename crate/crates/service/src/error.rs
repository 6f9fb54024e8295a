//! JSON error bodies: `{"error": {"code", "message", "details"?}}`.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use bldd_core::mapping::MappingError;
use bldd_core::petri::NetError;
use bldd_core::session::SessionError;
use serde::Serialize;
use serde_json::{json, Value};

use crate::fixtures::FixtureError;

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub details: Option<Value>,
}

#[derive(Serialize)]
struct Body<'a> {
    code: &'a str,
    message: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    details: &'a Option<Value>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            details: None,
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = Some(details);
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn session_not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "session_not_found", format!("no session `{id}`"))
    }

    pub fn body(&self) -> Value {
        json!({ "error": Body { code: self.code, message: &self.message, details: &self.details } })
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body())).into_response()
    }
}

impl From<FixtureError> for ApiError {
    fn from(e: FixtureError) -> Self {
        match e {
            FixtureError::InvalidName(_) => Self::new(StatusCode::BAD_REQUEST, "invalid_fixture_name", e.to_string()),
            FixtureError::NotFound { .. } => Self::new(StatusCode::NOT_FOUND, "fixture_not_found", e.to_string()),
            FixtureError::Io { .. } => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "io_error", e.to_string()),
        }
    }
}

impl From<NetError> for ApiError {
    fn from(e: NetError) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_model", e.to_string())
    }
}

impl From<MappingError> for ApiError {
    fn from(e: MappingError) -> Self {
        let code = match e {
            MappingError::MaxScenariosExceeded { .. } => "max_scenarios_exceeded",
            MappingError::InvalidWorkflowNet(_) => "invalid_workflow_net",
            _ => "mapping_error",
        };
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, code, e.to_string())
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let message = e.to_string();
        match e {
            SessionError::NotEnabled(t) => {
                Self::new(StatusCode::CONFLICT, "not_enabled", message).with_details(json!({ "transition": t }))
            }
            SessionError::Net(NetError::UnknownTransition(t)) => {
                Self::new(StatusCode::NOT_FOUND, "unknown_transition", message).with_details(json!({ "transition": t }))
            }
            SessionError::InvalidWorkflowNet(diagnostics) => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_workflow_net", message)
                    .with_details(serde_json::to_value(diagnostics).unwrap_or(Value::Null))
            }
            SessionError::Manifest(_) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_bindings", message),
            SessionError::Fixture(_) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_sut", message),
            SessionError::UnmappedTransition(_) => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_bindings", message)
            }
            SessionError::Net(_) | SessionError::Mapping(_) => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_model", message)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn body_shape() {
        let e = ApiError::bad_request("nope");
        assert_eq!(e.body(), json!({"error": {"code": "bad_request", "message": "nope"}}));
        let e = ApiError::from(SessionError::NotEnabled("t1".into()));
        assert_eq!(e.status, StatusCode::CONFLICT);
        assert_eq!(e.body()["error"]["details"]["transition"], "t1");
    }
}
