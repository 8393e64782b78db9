use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

use attache_core::domain::DomainError;
use attache_core::AnalyticsError;

/// JSON error body returned by every endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApiError {
    pub code: &'static str,
    pub message: String,
    #[serde(skip)]
    pub status: StatusCode,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            code,
            message: message.into(),
            status,
        }
    }

    pub fn bad_parameter(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_parameter", message)
    }

    pub fn missing_parameter(name: &str) -> Self {
        Self::new(
            StatusCode::BAD_REQUEST,
            "missing_parameter",
            format!("query parameter `{name}` is required"),
        )
    }

    pub fn not_found(path: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "not_found",
            format!("no route for `{path}`"),
        )
    }
}

impl From<DomainError> for ApiError {
    fn from(e: DomainError) -> Self {
        let code = match &e {
            DomainError::UnknownMetric(_) => "unknown_metric",
            DomainError::UnknownCommunity(_) | DomainError::InvalidSlug(_) => "unknown_community",
            DomainError::UnknownUrbanicity(_) | DomainError::EmptyUrbanicity => {
                "unknown_urbanicity"
            }
            DomainError::UnknownRegion(_) => "unknown_region",
            DomainError::UnknownLevel(_) => "unknown_level",
            DomainError::MissingSelectionId(_) => "missing_parameter",
            DomainError::UnknownYear(_) => "unknown_year",
            _ => {
                return Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string());
            }
        };
        Self::new(StatusCode::BAD_REQUEST, code, e.to_string())
    }
}

impl From<AnalyticsError> for ApiError {
    fn from(e: AnalyticsError) -> Self {
        match e {
            AnalyticsError::Selection(d) => d.into(),
            AnalyticsError::BadParameter(m) => Self::bad_parameter(m),
            AnalyticsError::EmptySelection { .. } => Self::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "empty_selection",
                e.to_string(),
            ),
            AnalyticsError::NoData { .. } => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, "no_data", e.to_string())
            }
            AnalyticsError::DegenerateSample { .. } => Self::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "degenerate_sample",
                e.to_string(),
            ),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self)).into_response()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use attache_core::domain::MetricId;

    #[test]
    fn status_mapping() {
        let e: ApiError = AnalyticsError::EmptySelection {
            metric: MetricId::Safety,
        }
        .into();
        assert_eq!(
            (e.status, e.code),
            (StatusCode::UNPROCESSABLE_ENTITY, "empty_selection")
        );
        let e: ApiError =
            AnalyticsError::Selection(DomainError::UnknownCommunity("x".into())).into();
        assert_eq!(
            (e.status, e.code),
            (StatusCode::BAD_REQUEST, "unknown_community")
        );
        let e: ApiError = AnalyticsError::DegenerateSample { n: 1 }.into();
        assert_eq!(e.status, StatusCode::UNPROCESSABLE_ENTITY);
        assert_eq!(
            ApiError::not_found("/api/nope").status,
            StatusCode::NOT_FOUND
        );
    }
}
