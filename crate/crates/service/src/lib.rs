//! HTTP/JSON API, report writer and configuration for the survey
//! analytics engine.

pub mod api;
pub mod config;
pub mod error;
pub mod report;

pub use api::{router, AppState, RouterOptions};
pub use config::{load, DataSource, Dataset, ServiceConfig};
pub use error::ApiError;
pub use report::{build_report, write_report, ReportKind};
