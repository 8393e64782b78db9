//! Survey analytics engine for community-attachment data.
//!
//! Pipeline: [`ingestion::parse_survey_file`] derives the eleven metrics per
//! respondent, [`ingestion::build_snapshot`] indexes them, and the methods on
//! [`analytics::AnalyticsSnapshot`] answer every aggregate query. Snapshots
//! are immutable and `Sync`, so one instance can serve any number of readers.

pub mod analytics;
pub mod domain;
pub mod exec;
pub mod fixture;
pub mod ingestion;

pub use analytics::{AnalyticsError, AnalyticsSnapshot, SummaryCell};
pub use domain::{CommunityRegistry, MetricId, RegionId, Selection, SelectionLevel, YearFilter};
pub use exec::Execution;
