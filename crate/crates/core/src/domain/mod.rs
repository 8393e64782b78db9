//! Shared data model: metrics, communities, regions, urbanicity labels and
//! selections.
//!
//! Everything here is an immutable value type.

mod metric;
mod registry;
mod selection;

pub use metric::{MetricDefinition, MetricId, Question, Scale, METRIC_COUNT};
pub use registry::{
    slugify, Community, CommunityId, CommunityRegistry, RegionId, UrbanicityLabel, COMMUNITY_COUNT,
    CONUS_LATITUDE, CONUS_LONGITUDE,
};
pub use selection::{
    resolve_selection, Selection, SelectionLevel, SurveyYear, YearFilter, SURVEY_YEARS,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("unknown community `{0}`")]
    UnknownCommunity(String),
    #[error("unknown urbanicity `{0}`")]
    UnknownUrbanicity(String),
    #[error("unknown region `{0}`")]
    UnknownRegion(String),
    #[error("unknown selection level `{0}`")]
    UnknownLevel(String),
    #[error("selection level `{0}` requires an id")]
    MissingSelectionId(String),
    #[error("`{0}` is not a survey year (2008, 2009, 2010)")]
    UnknownYear(String),
    #[error("`{0}` is not a valid community slug")]
    InvalidSlug(String),
    #[error("urbanicity label must be non-empty")]
    EmptyUrbanicity,
    #[error("{metric} must average 2 to 6 questions, got {count}")]
    QuestionCount { metric: MetricId, count: usize },
    #[error("question `{0}` has an invalid response scale")]
    InvalidScale(String),
    #[error("registry must list exactly 26 communities, found {0}")]
    CommunityCount(usize),
    #[error("duplicate community `{0}` in registry")]
    DuplicateCommunity(String),
    #[error(
        "community `{id}` at ({latitude}, {longitude}) lies outside the continental United States"
    )]
    Coordinates {
        id: String,
        latitude: f64,
        longitude: f64,
    },
    #[error("registry line {line}: {message}")]
    RegistryRow { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One respondent's derived metric values.
#[derive(Debug, Clone, PartialEq)]
pub struct SurveyResponse {
    pub community: CommunityId,
    pub year: SurveyYear,
    pub metrics: [Option<f64>; METRIC_COUNT],
}

impl SurveyResponse {
    pub fn new(community: CommunityId, year: SurveyYear) -> Self {
        SurveyResponse {
            community,
            year,
            metrics: [None; METRIC_COUNT],
        }
    }

    pub fn metric(&self, id: MetricId) -> Option<f64> {
        self.metrics[id.index()]
    }

    pub fn with_metric(mut self, id: MetricId, value: Option<f64>) -> Self {
        self.metrics[id.index()] = value;
        self
    }

    /// Every present value lies on its metric's scale.
    pub fn in_range(&self) -> bool {
        MetricId::ALL
            .iter()
            .all(|m| self.metric(*m).is_none_or(|v| m.scale().contains(v)))
    }
}
