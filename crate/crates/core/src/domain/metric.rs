use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DomainError;

/// Closed numeric interval a metric or question is reported on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    pub min: f64,
    pub max: f64,
}

impl Scale {
    pub const fn new(min: f64, max: f64) -> Self {
        Scale { min, max }
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.min && value <= self.max
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min + self.max)
    }

    /// Affine map of `value` from `self` onto `target`.
    pub fn map_onto(&self, value: f64, target: &Scale) -> f64 {
        if self == target {
            return value;
        }
        target.min + (value - self.min) * target.width() / self.width()
    }
}

/// The eleven composite survey metrics.
///
/// Declaration order is the canonical ordering used for axes, correlation
/// profiles and every serialized list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricId {
    CommunityAttachment,
    SocialOfferings,
    Openness,
    Aesthetics,
    Education,
    BasicServices,
    Leadership,
    Economy,
    Safety,
    SocialCapital,
    CivicInvolvement,
}

pub const METRIC_COUNT: usize = 11;

impl MetricId {
    pub const ALL: [MetricId; METRIC_COUNT] = [
        MetricId::CommunityAttachment,
        MetricId::SocialOfferings,
        MetricId::Openness,
        MetricId::Aesthetics,
        MetricId::Education,
        MetricId::BasicServices,
        MetricId::Leadership,
        MetricId::Economy,
        MetricId::Safety,
        MetricId::SocialCapital,
        MetricId::CivicInvolvement,
    ];

    /// The correlation target.
    pub const TARGET: MetricId = MetricId::CommunityAttachment;

    /// Every metric except the correlation target, in canonical order.
    pub fn predictors() -> impl Iterator<Item = MetricId> {
        Self::ALL.into_iter().filter(|m| *m != Self::TARGET)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MetricId::CommunityAttachment => "community_attachment",
            MetricId::SocialOfferings => "social_offerings",
            MetricId::Openness => "openness",
            MetricId::Aesthetics => "aesthetics",
            MetricId::Education => "education",
            MetricId::BasicServices => "basic_services",
            MetricId::Leadership => "leadership",
            MetricId::Economy => "economy",
            MetricId::Safety => "safety",
            MetricId::SocialCapital => "social_capital",
            MetricId::CivicInvolvement => "civic_involvement",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MetricId::CommunityAttachment => "Community Attachment",
            MetricId::SocialOfferings => "Social Offerings",
            MetricId::Openness => "Openness",
            MetricId::Aesthetics => "Aesthetics",
            MetricId::Education => "Education",
            MetricId::BasicServices => "Basic Services",
            MetricId::Leadership => "Leadership",
            MetricId::Economy => "Economy",
            MetricId::Safety => "Safety",
            MetricId::SocialCapital => "Social Capital",
            MetricId::CivicInvolvement => "Civic Involvement",
        }
    }

    /// Reporting scale: 1-5 for attachment, 1-3 for everything else.
    pub fn scale(self) -> Scale {
        match self {
            MetricId::CommunityAttachment => Scale::new(1.0, 5.0),
            _ => Scale::new(1.0, 3.0),
        }
    }

    /// Number of questions the standard questionnaire averages for this metric.
    pub fn standard_question_count(self) -> usize {
        match self {
            MetricId::CommunityAttachment => 5,
            MetricId::SocialOfferings => 3,
            MetricId::Openness => 5,
            MetricId::Aesthetics => 2,
            MetricId::Education => 2,
            MetricId::BasicServices => 3,
            MetricId::Leadership => 2,
            MetricId::Economy => 6,
            MetricId::Safety => 2,
            MetricId::SocialCapital => 4,
            MetricId::CivicInvolvement => 4,
        }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricId {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        MetricId::ALL
            .into_iter()
            .find(|m| m.as_str() == key)
            .ok_or_else(|| DomainError::UnknownMetric(s.to_string()))
    }
}

/// One survey question feeding a metric, with the scale it was asked on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub column: String,
    pub scale: Scale,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricDefinition {
    pub id: MetricId,
    pub component_questions: Vec<Question>,
    pub scale: Scale,
}

impl MetricDefinition {
    pub const MIN_QUESTIONS: usize = 2;
    pub const MAX_QUESTIONS: usize = 6;

    pub fn new(id: MetricId, component_questions: Vec<Question>) -> Result<Self, DomainError> {
        let k = component_questions.len();
        if !(Self::MIN_QUESTIONS..=Self::MAX_QUESTIONS).contains(&k) {
            return Err(DomainError::QuestionCount {
                metric: id,
                count: k,
            });
        }
        if let Some(q) = component_questions.iter().find(|q| {
            !(q.scale.min.is_finite() && q.scale.max.is_finite() && q.scale.min < q.scale.max)
        }) {
            return Err(DomainError::InvalidScale(q.column.clone()));
        }
        Ok(MetricDefinition {
            id,
            component_questions,
            scale: id.scale(),
        })
    }

    /// Minimum answered questions for the metric to be present: ceil(k/2).
    pub fn required_answers(&self) -> usize {
        self.component_questions.len().div_ceil(2)
    }
}
