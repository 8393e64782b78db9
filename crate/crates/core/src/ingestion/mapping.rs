use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::domain::{CommunityId, MetricDefinition, MetricId, Question, Scale, METRIC_COUNT};

pub const DEFAULT_MISSING: [&str; 4] = ["", "NA", "REFUSED", "DK"];

/// Where a metric's value comes from in the survey file.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricSource {
    /// Averaged from raw question columns.
    Questions(MetricDefinition),
    /// Already derived in the export; ingested verbatim.
    Precomputed { column: String },
}

/// How survey-file columns map onto communities, years and metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMapping {
    pub community_column: String,
    pub year_column: String,
    /// When set, urbanicity labels are read from this column and override the registry.
    pub urbanicity_column: Option<String>,
    pub delimiter: u8,
    pub missing: Vec<String>,
    /// Raw community cell value -> registry id, for exports that use codes.
    pub community_aliases: BTreeMap<String, CommunityId>,
    pub metrics: [MetricSource; METRIC_COUNT],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMapping {
    community_column: String,
    year_column: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    urbanicity_column: Option<String>,
    #[serde(default = "default_delimiter")]
    delimiter: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    missing: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    community_aliases: BTreeMap<String, String>,
    metrics: BTreeMap<String, RawMetric>,
}

fn default_delimiter() -> String {
    ",".to_string()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetric {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    questions: Option<Vec<RawQuestion>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    column: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuestion {
    column: String,
    min: f64,
    max: f64,
}

impl ColumnMapping {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, IngestError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, IngestError> {
        let raw: RawMapping =
            toml::from_str(text).map_err(|e| IngestError::Mapping(e.to_string()))?;
        Self::try_from(raw)
    }

    pub fn to_toml_string(&self) -> String {
        let raw = RawMapping::from(self);
        toml::to_string_pretty(&raw).expect("mapping serializes")
    }

    pub fn source(&self, metric: MetricId) -> &MetricSource {
        &self.metrics[metric.index()]
    }

    pub fn is_missing(&self, cell: &str) -> bool {
        let cell = cell.trim();
        self.missing.iter().any(|m| m.eq_ignore_ascii_case(cell))
    }

    /// Every column the mapping reads.
    pub fn referenced_columns(&self) -> Vec<&str> {
        let mut cols = vec![self.community_column.as_str(), self.year_column.as_str()];
        if let Some(u) = &self.urbanicity_column {
            cols.push(u);
        }
        for source in &self.metrics {
            match source {
                MetricSource::Questions(def) => {
                    cols.extend(def.component_questions.iter().map(|q| q.column.as_str()))
                }
                MetricSource::Precomputed { column } => cols.push(column),
            }
        }
        cols
    }
}

impl TryFrom<RawMapping> for ColumnMapping {
    type Error = IngestError;

    fn try_from(raw: RawMapping) -> Result<Self, Self::Error> {
        let delimiter = match raw.delimiter.as_bytes() {
            [b] => *b,
            b"\\t" => b'\t',
            _ => {
                return Err(IngestError::Mapping(format!(
                    "delimiter must be one byte, got {:?}",
                    raw.delimiter
                )))
            }
        };
        let mut slots: [Option<MetricSource>; METRIC_COUNT] = Default::default();
        for (key, metric) in raw.metrics {
            let id: MetricId = key
                .parse()
                .map_err(|_| IngestError::Mapping(format!("unknown metric `{key}`")))?;
            let source = match (metric.questions, metric.column) {
                (Some(questions), None) => {
                    let questions = questions
                        .into_iter()
                        .map(|q| Question {
                            column: q.column,
                            scale: Scale::new(q.min, q.max),
                        })
                        .collect();
                    MetricSource::Questions(MetricDefinition::new(id, questions)?)
                }
                (None, Some(column)) => MetricSource::Precomputed { column },
                _ => {
                    return Err(IngestError::Mapping(format!(
                        "metric `{key}` needs exactly one of `questions` or `column`"
                    )))
                }
            };
            if slots[id.index()].replace(source).is_some() {
                return Err(IngestError::Mapping(format!(
                    "metric `{id}` is mapped more than once"
                )));
            }
        }
        let unmapped: Vec<&str> = MetricId::ALL
            .iter()
            .filter(|m| slots[m.index()].is_none())
            .map(|m| m.as_str())
            .collect();
        if !unmapped.is_empty() {
            return Err(IngestError::Mapping(format!(
                "unmapped metrics: {}",
                unmapped.join(", ")
            )));
        }
        let community_aliases = raw
            .community_aliases
            .into_iter()
            .map(|(k, v)| Ok((k.trim().to_string(), CommunityId::new(v)?)))
            .collect::<Result<_, IngestError>>()?;
        Ok(ColumnMapping {
            community_column: raw.community_column,
            year_column: raw.year_column,
            urbanicity_column: raw.urbanicity_column,
            delimiter,
            missing: raw
                .missing
                .unwrap_or_else(|| DEFAULT_MISSING.iter().map(|s| s.to_string()).collect()),
            community_aliases,
            metrics: slots.map(|s| s.expect("checked above")),
        })
    }
}

impl From<&ColumnMapping> for RawMapping {
    fn from(m: &ColumnMapping) -> Self {
        let metrics = MetricId::ALL
            .iter()
            .map(|id| {
                let raw = match m.source(*id) {
                    MetricSource::Questions(def) => RawMetric {
                        questions: Some(
                            def.component_questions
                                .iter()
                                .map(|q| RawQuestion {
                                    column: q.column.clone(),
                                    min: q.scale.min,
                                    max: q.scale.max,
                                })
                                .collect(),
                        ),
                        column: None,
                    },
                    MetricSource::Precomputed { column } => RawMetric {
                        questions: None,
                        column: Some(column.clone()),
                    },
                };
                (id.as_str().to_string(), raw)
            })
            .collect();
        RawMapping {
            community_column: m.community_column.clone(),
            year_column: m.year_column.clone(),
            urbanicity_column: m.urbanicity_column.clone(),
            delimiter: if m.delimiter == b'\t' {
                "\\t".into()
            } else {
                (m.delimiter as char).to_string()
            },
            missing: Some(m.missing.clone()),
            community_aliases: m
                .community_aliases
                .iter()
                .map(|(k, v)| (k.clone(), v.to_string()))
                .collect(),
            metrics,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn precomputed_toml(skip: Option<&str>) -> String {
        let mut s = String::from("community_column = \"city\"\nyear_column = \"wave\"\n");
        for m in MetricId::ALL {
            if Some(m.as_str()) == skip {
                continue;
            }
            s.push_str(&format!(
                "[metrics.{m}]\ncolumn = \"{}\"\n",
                m.as_str().to_uppercase()
            ));
        }
        s
    }

    #[test]
    fn precomputed_mapping_defaults() {
        let m = ColumnMapping::from_toml_str(&precomputed_toml(None)).unwrap();
        assert_eq!(m.delimiter, b',');
        assert!(m.is_missing(""));
        assert!(m.is_missing(" refused "));
        assert!(!m.is_missing("2"));
        assert_eq!(
            m.source(MetricId::Economy),
            &MetricSource::Precomputed {
                column: "ECONOMY".into()
            }
        );
        let again = ColumnMapping::from_toml_str(&m.to_toml_string()).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn unmapped_metric_is_an_error() {
        let err = ColumnMapping::from_toml_str(&precomputed_toml(Some("safety"))).unwrap_err();
        assert!(err.to_string().contains("safety"), "{err}");
    }

    #[test]
    fn both_forms_is_an_error() {
        let mut s = precomputed_toml(Some("safety"));
        s.push_str("[metrics.safety]\ncolumn = \"S\"\nquestions = [{ column = \"s1\", min = 1, max = 3 }, { column = \"s2\", min = 1, max = 3 }]\n");
        assert!(ColumnMapping::from_toml_str(&s).is_err());
    }

    #[test]
    fn question_form() {
        let mut s = precomputed_toml(Some("safety"));
        s.push_str("[metrics.safety]\nquestions = [{ column = \"s1\", min = 1, max = 4 }, { column = \"s2\", min = 1, max = 4 }]\n");
        let m = ColumnMapping::from_toml_str(&s).unwrap();
        match m.source(MetricId::Safety) {
            MetricSource::Questions(def) => {
                assert_eq!(def.component_questions.len(), 2);
                assert_eq!(def.component_questions[0].scale, Scale::new(1.0, 4.0));
                assert_eq!(def.scale, Scale::new(1.0, 3.0));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_question_rejected() {
        let mut s = precomputed_toml(Some("safety"));
        s.push_str("[metrics.safety]\nquestions = [{ column = \"s1\", min = 1, max = 3 }]\n");
        assert!(ColumnMapping::from_toml_str(&s).is_err());
    }

    #[test]
    fn tab_delimiter() {
        let s = format!("delimiter = \"\\\\t\"\n{}", precomputed_toml(None));
        let m = ColumnMapping::from_toml_str(&s).unwrap();
        assert_eq!(m.delimiter, b'\t');
    }
}
