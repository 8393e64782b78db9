//! Survey file parsing, metric derivation and validation.
//!
//! [`parse_survey_file`] turns a delimiter-separated export into a
//! [`ResponseTable`]; [`build_snapshot`] indexes that table for the analytics
//! layer. Bad rows never abort ingestion: they are rejected and counted in
//! the table's [`Provenance`].

mod derive;
mod mapping;

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use derive::derive_metric;
pub use mapping::{ColumnMapping, MetricSource, DEFAULT_MISSING};

use crate::analytics::AnalyticsSnapshot;
use crate::domain::{
    CommunityRegistry, DomainError, MetricId, SurveyResponse, SurveyYear, UrbanicityLabel,
    METRIC_COUNT,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("survey file is missing mapped columns: {}", .0.join(", "))]
    MissingColumn(Vec<String>),
    #[error("survey file has no data rows")]
    EmptyInput,
    #[error("answer {value} in column `{column}` is outside the question scale")]
    ScaleViolation { column: String, value: f64 },
    #[error("{metric} expects {expected} answers, got {got}")]
    ArityMismatch {
        metric: MetricId,
        expected: usize,
        got: usize,
    },
    #[error("invalid column mapping: {0}")]
    Mapping(String),
    #[error("response references unknown community `{0}`")]
    UnknownCommunity(String),
    #[error("response value {value} for {metric} is outside its scale")]
    OutOfRange { metric: MetricId, value: f64 },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("reading survey file: {0}")]
    Csv(#[from] csv::Error),
}

/// Why a data row was not accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    UnknownCommunity,
    UnknownYear,
    FieldCount,
    MalformedValue,
    OutOfScale,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::UnknownCommunity => "unknown_community",
            RejectReason::UnknownYear => "unknown_year",
            RejectReason::FieldCount => "field_count",
            RejectReason::MalformedValue => "malformed_value",
            RejectReason::OutOfScale => "out_of_scale",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Provenance {
    /// SHA-256 of the raw input bytes; `None` for tables assembled in memory.
    pub source_digest: Option<String>,
    pub rows_read: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub rejections: BTreeMap<RejectReason, usize>,
}

/// Per-community urbanicity observed in the data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UrbanicityObservation {
    pub community: String,
    pub registry_label: String,
    pub data_label: String,
    /// Other labels seen for the same community, with counts.
    pub conflicts: Vec<(String, usize)>,
}

/// Accepted responses plus the registry they refer to. Immutable once built.
#[derive(Debug, Clone)]
pub struct ResponseTable {
    responses: Vec<SurveyResponse>,
    registry: CommunityRegistry,
    provenance: Provenance,
    urbanicity: Vec<UrbanicityObservation>,
}

impl ResponseTable {
    /// Assemble a table from already-derived responses.
    pub fn from_responses(
        responses: Vec<SurveyResponse>,
        registry: CommunityRegistry,
    ) -> Result<Self, IngestError> {
        for r in &responses {
            if registry.index_of(r.community.as_str()).is_none() {
                return Err(IngestError::UnknownCommunity(r.community.to_string()));
            }
            if let Some(m) = MetricId::ALL
                .into_iter()
                .find(|m| r.metric(*m).is_some_and(|v| !m.scale().contains(v)))
            {
                return Err(IngestError::OutOfRange {
                    metric: m,
                    value: r.metric(m).unwrap_or_default(),
                });
            }
        }
        let provenance = Provenance {
            source_digest: None,
            rows_read: responses.len(),
            accepted: responses.len(),
            rejected: 0,
            rejections: BTreeMap::new(),
        };
        Ok(ResponseTable {
            responses,
            registry,
            provenance,
            urbanicity: Vec::new(),
        })
    }

    pub fn responses(&self) -> &[SurveyResponse] {
        &self.responses
    }

    pub fn registry(&self) -> &CommunityRegistry {
        &self.registry
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn urbanicity_observations(&self) -> &[UrbanicityObservation] {
        &self.urbanicity
    }
}

/// Parse a survey export.
pub fn parse_survey_file<R: Read>(
    mut stream: R,
    mapping: &ColumnMapping,
    registry: &CommunityRegistry,
) -> Result<ResponseTable, IngestError> {
    let mut bytes = Vec::new();
    stream
        .read_to_end(&mut bytes)
        .map_err(|source| IngestError::Io {
            path: "<survey stream>".into(),
            source,
        })?;
    let digest = hex::encode(Sha256::digest(&bytes));

    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(mapping.delimiter)
        .flexible(true)
        .from_reader(bytes.as_slice());
    let header: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(IngestError::EmptyInput);
    }
    let plan = RowPlan::new(&header, mapping)?;

    let mut provenance = Provenance {
        source_digest: Some(digest),
        ..Provenance::default()
    };
    let mut responses = Vec::new();
    let mut urbanicity_counts: Vec<BTreeMap<String, usize>> = vec![BTreeMap::new(); registry.len()];

    let mut record = csv::StringRecord::new();
    loop {
        let outcome = match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) if record.len() != header.len() => Err(RejectReason::FieldCount),
            Ok(true) => plan.row(&record, mapping, registry),
            // Undecodable rows (bad UTF-8, stray quotes) are per-row failures.
            Err(e) if !matches!(e.kind(), csv::ErrorKind::Io(_)) => {
                Err(RejectReason::MalformedValue)
            }
            Err(e) => return Err(e.into()),
        };
        provenance.rows_read += 1;
        match outcome {
            Ok((response, community, label)) => {
                if let Some(label) = label {
                    *urbanicity_counts[community].entry(label).or_default() += 1;
                }
                responses.push(response);
                provenance.accepted += 1;
            }
            Err(reason) => {
                provenance.rejected += 1;
                *provenance.rejections.entry(reason).or_default() += 1;
            }
        }
    }
    if provenance.rows_read == 0 {
        return Err(IngestError::EmptyInput);
    }

    let (registry, urbanicity) = apply_urbanicity(registry.clone(), urbanicity_counts)?;
    Ok(ResponseTable {
        responses,
        registry,
        provenance,
        urbanicity,
    })
}

pub fn parse_survey_path(
    path: impl AsRef<Path>,
    mapping: &ColumnMapping,
    registry: &CommunityRegistry,
) -> Result<ResponseTable, IngestError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_survey_file(std::io::BufReader::new(file), mapping, registry)
}

/// Index a response table for querying.
pub fn build_snapshot(table: &ResponseTable) -> AnalyticsSnapshot {
    AnalyticsSnapshot::from_table(table)
}

enum Extract {
    Questions(Vec<usize>),
    Precomputed(usize),
}

/// Header positions resolved once per file.
struct RowPlan {
    community: usize,
    year: usize,
    urbanicity: Option<usize>,
    metrics: Vec<Extract>,
}

impl RowPlan {
    fn new(header: &[String], mapping: &ColumnMapping) -> Result<Self, IngestError> {
        let missing: Vec<String> = mapping
            .referenced_columns()
            .into_iter()
            .filter(|c| !header.iter().any(|h| h == c))
            .map(str::to_string)
            .collect();
        if !missing.is_empty() {
            return Err(IngestError::MissingColumn(missing));
        }
        let pos = |name: &str| {
            header
                .iter()
                .position(|h| h == name)
                .expect("checked above")
        };
        let metrics = mapping
            .metrics
            .iter()
            .map(|source| match source {
                MetricSource::Questions(def) => Extract::Questions(
                    def.component_questions
                        .iter()
                        .map(|q| pos(&q.column))
                        .collect(),
                ),
                MetricSource::Precomputed { column } => Extract::Precomputed(pos(column)),
            })
            .collect();
        Ok(RowPlan {
            community: pos(&mapping.community_column),
            year: pos(&mapping.year_column),
            urbanicity: mapping.urbanicity_column.as_deref().map(pos),
            metrics,
        })
    }

    fn row(
        &self,
        record: &csv::StringRecord,
        mapping: &ColumnMapping,
        registry: &CommunityRegistry,
    ) -> Result<(SurveyResponse, usize, Option<String>), RejectReason> {
        let raw_community = record[self.community].trim();
        let community = mapping
            .community_aliases
            .get(raw_community)
            .and_then(|id| registry.index_of(id.as_str()))
            .or_else(|| registry.lookup_loose(raw_community))
            .ok_or(RejectReason::UnknownCommunity)?;
        let year: SurveyYear = record[self.year]
            .parse()
            .map_err(|_| RejectReason::UnknownYear)?;

        let cell = |i: usize| -> Result<Option<f64>, RejectReason> {
            let raw = &record[i];
            if mapping.is_missing(raw) {
                return Ok(None);
            }
            raw.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Some)
                .ok_or(RejectReason::MalformedValue)
        };

        let mut metrics = [None; METRIC_COUNT];
        for (metric, (extract, source)) in MetricId::ALL
            .into_iter()
            .zip(self.metrics.iter().zip(&mapping.metrics))
        {
            metrics[metric.index()] = match (extract, source) {
                (Extract::Questions(cols), MetricSource::Questions(def)) => {
                    let answers = cols
                        .iter()
                        .map(|&c| cell(c))
                        .collect::<Result<Vec<_>, _>>()?;
                    derive_metric(&answers, def).map_err(|_| RejectReason::OutOfScale)?
                }
                (Extract::Precomputed(col), MetricSource::Precomputed { .. }) => {
                    match cell(*col)? {
                        Some(v) if !metric.scale().contains(v) => {
                            return Err(RejectReason::OutOfScale)
                        }
                        v => v,
                    }
                }
                _ => unreachable!("plan mirrors mapping"),
            };
        }

        let label = self
            .urbanicity
            .map(|i| record[i].trim().to_string())
            .filter(|l| !l.is_empty() && !mapping.is_missing(l));
        let response = SurveyResponse {
            community: registry.get(community).id.clone(),
            year,
            metrics,
        };
        Ok((response, community, label))
    }
}

/// Take each community's most frequent data label (ties: lexicographically
/// smallest) in place of the registry's.
fn apply_urbanicity(
    mut registry: CommunityRegistry,
    counts: Vec<BTreeMap<String, usize>>,
) -> Result<(CommunityRegistry, Vec<UrbanicityObservation>), IngestError> {
    let mut observations = Vec::new();
    for (i, seen) in counts.into_iter().enumerate() {
        let Some((label, _)) = seen
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
        else {
            continue;
        };
        let label = label.clone();
        let registry_label = registry.get(i).urbanicity.to_string();
        let conflicts = seen
            .iter()
            .filter(|(l, _)| **l != label)
            .map(|(l, n)| (l.clone(), *n))
            .collect();
        observations.push(UrbanicityObservation {
            community: registry.get(i).id.to_string(),
            registry_label,
            data_label: label.clone(),
            conflicts,
        });
        registry = registry.with_urbanicity(i, UrbanicityLabel::new(label)?);
    }
    Ok((registry, observations))
}
