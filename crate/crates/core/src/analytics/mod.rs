//! Statistics behind every panel: grouped means, rankings, correlation
//! profiles, 2-D binning, yearly series, parallel coordinates and densities.
//!
//! All operations read an immutable [`AnalyticsSnapshot`]. Means pool
//! individual respondents; a region mean is not the average of its
//! communities' means.

mod binning;
mod correlation;
mod density;
mod summary;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

pub use binning::{Bin2d, MAX_BINS};
pub use correlation::{pearson, CorrelationEntry, CorrelationProfile, StrongestCorrelate};
pub use density::{
    linspace, silverman_bandwidth, Density, GaussianKde, MAX_GRID_POINTS, MIN_GRID_POINTS,
};
pub use summary::{
    Bar, BarChart, CommunityRank, CommunitySeries, MapPoint, ParallelAxis, ParallelCoordinates,
    Polyline, RankedCommunity, Ranking, YearCell,
};

use crate::domain::{
    CommunityRegistry, DomainError, MetricId, SurveyYear, YearFilter, SURVEY_YEARS,
};
use crate::exec::Execution;
use crate::ingestion::ResponseTable;

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error(transparent)]
    Selection(#[from] DomainError),
    #[error("no respondent in the selection has {metric} present")]
    EmptySelection { metric: MetricId },
    #[error("`{community}` has no {metric} data for the chosen years")]
    NoData { community: String, metric: MetricId },
    #[error("density needs at least two distinct values, got {n} value(s)")]
    DegenerateSample { n: usize },
    #[error("{0}")]
    BadParameter(String),
}

/// Mean of one metric over one selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryCell {
    pub mean: f64,
    /// Respondents with the metric present.
    pub n: usize,
    /// Respondents in the selection without it.
    pub n_missing: usize,
}

/// Two-decimal presentation string. Internal values are never rounded.
pub fn display2(value: f64) -> String {
    format!("{value:.2}")
}

impl Serialize for SummaryCell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SummaryCell", 4)?;
        st.serialize_field("mean", &self.mean)?;
        st.serialize_field("mean_display", &display2(self.mean))?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("n_missing", &self.n_missing)?;
        st.end()
    }
}

/// Running (sum, present, missing) for one metric.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Accumulator {
    pub sum: f64,
    pub n: usize,
    pub n_missing: usize,
}

impl Accumulator {
    pub fn merge(self, other: Accumulator) -> Accumulator {
        Accumulator {
            sum: self.sum + other.sum,
            n: self.n + other.n,
            n_missing: self.n_missing + other.n_missing,
        }
    }

    pub fn cell(self) -> Option<SummaryCell> {
        (self.n > 0).then(|| SummaryCell {
            mean: self.sum / self.n as f64,
            n: self.n,
            n_missing: self.n_missing,
        })
    }
}

#[derive(Debug, Clone, Default)]
struct MetricColumn {
    values: Vec<f64>,
    present: Vec<bool>,
}

/// Column-oriented, (community, year)-indexed survey data.
///
/// Rows are sorted by registry index then survey year, so each
/// (community, year) cell is one contiguous row range.
#[derive(Debug, Clone)]
pub struct AnalyticsSnapshot {
    registry: CommunityRegistry,
    offsets: Vec<usize>,
    columns: Vec<MetricColumn>,
    execution: Execution,
}

const YEARS: usize = SURVEY_YEARS.len();

impl AnalyticsSnapshot {
    pub fn from_table(table: &ResponseTable) -> Self {
        let registry = table.registry().clone();
        let cells = registry.len() * YEARS;

        let mut counts = vec![0usize; cells];
        let keyed: Vec<(usize, &crate::domain::SurveyResponse)> = table
            .responses()
            .iter()
            .map(|r| {
                let c = registry
                    .index_of(r.community.as_str())
                    .expect("table only holds registry communities");
                (c * YEARS + r.year.index(), r)
            })
            .collect();
        for (k, _) in &keyed {
            counts[*k] += 1;
        }
        let mut offsets = Vec::with_capacity(cells + 1);
        offsets.push(0);
        for c in &counts {
            offsets.push(offsets.last().unwrap() + c);
        }

        // Stable counting sort keeps file order within a cell.
        let mut order = vec![0usize; keyed.len()];
        let mut cursor = offsets[..cells].to_vec();
        for (i, (k, _)) in keyed.iter().enumerate() {
            order[cursor[*k]] = i;
            cursor[*k] += 1;
        }

        let execution = Execution::default();
        let columns = execution.map(&MetricId::ALL, |m| {
            let mut col = MetricColumn {
                values: Vec::with_capacity(order.len()),
                present: Vec::with_capacity(order.len()),
            };
            for &i in &order {
                let v = keyed[i].1.metric(*m);
                col.values.push(v.unwrap_or(0.0));
                col.present.push(v.is_some());
            }
            col
        });

        AnalyticsSnapshot {
            registry,
            offsets,
            columns,
            execution,
        }
    }

    /// Switch between rayon fan-out and a plain sequential loop. Results
    /// are identical either way.
    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn execution(&self) -> Execution {
        self.execution
    }

    pub fn registry(&self) -> &CommunityRegistry {
        &self.registry
    }

    pub fn total_respondents(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn is_empty(&self) -> bool {
        self.total_respondents() == 0
    }

    /// Respondents in one (community, year) cell.
    pub fn cell_count(&self, community: usize, year: SurveyYear) -> usize {
        self.rows(community, year.index()).len()
    }

    fn rows(&self, community: usize, year_index: usize) -> std::ops::Range<usize> {
        let k = community * YEARS + year_index;
        self.offsets[k]..self.offsets[k + 1]
    }

    /// Row ranges for a set of communities under a year filter, in
    /// (community, year) order.
    fn ranges<'a>(
        &'a self,
        communities: &'a [usize],
        years: YearFilter,
    ) -> impl Iterator<Item = std::ops::Range<usize>> + 'a {
        communities
            .iter()
            .flat_map(move |&c| years.year_indices().map(move |y| self.rows(c, y)))
    }

    fn column(&self, metric: MetricId) -> &MetricColumn {
        &self.columns[metric.index()]
    }

    /// Respondents in a selection, regardless of missingness.
    pub fn respondent_count(
        &self,
        sel: &crate::domain::Selection,
    ) -> Result<usize, AnalyticsError> {
        let communities = self.registry.resolve_indices(&sel.level)?;
        Ok(self.ranges(&communities, sel.years).map(|r| r.len()).sum())
    }

    fn accumulate_community(
        &self,
        metric: MetricId,
        community: usize,
        years: YearFilter,
    ) -> Accumulator {
        let col = self.column(metric);
        let mut acc = Accumulator::default();
        for y in years.year_indices() {
            for i in self.rows(community, y) {
                if col.present[i] {
                    acc.sum += col.values[i];
                    acc.n += 1;
                } else {
                    acc.n_missing += 1;
                }
            }
        }
        acc
    }

    /// Per-community partials folded in registry order.
    fn accumulate(
        &self,
        metric: MetricId,
        communities: &[usize],
        years: YearFilter,
    ) -> Accumulator {
        communities
            .iter()
            .map(|&c| self.accumulate_community(metric, c, years))
            .fold(Accumulator::default(), Accumulator::merge)
    }

    /// Present values of one metric, in row order.
    fn values(&self, metric: MetricId, communities: &[usize], years: YearFilter) -> Vec<f64> {
        let col = self.column(metric);
        self.ranges(communities, years)
            .flatten()
            .filter(|&i| col.present[i])
            .map(|i| col.values[i])
            .collect()
    }

    /// Respondents with both metrics present, as parallel vectors.
    fn pairs(
        &self,
        x: MetricId,
        y: MetricId,
        communities: &[usize],
        years: YearFilter,
    ) -> (Vec<f64>, Vec<f64>) {
        let (cx, cy) = (self.column(x), self.column(y));
        self.ranges(communities, years)
            .flatten()
            .filter(|&i| cx.present[i] && cy.present[i])
            .map(|i| (cx.values[i], cy.values[i]))
            .unzip()
    }
}
