use std::cmp::Ordering;

use serde::Serialize;

use super::{display2, Accumulator, AnalyticsError, AnalyticsSnapshot, SummaryCell};
use crate::domain::{
    CommunityId, MetricId, RegionId, Selection, SelectionLevel, SurveyYear, UrbanicityLabel,
    YearFilter, SURVEY_YEARS,
};

/// One row of the ordered dot plot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedCommunity {
    pub community: CommunityId,
    pub display_name: String,
    pub region: RegionId,
    pub urbanicity: UrbanicityLabel,
    #[serde(flatten)]
    pub summary: SummaryCell,
}

/// Communities ordered by mean, best first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ranking {
    pub metric: MetricId,
    pub years: YearFilter,
    pub entries: Vec<RankedCommunity>,
    /// Communities with no present value in the period.
    pub omitted: Vec<CommunityId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CommunityRank {
    pub rank_from_best: usize,
    pub rank_from_worst: usize,
    pub total_ranked: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bar {
    pub level: &'static str,
    pub label: String,
    pub selection: SelectionLevel,
    /// `None` when no respondent in the group has the metric present.
    pub summary: Option<SummaryCell>,
    /// Unweighted mean of member-community means, for comparison with the
    /// pooled `summary.mean`.
    pub community_average: Option<f64>,
    pub community_average_display: Option<String>,
}

/// The four widening comparison bars for a community.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarChart {
    pub community: CommunityId,
    pub metric: MetricId,
    pub years: YearFilter,
    pub bars: [Bar; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapPoint {
    pub community: CommunityId,
    pub display_name: String,
    pub latitude: f64,
    pub longitude: f64,
    /// All respondents in the period, regardless of metric missingness.
    pub n: usize,
    pub summary: Option<SummaryCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YearCell {
    pub year: SurveyYear,
    #[serde(flatten)]
    pub summary: SummaryCell,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommunitySeries {
    pub community: CommunityId,
    pub display_name: String,
    /// Pooled over all three years; the sort key.
    pub overall: Option<SummaryCell>,
    pub years: Vec<YearCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParallelAxis {
    pub metric: MetricId,
    pub overall_mean: Option<f64>,
    pub overall_mean_display: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polyline {
    pub community: CommunityId,
    pub display_name: String,
    /// One mean per axis, in axis order.
    pub values: Vec<Option<f64>>,
    pub values_display: Vec<Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParallelCoordinates {
    pub years: YearFilter,
    pub axes: Vec<ParallelAxis>,
    pub lines: Vec<Polyline>,
}

/// Descending by mean, ties ascending by display name.
fn by_mean_desc(a: (f64, &str), b: (f64, &str)) -> Ordering {
    b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1))
}

impl AnalyticsSnapshot {
    /// Pooled mean of `metric` over every respondent in the selection.
    pub fn mean_metric(
        &self,
        metric: MetricId,
        sel: &Selection,
    ) -> Result<SummaryCell, AnalyticsError> {
        let communities = self.registry.resolve_indices(&sel.level)?;
        self.accumulate(metric, &communities, sel.years)
            .cell()
            .ok_or(AnalyticsError::EmptySelection { metric })
    }

    fn community_partials(&self, metric: MetricId, years: YearFilter) -> Vec<Accumulator> {
        let idx: Vec<usize> = (0..self.registry.len()).collect();
        self.execution
            .map(&idx, |&c| self.accumulate_community(metric, c, years))
    }

    /// Ordered dot plot data.
    pub fn community_means(&self, metric: MetricId, years: YearFilter) -> Ranking {
        let partials = self.community_partials(metric, years);
        let mut entries = Vec::new();
        let mut omitted = Vec::new();
        for (c, acc) in partials.into_iter().enumerate() {
            let community = self.registry.get(c);
            match acc.cell() {
                Some(summary) => entries.push(RankedCommunity {
                    community: community.id.clone(),
                    display_name: community.display_name.clone(),
                    region: community.region,
                    urbanicity: community.urbanicity.clone(),
                    summary,
                }),
                None => omitted.push(community.id.clone()),
            }
        }
        entries.sort_by(|a, b| {
            by_mean_desc(
                (a.summary.mean, &a.display_name),
                (b.summary.mean, &b.display_name),
            )
        });
        Ranking {
            metric,
            years,
            entries,
            omitted,
        }
    }

    pub fn top_k(&self, metric: MetricId, years: YearFilter, k: usize) -> Vec<RankedCommunity> {
        let mut entries = self.community_means(metric, years).entries;
        entries.truncate(k);
        entries
    }

    pub fn rank_community(
        &self,
        metric: MetricId,
        years: YearFilter,
        community: &str,
    ) -> Result<CommunityRank, AnalyticsError> {
        if self.registry.index_of(community).is_none() {
            return Err(crate::domain::DomainError::UnknownCommunity(community.to_string()).into());
        }
        let ranking = self.community_means(metric, years);
        let total_ranked = ranking.entries.len();
        let pos = ranking
            .entries
            .iter()
            .position(|e| e.community.as_str() == community)
            .ok_or_else(|| AnalyticsError::NoData {
                community: community.to_string(),
                metric,
            })?;
        Ok(CommunityRank {
            rank_from_best: pos + 1,
            rank_from_worst: total_ranked - pos,
            total_ranked,
        })
    }

    /// Community, its urbanicity group, its region, and all communities.
    pub fn bar_chart_data(
        &self,
        metric: MetricId,
        years: YearFilter,
        community: &str,
    ) -> Result<BarChart, AnalyticsError> {
        let c = self
            .registry
            .index_of(community)
            .ok_or_else(|| crate::domain::DomainError::UnknownCommunity(community.to_string()))?;
        let info = self.registry.get(c);
        let levels = [
            (
                "community",
                info.display_name.clone(),
                SelectionLevel::Community(info.id.clone()),
            ),
            (
                "urbanicity",
                info.urbanicity.to_string(),
                SelectionLevel::Urbanicity(info.urbanicity.clone()),
            ),
            (
                "region",
                info.region.label().to_string(),
                SelectionLevel::Region(info.region),
            ),
            ("all", "All communities".to_string(), SelectionLevel::All),
        ];
        let partials = self.community_partials(metric, years);
        let bars = levels.map(|(level, label, selection)| {
            let members = self
                .registry
                .resolve_indices(&selection)
                .expect("levels come from the registry");
            let summary = members
                .iter()
                .map(|&m| partials[m])
                .fold(Accumulator::default(), Accumulator::merge)
                .cell();
            let means: Vec<f64> = members
                .iter()
                .filter_map(|&m| partials[m].cell())
                .map(|s| s.mean)
                .collect();
            let community_average =
                (!means.is_empty()).then(|| means.iter().sum::<f64>() / means.len() as f64);
            Bar {
                level,
                label,
                selection,
                summary,
                community_average,
                community_average_display: community_average.map(display2),
            }
        });
        Ok(BarChart {
            community: info.id.clone(),
            metric,
            years,
            bars,
        })
    }

    /// One record per registry community.
    pub fn map_summary(&self, metric: MetricId, years: YearFilter) -> Vec<MapPoint> {
        let partials = self.community_partials(metric, years);
        self.registry
            .communities()
            .iter()
            .zip(partials)
            .map(|(c, acc)| MapPoint {
                community: c.id.clone(),
                display_name: c.display_name.clone(),
                latitude: c.latitude,
                longitude: c.longitude,
                n: acc.n + acc.n_missing,
                summary: acc.cell(),
            })
            .collect()
    }

    /// Per-year means for each community, sorted ascending by the pooled
    /// all-years mean (communities without any data last).
    pub fn yearly_series(
        &self,
        metric: MetricId,
        communities: &[CommunityId],
    ) -> Result<Vec<CommunitySeries>, AnalyticsError> {
        if communities.is_empty() {
            return Err(AnalyticsError::BadParameter(
                "at least one community is required".into(),
            ));
        }
        let idx = communities
            .iter()
            .map(|id| {
                self.registry
                    .index_of(id.as_str())
                    .ok_or_else(|| crate::domain::DomainError::UnknownCommunity(id.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut series = self.execution.map(&idx, |&c| {
            let info = self.registry.get(c);
            let years = SURVEY_YEARS
                .iter()
                .filter_map(|&y| {
                    self.accumulate_community(metric, c, YearFilter::Single(y))
                        .cell()
                        .map(|summary| YearCell { year: y, summary })
                })
                .collect();
            CommunitySeries {
                community: info.id.clone(),
                display_name: info.display_name.clone(),
                overall: self
                    .accumulate_community(metric, c, YearFilter::AllYears)
                    .cell(),
                years,
            }
        });
        series.sort_by(|a, b| {
            let key = |s: &CommunitySeries| s.overall.map(|o| o.mean);
            match (key(a), key(b)) {
                (Some(x), Some(y)) => x.total_cmp(&y),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => Ordering::Equal,
            }
            .then_with(|| a.display_name.cmp(&b.display_name))
        });
        Ok(series)
    }

    /// Axes sorted high-to-low by the pooled all-communities mean, with
    /// Community Attachment appended as the last axis. Equal means keep
    /// canonical metric order.
    pub fn parallel_coordinates(&self, years: YearFilter) -> ParallelCoordinates {
        let all: Vec<usize> = (0..self.registry.len()).collect();
        let overall: Vec<Option<f64>> = self.execution.map(&MetricId::ALL, |m| {
            self.accumulate(*m, &all, years).cell().map(|c| c.mean)
        });
        let mut axes: Vec<ParallelAxis> = MetricId::predictors()
            .map(|metric| ParallelAxis {
                metric,
                overall_mean: overall[metric.index()],
                overall_mean_display: overall[metric.index()].map(display2),
            })
            .collect();
        // stable sort: ties fall back to canonical order
        axes.sort_by(|a, b| match (a.overall_mean, b.overall_mean) {
            (Some(x), Some(y)) => y.total_cmp(&x),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        });
        axes.push(ParallelAxis {
            metric: MetricId::TARGET,
            overall_mean: overall[MetricId::TARGET.index()],
            overall_mean_display: overall[MetricId::TARGET.index()].map(display2),
        });

        let lines = self.execution.map(&all, |&c| {
            let info = self.registry.get(c);
            let values: Vec<Option<f64>> = axes
                .iter()
                .map(|a| {
                    self.accumulate_community(a.metric, c, years)
                        .cell()
                        .map(|s| s.mean)
                })
                .collect();
            Polyline {
                community: info.id.clone(),
                display_name: info.display_name.clone(),
                values_display: values.iter().map(|v| v.map(display2)).collect(),
                values,
            }
        });
        ParallelCoordinates { years, axes, lines }
    }
}

impl Ranking {
    /// Two-decimal table rows: (display name, mean).
    pub fn display_rows(&self) -> Vec<(String, String)> {
        self.entries
            .iter()
            .map(|e| (e.display_name.clone(), display2(e.summary.mean)))
            .collect()
    }
}
