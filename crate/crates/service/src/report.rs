//! Delimiter-separated reproductions of the published tables, plus the
//! `validate` diagnostics.

use std::fmt::Write as _;
use std::io::Write;

use clap::ValueEnum;

use attache_core::analytics::display2;
use attache_core::domain::{CommunityId, MetricId, RegionId, SURVEY_YEARS};
use attache_core::ingestion::ResponseTable;
use attache_core::{AnalyticsError, AnalyticsSnapshot, Selection, SelectionLevel, YearFilter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ReportKind {
    /// Top five communities by Openness, all years.
    OpennessTop5,
    /// Economy by year for the Rust Belt, sorted by the all-years mean.
    RustbeltEconomy,
    /// Safety rank of each Deep South community in each year.
    SafetyRanks,
    /// Per community, the predictor most correlated with attachment.
    CorrelationArgmax,
}

/// A header plus string rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn cells<const N: usize>(items: [&str; N]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn opt2(v: Option<f64>) -> String {
    v.map(display2).unwrap_or_default()
}

fn region_members(snapshot: &AnalyticsSnapshot, region: RegionId) -> Vec<CommunityId> {
    snapshot
        .registry()
        .communities()
        .iter()
        .filter(|c| c.region == region)
        .map(|c| c.id.clone())
        .collect()
}

pub fn build_report(
    snapshot: &AnalyticsSnapshot,
    kind: ReportKind,
) -> Result<Report, AnalyticsError> {
    match kind {
        ReportKind::OpennessTop5 => {
            let rows = snapshot
                .top_k(MetricId::Openness, YearFilter::AllYears, 5)
                .into_iter()
                .map(|e| {
                    vec![
                        e.display_name,
                        e.region.label().to_string(),
                        e.urbanicity.to_string(),
                        display2(e.summary.mean),
                    ]
                })
                .collect();
            Ok(Report {
                header: cells(["community", "region", "urbanicity", "openness"]),
                rows,
            })
        }
        ReportKind::RustbeltEconomy => {
            let series = snapshot.yearly_series(
                MetricId::Economy,
                &region_members(snapshot, RegionId::RustBelt),
            )?;
            let rows = series
                .into_iter()
                .map(|s| {
                    let mut row = vec![s.display_name];
                    row.extend(SURVEY_YEARS.iter().map(|&y| {
                        opt2(s.years.iter().find(|c| c.year == y).map(|c| c.summary.mean))
                    }));
                    row
                })
                .collect();
            Ok(Report {
                header: cells(["community", "2008", "2009", "2010"]),
                rows,
            })
        }
        ReportKind::SafetyRanks => {
            let mut rows = Vec::new();
            for &year in &SURVEY_YEARS {
                let years = YearFilter::Single(year);
                for id in region_members(snapshot, RegionId::DeepSouth) {
                    let name = snapshot
                        .registry()
                        .find(id.as_str())
                        .map(|c| c.display_name.clone())
                        .unwrap_or_default();
                    let mean = snapshot
                        .mean_metric(
                            MetricId::Safety,
                            &Selection::new(SelectionLevel::Community(id.clone()), years),
                        )
                        .ok()
                        .map(|c| c.mean);
                    let rank = snapshot
                        .rank_community(MetricId::Safety, years, id.as_str())
                        .ok();
                    rows.push(vec![
                        year.to_string(),
                        name,
                        opt2(mean),
                        rank.map(|r| r.rank_from_best.to_string())
                            .unwrap_or_default(),
                        rank.map(|r| r.rank_from_worst.to_string())
                            .unwrap_or_default(),
                        rank.map(|r| r.total_ranked.to_string()).unwrap_or_default(),
                    ]);
                }
            }
            Ok(Report {
                header: cells([
                    "year",
                    "community",
                    "safety",
                    "rank_from_best",
                    "rank_from_worst",
                    "ranked",
                ]),
                rows,
            })
        }
        ReportKind::CorrelationArgmax => {
            let rows = snapshot
                .strongest_correlates(YearFilter::AllYears)
                .into_iter()
                .map(|s| {
                    let (metric, r, n) = match s.strongest {
                        Some(e) => (
                            e.metric.as_str().to_string(),
                            opt2(e.r),
                            e.n_pairs.to_string(),
                        ),
                        None => Default::default(),
                    };
                    vec![s.display_name, metric, r, n]
                })
                .collect();
            Ok(Report {
                header: cells(["community", "metric", "r", "n_pairs"]),
                rows,
            })
        }
    }
}

pub fn write_report<W: Write>(report: &Report, out: W, delimiter: u8) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .from_writer(out);
    w.write_record(&report.header)?;
    for row in &report.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Ingestion counts and registry diagnostics for `validate`.
pub fn validation_summary(table: &ResponseTable, snapshot: &AnalyticsSnapshot) -> String {
    let p = table.provenance();
    let mut s = String::new();
    let _ = writeln!(
        s,
        "source sha256: {}",
        p.source_digest.as_deref().unwrap_or("-")
    );
    let _ = writeln!(s, "rows read: {}", p.rows_read);
    let _ = writeln!(s, "accepted: {}", p.accepted);
    let _ = writeln!(s, "rejected: {}", p.rejected);
    for (reason, n) in &p.rejections {
        let _ = writeln!(s, "  {}: {n}", reason.as_str());
    }

    let _ = writeln!(s, "\nrespondents by community (2008 / 2009 / 2010):");
    let registry = snapshot.registry();
    for (i, c) in registry.communities().iter().enumerate() {
        let counts: Vec<String> = SURVEY_YEARS
            .iter()
            .map(|&y| snapshot.cell_count(i, y).to_string())
            .collect();
        let flag = if c.inferred {
            "  [region inferred]"
        } else {
            ""
        };
        let _ = writeln!(
            s,
            "  {:<22} {:>6} / {:>6} / {:>6}{flag}",
            c.id.as_str(),
            counts[0],
            counts[1],
            counts[2]
        );
    }
    let empty: Vec<&str> = registry
        .communities()
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            SURVEY_YEARS
                .iter()
                .all(|&y| snapshot.cell_count(*i, y) == 0)
        })
        .map(|(_, c)| c.id.as_str())
        .collect();
    if !empty.is_empty() {
        let _ = writeln!(s, "communities without respondents: {}", empty.join(", "));
    }

    if !table.urbanicity_observations().is_empty() {
        let _ = writeln!(s, "\nurbanicity read from data:");
        for o in table.urbanicity_observations() {
            let _ = write!(s, "  {}: {}", o.community, o.data_label);
            if o.registry_label != o.data_label {
                let _ = write!(s, " (registry: {})", o.registry_label);
            }
            for (label, n) in &o.conflicts {
                let _ = write!(s, "; also {label} x{n}");
            }
            s.push('\n');
        }
    }

    let _ = writeln!(
        s,
        "\nregion means, pooled vs community-averaged (all years):"
    );
    for region in RegionId::ALL {
        let Some(first) = region_members(snapshot, region).into_iter().next() else {
            continue;
        };
        let _ = write!(s, "  {:<12}", region.as_str());
        for metric in MetricId::ALL {
            let bars = snapshot.bar_chart_data(metric, YearFilter::AllYears, first.as_str());
            let bar = bars.as_ref().ok().map(|b| &b.bars[2]);
            let pooled = bar.and_then(|b| b.summary).map(|c| c.mean);
            let averaged = bar.and_then(|b| b.community_average);
            let _ = write!(
                s,
                " {}={}/{}",
                metric.as_str(),
                opt2(pooled),
                opt2(averaged)
            );
        }
        s.push('\n');
    }
    s
}
