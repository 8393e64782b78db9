use std::collections::BTreeSet;

use attache_core::analytics::AnalyticsError;
use attache_core::domain::{CommunityId, MetricId};
use attache_core::{AnalyticsSnapshot, Selection, SelectionLevel, YearFilter};
use attache_oracle as oracle;
use attache_oracle::Row;

use crate::{
    close, close_opt, display_names, ensure, every_selection, every_year_filter, members,
    oracle_year, CheckResult,
};

const BIN_SHAPES: [(usize, usize); 5] = [(1, 1), (4, 4), (10, 10), (7, 13), (25, 40)];

/// Compare every public aggregate against the oracle on `rows`, which must
/// be the responses `snapshot` was built from.
pub fn oracle_equivalence(snapshot: &AnalyticsSnapshot, rows: &[Row]) -> CheckResult {
    let mut checks = 0;
    checks += mean_metric(snapshot, rows)?;
    checks += community_means(snapshot, rows)?;
    checks += bar_chart(snapshot, rows)?;
    checks += yearly_series(snapshot, rows)?;
    checks += bin2d(snapshot, rows)?;
    checks += correlation(snapshot, rows)?;
    Ok(checks)
}

fn mean_metric(snapshot: &AnalyticsSnapshot, rows: &[Row]) -> CheckResult {
    let registry = snapshot.registry();
    let mut checks = 0;
    for level in every_selection(registry) {
        let ids = members(registry, &level);
        for years in every_year_filter() {
            for metric in MetricId::ALL {
                let sel = Selection::new(level.clone(), years);
                let got = snapshot.mean_metric(metric, &sel);
                let (mean, n, missing) =
                    oracle::group_mean(rows, metric.index(), &ids, oracle_year(years));
                match (got, mean) {
                    (Ok(cell), Some(mean)) => {
                        ensure!(
                            close(cell.mean, mean) && cell.n == n && cell.n_missing == missing,
                            "mean_metric({metric}, {level:?}, {years}): engine {cell:?}, oracle ({mean}, {n}, {missing})"
                        );
                    }
                    (Err(AnalyticsError::EmptySelection { .. }), None) => {}
                    (got, want) => return Err(format!("mean_metric({metric}, {level:?}, {years}): engine {got:?}, oracle {want:?}")),
                }
                checks += 1;
            }
        }
    }
    Ok(checks)
}

fn community_means(snapshot: &AnalyticsSnapshot, rows: &[Row]) -> CheckResult {
    let names = display_names(snapshot.registry());
    let mut checks = 0;
    for years in every_year_filter() {
        for metric in MetricId::ALL {
            let ranking = snapshot.community_means(metric, years);
            let want = oracle::ordered_means(rows, metric.index(), &names, oracle_year(years));
            ensure!(
                ranking.entries.len() == want.len(),
                "community_means({metric}, {years}): {} entries, oracle {}",
                ranking.entries.len(),
                want.len()
            );
            for (pos, (entry, (id, mean))) in ranking.entries.iter().zip(&want).enumerate() {
                ensure!(
                    entry.community.as_str() == id && close(entry.summary.mean, *mean),
                    "community_means({metric}, {years}) position {pos}: engine ({}, {}), oracle ({id}, {mean})",
                    entry.community,
                    entry.summary.mean
                );
            }
            let ranked: BTreeSet<&str> = want.iter().map(|(id, _)| id.as_str()).collect();
            let omitted: BTreeSet<&str> = names
                .keys()
                .map(String::as_str)
                .filter(|id| !ranked.contains(id))
                .collect();
            let got_omitted: BTreeSet<&str> =
                ranking.omitted.iter().map(CommunityId::as_str).collect();
            ensure!(
                got_omitted == omitted,
                "community_means({metric}, {years}): omitted {got_omitted:?}, oracle {omitted:?}"
            );
            checks += want.len() + 1;
        }
    }
    Ok(checks)
}

fn bar_chart(snapshot: &AnalyticsSnapshot, rows: &[Row]) -> CheckResult {
    let registry = snapshot.registry();
    let mut checks = 0;
    for community in registry.communities() {
        let levels = [
            SelectionLevel::Community(community.id.clone()),
            SelectionLevel::Urbanicity(community.urbanicity.clone()),
            SelectionLevel::Region(community.region),
            SelectionLevel::All,
        ];
        let labels = [
            community.display_name.clone(),
            community.urbanicity.to_string(),
            community.region.label().to_string(),
            "All communities".to_string(),
        ];
        for years in every_year_filter() {
            for metric in MetricId::ALL {
                let chart = snapshot
                    .bar_chart_data(metric, years, community.id.as_str())
                    .map_err(|e| {
                        format!("bar_chart_data({}, {metric}, {years}): {e}", community.id)
                    })?;
                for ((bar, level), label) in chart.bars.iter().zip(&levels).zip(&labels) {
                    let ids = members(registry, level);
                    let (mean, n, missing) =
                        oracle::group_mean(rows, metric.index(), &ids, oracle_year(years));
                    let per_community: Vec<f64> = ids
                        .iter()
                        .filter_map(|id| {
                            let one: BTreeSet<String> = [id.clone()].into();
                            oracle::group_mean(rows, metric.index(), &one, oracle_year(years)).0
                        })
                        .collect();
                    let average = (!per_community.is_empty())
                        .then(|| per_community.iter().sum::<f64>() / per_community.len() as f64);
                    let where_ = format!(
                        "bar_chart_data({}, {metric}, {years}) {}",
                        community.id, bar.level
                    );
                    ensure!(
                        bar.selection == *level,
                        "{where_}: selection {:?}, expected {level:?}",
                        bar.selection
                    );
                    ensure!(
                        bar.label == *label,
                        "{where_}: label {:?}, expected {label:?}",
                        bar.label
                    );
                    ensure!(
                        close_opt(bar.summary.map(|s| s.mean), mean)
                            && bar.summary.map_or(0, |s| s.n) == n
                            && bar.summary.is_none_or(|s| s.n_missing == missing),
                        "{where_}: engine {:?}, oracle ({mean:?}, {n}, {missing})",
                        bar.summary
                    );
                    ensure!(
                        close_opt(bar.community_average, average),
                        "{where_}: community average {:?}, oracle {average:?}",
                        bar.community_average
                    );
                    checks += 1;
                }
            }
        }
    }
    Ok(checks)
}

fn yearly_series(snapshot: &AnalyticsSnapshot, rows: &[Row]) -> CheckResult {
    let registry = snapshot.registry();
    let ids: Vec<CommunityId> = registry
        .communities()
        .iter()
        .map(|c| c.id.clone())
        .collect();
    let mut checks = 0;
    for metric in MetricId::ALL {
        let series = snapshot
            .yearly_series(metric, &ids)
            .map_err(|e| format!("yearly_series({metric}): {e}"))?;

        // oracle ordering: ascending overall mean, communities without data
        // last, ties by display name
        let mut want: Vec<(Option<f64>, String, String)> = registry
            .communities()
            .iter()
            .map(|c| {
                let one: BTreeSet<String> = [c.id.to_string()].into();
                let overall = oracle::group_mean(rows, metric.index(), &one, None).0;
                (overall, c.display_name.clone(), c.id.to_string())
            })
            .collect();
        want.sort_by(|a, b| {
            let key = |v: Option<f64>| v.unwrap_or(f64::INFINITY);
            key(a.0)
                .partial_cmp(&key(b.0))
                .expect("finite means")
                .then_with(|| a.1.cmp(&b.1))
        });
        ensure!(
            series.len() == want.len(),
            "yearly_series({metric}): {} series",
            series.len()
        );
        for (s, (overall, _, id)) in series.iter().zip(&want) {
            ensure!(
                s.community.as_str() == id && close_opt(s.overall.map(|o| o.mean), *overall),
                "yearly_series({metric}): engine ({}, {:?}), oracle ({id}, {overall:?})",
                s.community,
                s.overall.map(|o| o.mean)
            );
            let one: BTreeSet<String> = [id.clone()].into();
            let expected: Vec<(u16, f64, usize)> = [2008, 2009, 2010]
                .into_iter()
                .filter_map(
                    |y| match oracle::group_mean(rows, metric.index(), &one, Some(y)) {
                        (Some(m), n, _) => Some((y, m, n)),
                        _ => None,
                    },
                )
                .collect();
            ensure!(
                s.years.len() == expected.len(),
                "yearly_series({metric}, {id}): {} years",
                s.years.len()
            );
            for (cell, (y, m, n)) in s.years.iter().zip(&expected) {
                ensure!(
                    cell.year.get() == *y && close(cell.summary.mean, *m) && cell.summary.n == *n,
                    "yearly_series({metric}, {id}) {y}: engine {cell:?}, oracle ({m}, {n})"
                );
                checks += 1;
            }
        }
    }
    Ok(checks)
}

fn bin2d(snapshot: &AnalyticsSnapshot, rows: &[Row]) -> CheckResult {
    let registry = snapshot.registry();
    let mut selections = vec![SelectionLevel::All];
    selections.extend(
        every_selection(registry)
            .into_iter()
            .filter(|l| matches!(l, SelectionLevel::Region(_))),
    );
    selections.extend(
        registry
            .communities()
            .iter()
            .take(4)
            .map(|c| SelectionLevel::Community(c.id.clone())),
    );
    let mut pairs: Vec<(MetricId, MetricId)> = MetricId::predictors()
        .map(|m| (m, MetricId::TARGET))
        .collect();
    pairs.push((MetricId::Economy, MetricId::Safety));
    pairs.push((MetricId::Openness, MetricId::Openness));

    let mut checks = 0;
    for level in &selections {
        let ids = members(registry, level);
        for years in [YearFilter::AllYears, every_year_filter()[2]] {
            for &(x, y) in &pairs {
                let data =
                    oracle::complete_pairs(rows, x.index(), y.index(), &ids, oracle_year(years));
                for (nx, ny) in BIN_SHAPES {
                    let sel = Selection::new(level.clone(), years);
                    let got = snapshot.bin2d(x, y, &sel, nx, ny);
                    let where_ = format!("bin2d({x}, {y}, {level:?}, {years}, {nx}x{ny})");
                    if data.is_empty() {
                        ensure!(
                            matches!(got, Err(AnalyticsError::EmptySelection { .. })),
                            "{where_}: expected empty selection"
                        );
                        continue;
                    }
                    let got = got.map_err(|e| format!("{where_}: {e}"))?;
                    let (xs, ys) = (x.scale(), y.scale());
                    let x_edges = oracle::edges(xs.min, xs.max, nx);
                    let y_edges = oracle::edges(ys.min, ys.max, ny);
                    ensure!(
                        got.x_edges.iter().zip(&x_edges).all(|(a, b)| close(*a, *b))
                            && got.y_edges.iter().zip(&y_edges).all(|(a, b)| close(*a, *b)),
                        "{where_}: edges differ"
                    );
                    let want = oracle::bin2d(&data, &x_edges, &y_edges);
                    ensure!(got.counts == want, "{where_}: counts differ from oracle");
                    ensure!(
                        got.total == data.len(),
                        "{where_}: total {} vs {}",
                        got.total,
                        data.len()
                    );
                    checks += 1;
                }
            }
        }
    }
    Ok(checks)
}

fn correlation(snapshot: &AnalyticsSnapshot, rows: &[Row]) -> CheckResult {
    let registry = snapshot.registry();
    let mut checks = 0;
    for level in every_selection(registry) {
        let ids = members(registry, &level);
        for years in every_year_filter() {
            let profile = snapshot
                .correlation_profile(&Selection::new(level.clone(), years))
                .map_err(|e| format!("correlation_profile({level:?}, {years}): {e}"))?;
            ensure!(
                profile.entries.len() == 10,
                "correlation_profile: {} entries",
                profile.entries.len()
            );
            for (entry, metric) in profile.entries.iter().zip(MetricId::predictors()) {
                let data = oracle::complete_pairs(
                    rows,
                    metric.index(),
                    MetricId::TARGET.index(),
                    &ids,
                    oracle_year(years),
                );
                let want = oracle::pearson(&data);
                ensure!(
                    entry.metric == metric && entry.n_pairs == data.len() && close_opt(entry.r, want),
                    "correlation_profile({level:?}, {years}) {metric}: engine ({:?}, {}), oracle ({want:?}, {})",
                    entry.r,
                    entry.n_pairs,
                    data.len()
                );
                checks += 1;
            }
        }
    }
    Ok(checks)
}
