//! Acceptance run: one PASS / FAIL / SKIPPED line per criterion.
//!
//! The real-data check runs when `ATTACHE_SOTC_DATA` and
//! `ATTACHE_SOTC_MAPPING` (optionally `ATTACHE_SOTC_REGISTRY`) point at the
//! public survey export.

mod common;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use axum::http::StatusCode;

use attache_conformance::{
    derive_invariants, invariants, kde_normalization, kde_pointwise, oracle_equivalence,
    oracle_rows,
};
use attache_core::domain::MetricId;
use attache_core::fixture::{generate_table, FixtureSpec};
use attache_core::ingestion::build_snapshot;
use attache_core::{AnalyticsSnapshot, YearFilter};
use attache_service::{load, DataSource, RouterOptions};
use common::*;

enum Outcome {
    Pass(String),
    Fail(String),
    Skipped(String),
}

fn report(name: &str, outcome: &Outcome) {
    let (tag, detail) = match outcome {
        Outcome::Pass(d) => ("PASS", d),
        Outcome::Fail(d) => ("FAIL", d),
        Outcome::Skipped(d) => ("SKIPPED", d),
    };
    println!("{tag:<8}{name}: {detail}");
}

fn from_result(r: Result<String, String>) -> Outcome {
    match r {
        Ok(d) => Outcome::Pass(d),
        Err(d) => Outcome::Fail(d),
    }
}

fn oracle_check() -> Result<String, String> {
    let start = Instant::now();
    let table = fixture_table(&FixtureSpec::default());
    let snapshot = build_snapshot(&table);
    let checks = oracle_equivalence(&snapshot, &oracle_rows(table.responses()))?;
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(10) {
        return Err(format!(
            "{checks} comparisons agree but took {elapsed:.2?} (limit 10 s)"
        ));
    }
    Ok(format!(
        "{checks} comparisons on {} rows agree to 1e-12 in {elapsed:.2?}",
        table.responses().len()
    ))
}

fn invariant_check() -> Result<String, String> {
    let mut checks = 0;
    for seed in 0..100 {
        checks += invariants(seed).map_err(|e| format!("fixture seed {seed}: {e}"))?;
    }
    checks += derive_invariants(7, 5_000)?;
    Ok(format!("100 randomized fixtures, {checks} checks"))
}

fn kde_check() -> Result<String, String> {
    let table = fixture_table(&FixtureSpec::default());
    let (lo, hi) = kde_normalization(table.responses())?;
    if !(0.99..=1.01).contains(&lo) || !(0.99..=1.01).contains(&hi) {
        return Err(format!(
            "integrals span [{lo:.6}, {hi:.6}], outside [0.99, 1.01]"
        ));
    }
    let mut worst: f64 = 0.0;
    for metric in [
        MetricId::CommunityAttachment,
        MetricId::Openness,
        MetricId::Safety,
    ] {
        worst = worst.max(kde_pointwise(table.responses(), metric, 50)?);
    }
    Ok(format!(
        "integrals in [{lo:.6}, {hi:.6}]; 50-point pointwise max error {worst:.1e}"
    ))
}

fn within(got: Option<f64>, want: f64) -> bool {
    // compare after two-decimal rounding
    got.is_some_and(|g| ((g * 100.0).round() / 100.0 - want).abs() <= 0.005 + 1e-9)
}

fn real_data(snapshot: &AnalyticsSnapshot) -> Result<String, String> {
    let mut failures = Vec::new();
    let years2010: YearFilter = "2010".parse().unwrap();

    let top: Vec<f64> = snapshot
        .top_k(MetricId::Openness, YearFilter::AllYears, 5)
        .iter()
        .map(|e| e.summary.mean)
        .collect();
    let want = [1.95, 1.88, 1.88, 1.87, 1.84];
    if top.len() != 5 || !top.iter().zip(want).all(|(g, w)| within(Some(*g), w)) {
        failures.push(format!("openness top 5 {top:.3?}, expected {want:?}"));
    }

    for (id, want) in [
        ("detroit-mi", [1.26, 1.25, 1.37]),
        ("state-college-pa", [1.65, 1.59, 1.72]),
    ] {
        let cid = attache_core::domain::CommunityId::new(id).unwrap();
        let series = snapshot
            .yearly_series(MetricId::Economy, &[cid])
            .map_err(|e| e.to_string())?;
        let got: Vec<Option<f64>> = [2008u16, 2009, 2010]
            .iter()
            .map(|y| {
                series[0]
                    .years
                    .iter()
                    .find(|c| c.year.get() == *y)
                    .map(|c| c.summary.mean)
            })
            .collect();
        if !got.iter().zip(want).all(|(g, w)| within(*g, w)) {
            failures.push(format!("{id} economy {got:.3?}, expected {want:?}"));
        }
    }

    let rank = |id: &str| {
        snapshot
            .rank_community(MetricId::Safety, years2010, id)
            .ok()
    };
    match rank("macon-ga") {
        Some(r) if r.rank_from_worst == 1 => {}
        r => failures.push(format!("macon-ga safety 2010 rank {r:?}, expected worst")),
    }
    match rank("columbus-ga") {
        Some(r) if r.rank_from_worst == 4 => {}
        r => failures.push(format!(
            "columbus-ga safety 2010 rank {r:?}, expected 4th worst"
        )),
    }
    match rank("biloxi-ms") {
        Some(r) if r.rank_from_best == 8 => {}
        r => failures.push(format!(
            "biloxi-ms safety 2010 rank {r:?}, expected 8th best"
        )),
    }

    let argmax = snapshot
        .strongest_correlates(YearFilter::AllYears)
        .iter()
        .filter(|s| {
            s.strongest
                .as_ref()
                .is_some_and(|e| e.metric == MetricId::SocialOfferings)
        })
        .count();
    if argmax != 23 {
        failures.push(format!(
            "social_offerings is the strongest correlate for {argmax} communities, expected 23"
        ));
    }

    if failures.is_empty() {
        Ok(format!(
            "{} respondents; tables, ranks and argmax count reproduce",
            snapshot.total_respondents()
        ))
    } else {
        Err(failures.join("; "))
    }
}

fn real_data_check() -> Outcome {
    let (Some(data), Some(mapping)) = (
        std::env::var_os("ATTACHE_SOTC_DATA"),
        std::env::var_os("ATTACHE_SOTC_MAPPING"),
    ) else {
        return Outcome::Skipped("ATTACHE_SOTC_DATA / ATTACHE_SOTC_MAPPING not set".into());
    };
    let source = DataSource {
        data_path: PathBuf::from(data),
        mapping_path: PathBuf::from(mapping),
        registry_path: std::env::var_os("ATTACHE_SOTC_REGISTRY").map(PathBuf::from),
    };
    match load(&source) {
        Ok(dataset) => from_result(real_data(&dataset.snapshot)),
        Err(e) => Outcome::Fail(format!("could not load the export: {e:#}")),
    }
}

async fn api_check() -> Result<String, String> {
    let schemas = Schemas::load();
    let (app, _) = fixture_app();
    let sweep = request_sweep();
    let mut endpoints = std::collections::BTreeSet::new();
    for uri in &sweep {
        let (status, first) = get_raw(&app, uri).await;
        if status != StatusCode::OK {
            return Err(format!("{uri}: status {status}"));
        }
        let body: serde_json::Value =
            serde_json::from_slice(&first).map_err(|e| format!("{uri}: {e}"))?;
        schemas
            .check(endpoint(uri), &body)
            .map_err(|e| format!("{uri}: {e}"))?;
        let (_, second) = get_raw(&app, uri).await;
        if first != second {
            return Err(format!("{uri}: repeated request returned a different body"));
        }
        endpoints.insert(endpoint(uri).to_string());
    }
    let (_, missing) = get_json(&app, "/api/map?metric=nope").await;
    schemas
        .check("error", &missing)
        .map_err(|e| format!("error body: {e}"))?;

    let big = generate_table(&FixtureSpec::new(43, 43_000));
    let (app, _) = app_for(&big, &RouterOptions::default());
    let mut worst = (Duration::ZERO, String::new());
    for uri in &sweep {
        let start = Instant::now();
        let (status, _) = get_raw(&app, uri).await;
        let elapsed = start.elapsed();
        if status != StatusCode::OK {
            return Err(format!("{uri} on 43,000 rows: status {status}"));
        }
        if elapsed > worst.0 {
            worst = (elapsed, uri.clone());
        }
    }
    if worst.0 >= Duration::from_millis(100) {
        return Err(format!(
            "{} took {:.2?} on 43,000 rows (limit 100 ms)",
            worst.1, worst.0
        ));
    }
    Ok(format!(
        "{} requests over {} endpoints validate and replay byte-identically; slowest at 43,000 rows {:.2?} ({})",
        sweep.len(),
        endpoints.len(),
        worst.0,
        worst.1
    ))
}

fn main() -> ExitCode {
    let runtime = tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .unwrap();
    let outcomes = [
        ("oracle equivalence", from_result(oracle_check())),
        ("invariant suite", from_result(invariant_check())),
        ("kde checks", from_result(kde_check())),
        ("real-data reproduction", real_data_check()),
        (
            "api conformance",
            from_result(runtime.block_on(api_check())),
        ),
    ];
    for (name, outcome) in &outcomes {
        report(name, outcome);
    }
    if outcomes.iter().any(|(_, o)| matches!(o, Outcome::Fail(_))) {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
