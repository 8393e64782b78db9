//! Checks that compare the analytics engine against the brute-force oracles
//! and exercise its invariants on generated fixtures.
//!
//! Every check returns the number of comparisons it made, or a description
//! of the first disagreement.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod density;
mod equivalence;
mod invariants;

use std::collections::{BTreeMap, BTreeSet};

use attache_core::domain::{CommunityRegistry, SurveyResponse, SURVEY_YEARS};
use attache_core::{SelectionLevel, YearFilter};
use attache_oracle::Row;

pub use density::{kde_normalization, kde_pointwise};
pub use equivalence::oracle_equivalence;
pub use invariants::{derive_invariants, invariants};

pub type CheckResult = Result<usize, String>;

pub const TOLERANCE: f64 = 1e-12;

pub fn oracle_rows(responses: &[SurveyResponse]) -> Vec<Row> {
    responses
        .iter()
        .map(|r| Row {
            community: r.community.to_string(),
            year: r.year.get(),
            metrics: r.metrics.to_vec(),
        })
        .collect()
}

/// Community id -> display name.
pub fn display_names(registry: &CommunityRegistry) -> BTreeMap<String, String> {
    registry
        .communities()
        .iter()
        .map(|c| (c.id.to_string(), c.display_name.clone()))
        .collect()
}

/// Members of a selection, read straight off the registry rows.
pub fn members(registry: &CommunityRegistry, level: &SelectionLevel) -> BTreeSet<String> {
    registry
        .communities()
        .iter()
        .filter(|c| match level {
            SelectionLevel::All => true,
            SelectionLevel::Community(id) => c.id == *id,
            SelectionLevel::Region(r) => c.region == *r,
            SelectionLevel::Urbanicity(u) => c.urbanicity == *u,
        })
        .map(|c| c.id.to_string())
        .collect()
}

/// All, every region, every urbanicity label and every community.
pub fn every_selection(registry: &CommunityRegistry) -> Vec<SelectionLevel> {
    let mut out = vec![SelectionLevel::All];
    let regions: BTreeSet<_> = registry.communities().iter().map(|c| c.region).collect();
    out.extend(regions.into_iter().map(SelectionLevel::Region));
    let labels: BTreeSet<_> = registry
        .communities()
        .iter()
        .map(|c| c.urbanicity.clone())
        .collect();
    out.extend(labels.into_iter().map(SelectionLevel::Urbanicity));
    out.extend(
        registry
            .communities()
            .iter()
            .map(|c| SelectionLevel::Community(c.id.clone())),
    );
    out
}

pub fn every_year_filter() -> Vec<YearFilter> {
    let mut out = vec![YearFilter::AllYears];
    out.extend(SURVEY_YEARS.iter().map(|&y| YearFilter::Single(y)));
    out
}

pub(crate) fn oracle_year(years: YearFilter) -> Option<u16> {
    match years {
        YearFilter::AllYears => None,
        YearFilter::Single(y) => Some(y.get()),
    }
}

pub(crate) fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOLERANCE
}

pub(crate) fn close_opt(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => close(a, b),
        (None, None) => true,
        _ => false,
    }
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}
pub(crate) use ensure;
