use serde::Serialize;

use super::{AnalyticsError, AnalyticsSnapshot};
use crate::domain::{MetricId, Scale, Selection, SelectionLevel, YearFilter};

pub const MAX_BINS: usize = 1000;

/// Equal-width 2-D histogram over two metrics' full scales.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bin2d {
    pub x: MetricId,
    pub y: MetricId,
    pub selection: SelectionLevel,
    pub years: YearFilter,
    /// `nx + 1` edges spanning the x metric's scale.
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    /// `counts[i][j]`: respondents in x bin `i` and y bin `j`.
    pub counts: Vec<Vec<usize>>,
    /// Pairwise-complete respondents binned.
    pub total: usize,
}

/// Edges `min + width * i / bins`, with the last edge pinned to `max`.
pub(crate) fn edges(scale: Scale, bins: usize) -> Vec<f64> {
    let mut e: Vec<f64> = (0..=bins)
        .map(|i| scale.min + scale.width() * i as f64 / bins as f64)
        .collect();
    e[bins] = scale.max;
    e
}

/// Bin index such that `edges[i] <= v < edges[i + 1]`, last bin closed on the
/// right. `v` must lie on the scale.
pub(crate) fn bin_index(edges: &[f64], v: f64) -> usize {
    let bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[bins]);
    let guess = (((v - lo) / (hi - lo)) * bins as f64).floor();
    let mut i = if guess.is_finite() && guess > 0.0 {
        (guess as usize).min(bins - 1)
    } else {
        0
    };
    // The arithmetic guess can be one off near an edge; settle against the
    // edges themselves.
    while i > 0 && v < edges[i] {
        i -= 1;
    }
    while i + 1 < bins && v >= edges[i + 1] {
        i += 1;
    }
    i
}

impl AnalyticsSnapshot {
    pub fn bin2d(
        &self,
        x: MetricId,
        y: MetricId,
        sel: &Selection,
        nx: usize,
        ny: usize,
    ) -> Result<Bin2d, AnalyticsError> {
        for (name, n) in [("nx", nx), ("ny", ny)] {
            if !(1..=MAX_BINS).contains(&n) {
                return Err(AnalyticsError::BadParameter(format!(
                    "{name} must be in 1..={MAX_BINS}, got {n}"
                )));
            }
        }
        let communities = self.registry.resolve_indices(&sel.level)?;
        let (xs, ys) = self.pairs(x, y, &communities, sel.years);
        if xs.is_empty() {
            return Err(AnalyticsError::EmptySelection { metric: x });
        }
        let x_edges = edges(x.scale(), nx);
        let y_edges = edges(y.scale(), ny);
        let mut counts = vec![vec![0usize; ny]; nx];
        for (&vx, &vy) in xs.iter().zip(&ys) {
            counts[bin_index(&x_edges, vx)][bin_index(&y_edges, vy)] += 1;
        }
        Ok(Bin2d {
            x,
            y,
            selection: sel.level.clone(),
            years: sel.years,
            x_edges,
            y_edges,
            total: xs.len(),
            counts,
        })
    }
}
