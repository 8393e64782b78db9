use std::f64::consts::PI;

use serde::Serialize;

use super::{AnalyticsError, AnalyticsSnapshot};
use crate::domain::{MetricId, Selection, SelectionLevel, YearFilter};
use crate::exec::Execution;

pub const MIN_GRID_POINTS: usize = 16;
pub const MAX_GRID_POINTS: usize = 4096;

/// Silverman's rule of thumb, `1.06 * sd * n^(-1/5)`, with the n-1 sample
/// standard deviation.
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    1.06 * var.sqrt() * n.powf(-0.2)
}

/// Gaussian kernel density estimate.
///
/// Survey metrics take few distinct values, so the sample is stored as
/// (value, multiplicity) pairs and each evaluation sums over distinct values.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianKde {
    support: Vec<(f64, f64)>,
    n: usize,
    bandwidth: f64,
}

impl GaussianKde {
    /// Bandwidth by Silverman's rule.
    pub fn new(values: &[f64]) -> Result<Self, AnalyticsError> {
        let n = values.len();
        if n < 2 || values.iter().all(|&v| v == values[0]) {
            return Err(AnalyticsError::DegenerateSample { n });
        }
        Self::with_bandwidth(values, silverman_bandwidth(values))
    }

    pub fn with_bandwidth(values: &[f64], bandwidth: f64) -> Result<Self, AnalyticsError> {
        if values.is_empty() {
            return Err(AnalyticsError::DegenerateSample { n: 0 });
        }
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(AnalyticsError::BadParameter(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut support: Vec<(f64, f64)> = Vec::new();
        for v in sorted {
            match support.last_mut() {
                Some((last, count)) if *last == v => *count += 1.0,
                _ => support.push((v, 1.0)),
            }
        }
        Ok(GaussianKde {
            support,
            n: values.len(),
            bandwidth,
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let norm = 1.0 / (self.n as f64 * h * (2.0 * PI).sqrt());
        let sum: f64 = self
            .support
            .iter()
            .map(|&(v, w)| {
                let u = (x - v) / h;
                w * (-0.5 * u * u).exp()
            })
            .sum();
        sum * norm
    }

    pub fn evaluate_grid(&self, grid: &[f64], execution: Execution) -> Vec<f64> {
        let mut out = vec![0.0; grid.len()];
        execution.fill_chunks(&mut out, 64, |start, chunk| {
            for (j, slot) in chunk.iter_mut().enumerate() {
                *slot = self.evaluate(grid[start + j]);
            }
        });
        out
    }
}

/// Density curve of one metric over its scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Density {
    pub metric: MetricId,
    pub selection: SelectionLevel,
    pub years: YearFilter,
    pub bandwidth: f64,
    pub n: usize,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
}

/// `points` equally spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi - lo) / (points - 1) as f64;
    let mut g: Vec<f64> = (0..points).map(|i| lo + step * i as f64).collect();
    g[points - 1] = hi;
    g
}

impl AnalyticsSnapshot {
    pub fn density_estimate(
        &self,
        metric: MetricId,
        sel: &Selection,
        grid_points: usize,
    ) -> Result<Density, AnalyticsError> {
        if !(MIN_GRID_POINTS..=MAX_GRID_POINTS).contains(&grid_points) {
            return Err(AnalyticsError::BadParameter(format!(
                "points must be in {MIN_GRID_POINTS}..={MAX_GRID_POINTS}, got {grid_points}"
            )));
        }
        let communities = self.registry.resolve_indices(&sel.level)?;
        let values = self.values(metric, &communities, sel.years);
        let kde = GaussianKde::new(&values)?;
        let scale = metric.scale();
        let grid = linspace(scale.min, scale.max, grid_points);
        let density = kde.evaluate_grid(&grid, self.execution);
        Ok(Density {
            metric,
            selection: sel.level.clone(),
            years: sel.years,
            bandwidth: kde.bandwidth(),
            n: values.len(),
            grid,
            density,
        })
    }
}
