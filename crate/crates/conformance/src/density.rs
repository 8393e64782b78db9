use attache_core::analytics::{linspace, GaussianKde};
use attache_core::domain::{MetricId, SurveyResponse};
use attache_core::exec::Execution;
use attache_oracle as oracle;

use crate::ensure;

pub const POINTWISE_TOLERANCE: f64 = 1e-9;

/// Trapezoid integral of each metric's all-communities density over its
/// scale widened by three bandwidths. Returns (min, max) over metrics.
pub fn kde_normalization(responses: &[SurveyResponse]) -> Result<(f64, f64), String> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for metric in MetricId::ALL {
        let values: Vec<f64> = responses.iter().filter_map(|r| r.metric(metric)).collect();
        let kde = GaussianKde::new(&values).map_err(|e| format!("{metric}: {e}"))?;
        let h = kde.bandwidth();
        let scale = metric.scale();
        let grid = linspace(scale.min - 3.0 * h, scale.max + 3.0 * h, 4001);
        let density = kde.evaluate_grid(&grid, Execution::default());
        let area = oracle::trapezoid(&grid, &density);
        lo = lo.min(area);
        hi = hi.max(area);
    }
    Ok((lo, hi))
}

/// Engine KDE against the direct-sum oracle on the first `n` present values
/// of `metric`. Returns the largest absolute pointwise difference.
pub fn kde_pointwise(
    responses: &[SurveyResponse],
    metric: MetricId,
    n: usize,
) -> Result<f64, String> {
    let sample: Vec<f64> = responses
        .iter()
        .filter_map(|r| r.metric(metric))
        .take(n)
        .collect();
    ensure!(
        sample.len() == n,
        "only {} {metric} values available",
        sample.len()
    );
    let kde = GaussianKde::new(&sample).map_err(|e| e.to_string())?;
    let h = oracle::silverman(&sample);
    ensure!(
        (kde.bandwidth() - h).abs() <= 1e-12 * h,
        "bandwidth {} differs from Silverman {h}",
        kde.bandwidth()
    );
    let scale = metric.scale();
    let grid = linspace(scale.min - 1.0, scale.max + 1.0, 257);
    let density = kde.evaluate_grid(&grid, Execution::default());
    let mut worst: f64 = 0.0;
    for (x, d) in grid.iter().zip(&density) {
        worst = worst.max((d - oracle::kde(&sample, h, *x)).abs());
    }
    ensure!(
        worst <= POINTWISE_TOLERANCE,
        "pointwise difference {worst:e} exceeds {POINTWISE_TOLERANCE:e}"
    );
    Ok(worst)
}
