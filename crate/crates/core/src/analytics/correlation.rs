use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::{display2, AnalyticsError, AnalyticsSnapshot};
use crate::domain::{CommunityId, MetricId, Selection, SelectionLevel, YearFilter};

/// Pearson r between one metric and Community Attachment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationEntry {
    pub metric: MetricId,
    /// `None` when either variable is constant or fewer than two pairs exist.
    pub r: Option<f64>,
    pub n_pairs: usize,
}

impl Serialize for CorrelationEntry {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CorrelationEntry", 4)?;
        st.serialize_field("metric", &self.metric)?;
        st.serialize_field("r", &self.r)?;
        st.serialize_field("r_display", &self.r.map(display2))?;
        st.serialize_field("n_pairs", &self.n_pairs)?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationProfile {
    pub selection: SelectionLevel,
    pub years: YearFilter,
    pub entries: Vec<CorrelationEntry>,
}

impl CorrelationProfile {
    /// Highest defined r; the earlier metric wins exact ties.
    pub fn strongest(&self) -> Option<&CorrelationEntry> {
        self.entries.iter().filter(|e| e.r.is_some()).fold(
            None,
            |best: Option<&CorrelationEntry>, e| match best {
                Some(b) if b.r >= e.r => Some(b),
                _ => Some(e),
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrongestCorrelate {
    pub community: CommunityId,
    pub display_name: String,
    pub strongest: Option<CorrelationEntry>,
}

/// Two-pass Pearson correlation.
///
/// Returns `None` for mismatched lengths, fewer than two pairs, or a
/// constant variable. Constancy is checked on the raw values so rounding in
/// the mean cannot fake a tiny nonzero variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
    if constant(xs) || constant(ys) {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

impl AnalyticsSnapshot {
    fn profile_for(&self, communities: &[usize], years: YearFilter) -> Vec<CorrelationEntry> {
        let predictors: Vec<MetricId> = MetricId::predictors().collect();
        self.execution.map(&predictors, |&metric| {
            let (x, y) = self.pairs(metric, MetricId::TARGET, communities, years);
            CorrelationEntry {
                metric,
                r: pearson(&x, &y),
                n_pairs: x.len(),
            }
        })
    }

    /// Correlation of each of the ten predictors with Community Attachment,
    /// using every respondent who has both values (pairwise deletion).
    pub fn correlation_profile(
        &self,
        sel: &Selection,
    ) -> Result<CorrelationProfile, AnalyticsError> {
        let communities = self.registry.resolve_indices(&sel.level)?;
        Ok(CorrelationProfile {
            selection: sel.level.clone(),
            years: sel.years,
            entries: self.profile_for(&communities, sel.years),
        })
    }

    /// The all-communities profile drawn behind every selection.
    pub fn reference_profile(&self, years: YearFilter) -> CorrelationProfile {
        self.correlation_profile(&Selection::all(years))
            .expect("the all-communities selection always resolves")
    }

    /// Per community, the predictor most correlated with attachment.
    pub fn strongest_correlates(&self, years: YearFilter) -> Vec<StrongestCorrelate> {
        let idx: Vec<usize> = (0..self.registry.len()).collect();
        self.execution.map(&idx, |&c| {
            let profile = self.profile_for(&[c], years);
            let info = self.registry.get(c);
            let strongest = CorrelationProfile {
                selection: SelectionLevel::Community(info.id.clone()),
                years,
                entries: profile,
            }
            .strongest()
            .copied();
            StrongestCorrelate {
                community: info.id.clone(),
                display_name: info.display_name.clone(),
                strongest,
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_positive_and_negative() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| 1.0 + (v - 1.0) / 2.0).collect();
        assert!((pearson(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        let z: Vec<f64> = x.iter().map(|v| -3.0 * v + 7.0).collect();
        assert!((pearson(&x, &z).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn undefined_cases() {
        assert_eq!(pearson(&[1.0], &[2.0]), None);
        assert_eq!(pearson(&[], &[]), None);
        assert_eq!(pearson(&[0.1, 0.1, 0.1], &[1.0, 2.0, 3.0]), None);
        assert_eq!(pearson(&[1.0, 2.0], &[1.0]), None);
    }

    #[test]
    fn strongest_prefers_earlier_on_ties() {
        let e = |metric, r| CorrelationEntry {
            metric,
            r,
            n_pairs: 10,
        };
        let p = CorrelationProfile {
            selection: SelectionLevel::All,
            years: YearFilter::AllYears,
            entries: vec![
                e(MetricId::SocialOfferings, Some(0.5)),
                e(MetricId::Openness, None),
                e(MetricId::Aesthetics, Some(0.5)),
                e(MetricId::Education, Some(0.2)),
            ],
        };
        assert_eq!(p.strongest().unwrap().metric, MetricId::SocialOfferings);
    }
}
