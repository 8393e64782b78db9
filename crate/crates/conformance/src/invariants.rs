use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use attache_core::analytics::AnalyticsError;
use attache_core::domain::{MetricDefinition, MetricId, Question, Scale};
use attache_core::exec::Execution;
use attache_core::fixture::{generate_csv, generate_responses, FixtureSpec};
use attache_core::ingestion::{derive_metric, parse_survey_file, ResponseTable};
use attache_core::{AnalyticsSnapshot, CommunityRegistry, Selection, SelectionLevel, YearFilter};

use crate::{ensure, every_selection, every_year_filter, CheckResult};

const WEIGHTED_MEAN_TOLERANCE: f64 = 1e-9;
const AFFINE_TOLERANCE: f64 = 1e-12;

/// A randomized fixture shape derived from `seed`.
pub fn random_spec(seed: u64) -> FixtureSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let communities = rng.random_bool(0.3).then(|| {
        let mut all: Vec<usize> = (0..26).collect();
        all.shuffle(&mut rng);
        all.truncate(rng.random_range(2..20));
        all
    });
    FixtureSpec {
        seed,
        rows: rng.random_range(120..=600),
        malformed_fraction: rng.random_range(0.0..0.1),
        missing_rate: rng.random_range(0.0..0.35),
        communities,
    }
}

fn snapshot(
    responses: Vec<attache_core::domain::SurveyResponse>,
    execution: Execution,
) -> Result<AnalyticsSnapshot, String> {
    let table = ResponseTable::from_responses(responses, CommunityRegistry::default_registry())
        .map_err(|e| e.to_string())?;
    Ok(AnalyticsSnapshot::from_table(&table).with_execution(execution))
}

/// The analytics and ingestion invariants on one randomized fixture.
pub fn invariants(seed: u64) -> CheckResult {
    let spec = random_spec(seed);
    let responses = generate_responses(&spec);
    let snap = snapshot(responses.clone(), Execution::Sequential)?;
    let mut checks = 0;
    checks += metric_range(&snap, &responses)?;
    checks += weighted_mean(&snap)?;
    checks += affine_pearson(&snap, &responses, seed)?;
    checks += ordering(&snap)?;
    checks += bin_conservation(&snap)?;
    checks += monotone_years(&snap)?;
    checks += determinism(&snap, &responses)?;
    checks += ingestion_round_trip(&spec)?;
    Ok(checks)
}

fn metric_range(
    snap: &AnalyticsSnapshot,
    responses: &[attache_core::domain::SurveyResponse],
) -> CheckResult {
    for r in responses {
        ensure!(r.in_range(), "response {r:?} has an out-of-scale metric");
    }
    for metric in MetricId::ALL {
        for point in snap.map_summary(metric, YearFilter::AllYears) {
            if let Some(s) = point.summary {
                ensure!(
                    metric.scale().contains(s.mean),
                    "{metric} mean {} for {} off scale",
                    s.mean,
                    point.community
                );
            }
        }
    }
    Ok(responses.len())
}

fn weighted_mean(snap: &AnalyticsSnapshot) -> CheckResult {
    let mut checks = 0;
    for years in every_year_filter() {
        for metric in MetricId::ALL {
            let cells: Vec<_> = snap
                .map_summary(metric, years)
                .into_iter()
                .filter_map(|p| p.summary)
                .collect();
            let n: usize = cells.iter().map(|c| c.n).sum();
            let pooled = snap.mean_metric(metric, &Selection::all(years));
            if n == 0 {
                ensure!(
                    matches!(pooled, Err(AnalyticsError::EmptySelection { .. })),
                    "{metric} {years}: expected empty"
                );
                continue;
            }
            let weighted = cells.iter().map(|c| c.mean * c.n as f64).sum::<f64>() / n as f64;
            let pooled = pooled.map_err(|e| e.to_string())?;
            ensure!(
                (pooled.mean - weighted).abs() <= WEIGHTED_MEAN_TOLERANCE && pooled.n == n,
                "{metric} {years}: pooled {} (n={}), weighted {weighted} (n={n})",
                pooled.mean,
                pooled.n
            );
            checks += 1;
        }
    }
    Ok(checks)
}

fn affine_pearson(
    snap: &AnalyticsSnapshot,
    responses: &[attache_core::domain::SurveyResponse],
    seed: u64,
) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xaff1);
    let mut transformed = responses.to_vec();
    for metric in MetricId::ALL {
        // a*v + b with a in (0, 1) and the minimum fixed keeps values on scale
        let a: f64 = rng.random_range(0.2..0.95);
        let b = metric.scale().min * (1.0 - a);
        transformed = attache_core::fixture::affine_metric(&transformed, metric, a, b);
    }
    let other = snapshot(transformed, Execution::Sequential)?;
    let mut checks = 0;
    for level in every_selection(snap.registry()) {
        for years in [YearFilter::AllYears, every_year_filter()[1]] {
            let sel = Selection::new(level.clone(), years);
            let p = snap.correlation_profile(&sel).map_err(|e| e.to_string())?;
            let q = other.correlation_profile(&sel).map_err(|e| e.to_string())?;
            for (e, f) in p.entries.iter().zip(&q.entries) {
                let same = match (e.r, f.r) {
                    (Some(a), Some(b)) => (a - b).abs() <= AFFINE_TOLERANCE,
                    (None, None) => true,
                    _ => false,
                };
                ensure!(
                    same,
                    "{level:?} {years} {}: r {:?} became {:?} under an affine map",
                    e.metric,
                    e.r,
                    f.r
                );
                checks += 1;
            }
        }
    }
    Ok(checks)
}

fn ordering(snap: &AnalyticsSnapshot) -> CheckResult {
    let mut checks = 0;
    for years in every_year_filter() {
        for metric in MetricId::ALL {
            let ranking = snap.community_means(metric, years);
            let len = ranking.entries.len();
            for k in 0..=len + 1 {
                let top = snap.top_k(metric, years, k);
                ensure!(
                    top[..] == ranking.entries[..k.min(len)],
                    "{metric} {years}: top_k({k}) is not a prefix"
                );
            }
            for (pos, e) in ranking.entries.iter().enumerate() {
                let rank = snap
                    .rank_community(metric, years, e.community.as_str())
                    .map_err(|e| e.to_string())?;
                ensure!(
                    rank.rank_from_best == pos + 1
                        && rank.rank_from_worst == len - pos
                        && rank.total_ranked == len,
                    "{metric} {years}: {} at index {pos} has rank {rank:?}",
                    e.community
                );
            }
            for id in &ranking.omitted {
                let got = snap.rank_community(metric, years, id.as_str());
                ensure!(
                    matches!(got, Err(AnalyticsError::NoData { .. })),
                    "{metric} {years}: {id} should have no rank"
                );
            }
            ensure!(
                len + ranking.omitted.len() == snap.registry().len(),
                "{metric} {years}: communities lost"
            );
            checks += len + 1;
        }
    }
    Ok(checks)
}

fn bin_conservation(snap: &AnalyticsSnapshot) -> CheckResult {
    let mut checks = 0;
    for years in every_year_filter() {
        let sel = Selection::all(years);
        let profile = snap.correlation_profile(&sel).map_err(|e| e.to_string())?;
        for entry in &profile.entries {
            match snap.bin2d(entry.metric, MetricId::TARGET, &sel, 9, 17) {
                Ok(b) => {
                    let binned: usize = b.counts.iter().flatten().sum();
                    ensure!(
                        binned == b.total && b.total == entry.n_pairs,
                        "bin2d {} {years}: {binned} binned, total {}, {} pairs",
                        entry.metric,
                        b.total,
                        entry.n_pairs
                    );
                }
                Err(AnalyticsError::EmptySelection { .. }) => {
                    ensure!(entry.n_pairs == 0, "bin2d {}: spurious empty", entry.metric)
                }
                Err(e) => return Err(e.to_string()),
            }
            checks += 1;
        }
    }
    Ok(checks)
}

fn monotone_years(snap: &AnalyticsSnapshot) -> CheckResult {
    let n = |metric, sel: &Selection| snap.mean_metric(metric, sel).map_or(0, |c| c.n);
    let mut checks = 0;
    for level in every_selection(snap.registry()) {
        let all = Selection::new(level.clone(), YearFilter::AllYears);
        let respondents = snap.respondent_count(&all).map_err(|e| e.to_string())?;
        let mut single_total = 0;
        for years in every_year_filter().into_iter().skip(1) {
            let one = Selection::new(level.clone(), years);
            let r = snap.respondent_count(&one).map_err(|e| e.to_string())?;
            ensure!(
                r <= respondents,
                "{level:?} {years}: {r} respondents exceeds {respondents}"
            );
            single_total += r;
            for metric in MetricId::ALL {
                ensure!(
                    n(metric, &one) <= n(metric, &all),
                    "{level:?} {years} {metric}: n grew when narrowing years"
                );
                checks += 1;
            }
        }
        ensure!(
            single_total == respondents,
            "{level:?}: yearly respondents do not add up"
        );
    }
    Ok(checks)
}

/// Serialized outputs of one pass over the public operations.
fn transcript(snap: &AnalyticsSnapshot) -> String {
    let mut out = Vec::new();
    let ids: Vec<_> = snap
        .registry()
        .communities()
        .iter()
        .map(|c| c.id.clone())
        .collect();
    for years in every_year_filter() {
        out.push(json!(snap.parallel_coordinates(years)));
        out.push(json!(snap.strongest_correlates(years)));
        for metric in MetricId::ALL {
            out.push(json!(snap.community_means(metric, years)));
            out.push(json!(snap.map_summary(metric, years)));
            out.push(json!(snap
                .bar_chart_data(metric, years, ids[0].as_str())
                .ok()));
            let sel = Selection::all(years);
            out.push(json!(snap.density_estimate(metric, &sel, 64).ok()));
            out.push(json!(snap
                .bin2d(metric, MetricId::TARGET, &sel, 12, 12)
                .ok()));
        }
    }
    for metric in MetricId::ALL {
        out.push(json!(snap.yearly_series(metric, &ids).ok()));
    }
    out.push(json!(snap
        .correlation_profile(&Selection::new(SelectionLevel::All, YearFilter::AllYears))
        .ok()));
    serde_json::to_string(&out).expect("serializable")
}

fn determinism(
    snap: &AnalyticsSnapshot,
    responses: &[attache_core::domain::SurveyResponse],
) -> CheckResult {
    let first = transcript(snap);
    ensure!(
        first == transcript(snap),
        "repeated calls on one snapshot differ"
    );
    let rebuilt = snapshot(responses.to_vec(), Execution::Sequential)?;
    ensure!(
        first == transcript(&rebuilt),
        "rebuilding the snapshot changed results"
    );
    let parallel = snapshot(responses.to_vec(), Execution::default())?;
    ensure!(
        first == transcript(&parallel),
        "parallel execution differs from sequential"
    );
    Ok(3)
}

fn ingestion_round_trip(spec: &FixtureSpec) -> CheckResult {
    let survey = generate_csv(spec);
    let table = parse_survey_file(survey.csv.as_bytes(), &survey.mapping, &survey.registry)
        .map_err(|e| e.to_string())?;
    let p = table.provenance();
    ensure!(
        p.accepted + p.rejected == spec.rows && p.rows_read == spec.rows,
        "{} accepted + {} rejected != {} rows",
        p.accepted,
        p.rejected,
        spec.rows
    );
    ensure!(
        p.rejected == survey.malformed_rows,
        "{} rejected, {} corrupted",
        p.rejected,
        survey.malformed_rows
    );
    ensure!(
        table.responses().iter().all(|r| r.in_range()),
        "accepted rows with off-scale metrics"
    );
    Ok(1)
}

/// Permutation invariance, the half-answered rule and range bounds of
/// metric derivation on random answer lists.
pub fn derive_invariants(seed: u64, cases: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let metric = MetricId::ALL[rng.random_range(0..MetricId::ALL.len())];
        let k = rng.random_range(2..=6);
        let question_scale = if rng.random_bool(0.5) {
            metric.scale()
        } else {
            Scale::new(1.0, 5.0)
        };
        let questions = (0..k)
            .map(|j| Question {
                column: format!("q{j}"),
                scale: question_scale,
            })
            .collect();
        let def = MetricDefinition::new(metric, questions).map_err(|e| e.to_string())?;
        let missing_p = rng.random_range(0.0..0.8);
        let answers: Vec<Option<f64>> = (0..k)
            .map(|_| {
                (!rng.random_bool(missing_p)).then(|| {
                    let steps = question_scale.width() as u32;
                    question_scale.min + f64::from(rng.random_range(0..=steps))
                })
            })
            .collect();
        let value = derive_metric(&answers, &def).map_err(|e| e.to_string())?;
        let answered = answers.iter().flatten().count();
        ensure!(
            value.is_some() == (2 * answered >= k),
            "case {case}: {answered} of {k} answered gave {value:?}"
        );
        if let Some(v) = value {
            ensure!(
                metric.scale().contains(v),
                "case {case}: {v} off the {metric} scale"
            );
        }
        for _ in 0..4 {
            let mut shuffled = answers.clone();
            shuffled.shuffle(&mut rng);
            let again = derive_metric(&shuffled, &def).map_err(|e| e.to_string())?;
            ensure!(
                again.map(f64::to_bits) == value.map(f64::to_bits),
                "case {case}: permuting {answers:?} changed {value:?} to {again:?}"
            );
        }
    }
    Ok(cases)
}
