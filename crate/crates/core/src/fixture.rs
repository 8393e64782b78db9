//! Seeded synthetic survey data.
//!
//! Produces question-level exports shaped like the real survey (same
//! metrics, question counts and scales, sentinel-coded missing answers) so
//! the whole pipeline can be exercised without the licensed dataset. The
//! same spec and seed always produce byte-identical output.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::domain::{
    CommunityRegistry, MetricDefinition, MetricId, Question, SurveyResponse, METRIC_COUNT,
    SURVEY_YEARS,
};
use crate::ingestion::{
    derive_metric, ColumnMapping, MetricSource, ResponseTable, DEFAULT_MISSING,
};

pub const COMMUNITY_COLUMN: &str = "community";
pub const YEAR_COLUMN: &str = "year";

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSpec {
    pub seed: u64,
    pub rows: usize,
    /// Share of rows deliberately corrupted (rounded to a whole row count).
    pub malformed_fraction: f64,
    /// Per-answer probability of a sentinel missing code.
    pub missing_rate: f64,
    /// Registry indices respondents are drawn from; `None` for all.
    pub communities: Option<Vec<usize>>,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        FixtureSpec {
            seed: 2013,
            rows: 1000,
            malformed_fraction: 0.05,
            missing_rate: 0.06,
            communities: None,
        }
    }
}

impl FixtureSpec {
    pub fn new(seed: u64, rows: usize) -> Self {
        FixtureSpec {
            seed,
            rows,
            ..FixtureSpec::default()
        }
    }

    pub fn malformed_rows(&self) -> usize {
        (self.rows as f64 * self.malformed_fraction).round() as usize
    }
}

/// A generated export plus the mapping that reads it.
#[derive(Debug, Clone)]
pub struct SyntheticSurvey {
    pub csv: String,
    pub mapping: ColumnMapping,
    pub registry: CommunityRegistry,
    pub malformed_rows: usize,
}

fn question_column(metric: MetricId, j: usize) -> String {
    format!("{}_{}", metric.as_str(), j + 1)
}

/// Question-level mapping for generated exports: attachment questions on a
/// 1-5 scale, everything else on 1-3.
pub fn standard_mapping() -> ColumnMapping {
    let metrics = MetricId::ALL.map(|m| {
        let questions = (0..m.standard_question_count())
            .map(|j| Question {
                column: question_column(m, j),
                scale: m.scale(),
            })
            .collect();
        MetricSource::Questions(
            MetricDefinition::new(m, questions).expect("standard counts are 2..=6"),
        )
    });
    ColumnMapping {
        community_column: COMMUNITY_COLUMN.into(),
        year_column: YEAR_COLUMN.into(),
        urbanicity_column: None,
        delimiter: b',',
        missing: DEFAULT_MISSING.iter().map(|s| s.to_string()).collect(),
        community_aliases: Default::default(),
        metrics,
    }
}

/// Latent-factor answer model shared by CSV and in-memory generation.
struct Model {
    rng: ChaCha8Rng,
    community_effect: Vec<[f64; METRIC_COUNT]>,
    year_effect: [[f64; METRIC_COUNT]; 3],
    loading: [f64; METRIC_COUNT],
    pool: Vec<usize>,
    missing_rate: f64,
}

type Answers = [Vec<Option<u8>>; METRIC_COUNT];

impl Model {
    fn new(spec: &FixtureSpec, registry: &CommunityRegistry) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let effect = Normal::new(0.0, 0.45).expect("valid sd");
        let community_effect = (0..registry.len())
            .map(|_| std::array::from_fn(|_| effect.sample(&mut rng)))
            .collect();
        let year = Normal::new(0.0, 0.15).expect("valid sd");
        let year_effect = std::array::from_fn(|_| std::array::from_fn(|_| year.sample(&mut rng)));
        let loading = std::array::from_fn(|i| {
            if i == 0 {
                1.0
            } else {
                rng.random_range(0.1..0.9)
            }
        });
        let pool = spec
            .communities
            .clone()
            .unwrap_or_else(|| (0..registry.len()).collect());
        Model {
            rng,
            community_effect,
            year_effect,
            loading,
            pool,
            missing_rate: spec.missing_rate,
        }
    }

    /// (registry index, year index, answers)
    fn respondent(&mut self) -> (usize, usize, Answers) {
        // skewed community sizes so pooled and community-averaged means differ
        let pick = self.rng.random_range(0..self.pool.len());
        let pick = if self.rng.random_bool(0.3) {
            pick / 2
        } else {
            pick
        };
        let community = self.pool[pick];
        let year = self.rng.random_range(0..3);
        let z: f64 = StandardNormal.sample(&mut self.rng);
        let answers = std::array::from_fn(|i| {
            let metric = MetricId::ALL[i];
            let scale = metric.scale();
            let spread = scale.width() / 2.0;
            let shift = self.community_effect[community][i] + self.year_effect[year][i];
            (0..metric.standard_question_count())
                .map(|_| {
                    if self.rng.random_bool(self.missing_rate) {
                        return None;
                    }
                    let e: f64 = StandardNormal.sample(&mut self.rng);
                    let raw =
                        scale.midpoint() + spread * 0.6 * (self.loading[i] * z + shift + 0.8 * e);
                    Some(raw.round().clamp(scale.min, scale.max) as u8)
                })
                .collect()
        });
        (community, year, answers)
    }
}

/// Generate a question-level CSV export with exactly
/// [`FixtureSpec::malformed_rows`] corrupted rows.
pub fn generate_csv(spec: &FixtureSpec) -> SyntheticSurvey {
    let registry = CommunityRegistry::default_registry();
    let mapping = standard_mapping();
    let mut model = Model::new(spec, &registry);

    let mut header = vec![
        "respondent_id".to_string(),
        COMMUNITY_COLUMN.into(),
        YEAR_COLUMN.into(),
    ];
    for m in MetricId::ALL {
        header.extend((0..m.standard_question_count()).map(|j| question_column(m, j)));
    }

    let malformed = spec.malformed_rows().min(spec.rows);
    let mut corrupt = vec![false; spec.rows];
    corrupt[..malformed].iter_mut().for_each(|c| *c = true);
    corrupt.shuffle(&mut model.rng);

    let mut out = csv::WriterBuilder::new()
        .flexible(true)
        .from_writer(Vec::new());
    out.write_record(&header).expect("in-memory write");
    let mut kind = 0usize;
    for (row, is_corrupt) in corrupt.into_iter().enumerate() {
        let (community, year, answers) = model.respondent();
        let mut fields = vec![
            format!("r{row:06}"),
            registry.get(community).id.to_string(),
            SURVEY_YEARS[year].to_string(),
        ];
        for a in answers.iter().flatten() {
            fields.push(match a {
                Some(v) => v.to_string(),
                None => {
                    DEFAULT_MISSING[model.rng.random_range(0..DEFAULT_MISSING.len())].to_string()
                }
            });
        }
        if is_corrupt {
            let answer_col = model.rng.random_range(3..fields.len());
            match kind % 5 {
                0 => fields[1] = "atlantis-xx".into(),
                1 => fields[2] = "2011".into(),
                2 => {
                    fields.pop();
                }
                3 => fields[answer_col] = "abc".into(),
                _ => fields[answer_col] = "7".into(),
            }
            kind += 1;
        }
        out.write_record(&fields).expect("in-memory write");
    }
    let csv = String::from_utf8(out.into_inner().expect("flush")).expect("ascii output");
    SyntheticSurvey {
        csv,
        mapping,
        registry,
        malformed_rows: malformed,
    }
}

/// Already-derived responses (no malformed rows) drawn from the same model.
pub fn generate_responses(spec: &FixtureSpec) -> Vec<SurveyResponse> {
    let registry = CommunityRegistry::default_registry();
    let mapping = standard_mapping();
    let mut model = Model::new(spec, &registry);
    (0..spec.rows)
        .map(|_| {
            let (community, year, answers) = model.respondent();
            let mut r = SurveyResponse::new(registry.get(community).id.clone(), SURVEY_YEARS[year]);
            for m in MetricId::ALL {
                let MetricSource::Questions(def) = mapping.source(m) else {
                    unreachable!("standard mapping is question-level")
                };
                let a: Vec<Option<f64>> = answers[m.index()]
                    .iter()
                    .map(|v| v.map(f64::from))
                    .collect();
                r.metrics[m.index()] =
                    derive_metric(&a, def).expect("generated answers are on scale");
            }
            r
        })
        .collect()
}

pub fn generate_table(spec: &FixtureSpec) -> ResponseTable {
    ResponseTable::from_responses(
        generate_responses(spec),
        CommunityRegistry::default_registry(),
    )
    .expect("generated responses are valid")
}

/// Apply `value * scale + shift` to one metric of every response. Callers
/// pick coefficients that keep values on the metric's scale.
pub fn affine_metric(
    responses: &[SurveyResponse],
    metric: MetricId,
    scale: f64,
    shift: f64,
) -> Vec<SurveyResponse> {
    responses
        .iter()
        .cloned()
        .map(|mut r| {
            r.metrics[metric.index()] = r.metrics[metric.index()].map(|v| v * scale + shift);
            r
        })
        .collect()
}
