use super::IngestError;
use crate::domain::MetricDefinition;

/// Composite metric value for one respondent.
///
/// Answers are placed on the metric's scale (affinely, when the question was
/// asked on a different one) and averaged. The metric is present only when at
/// least `ceil(k/2)` of its `k` questions were answered.
pub fn derive_metric(
    answers: &[Option<f64>],
    def: &MetricDefinition,
) -> Result<Option<f64>, IngestError> {
    let questions = &def.component_questions;
    if answers.len() != questions.len() {
        return Err(IngestError::ArityMismatch {
            metric: def.id,
            expected: questions.len(),
            got: answers.len(),
        });
    }

    let mut on_scale = Vec::with_capacity(answers.len());
    for (answer, question) in answers.iter().zip(questions) {
        let Some(value) = *answer else { continue };
        if !value.is_finite() || !question.scale.contains(value) {
            return Err(IngestError::ScaleViolation {
                column: question.column.clone(),
                value,
            });
        }
        on_scale.push(question.scale.map_onto(value, &def.scale));
    }

    if on_scale.len() < def.required_answers() {
        return Ok(None);
    }
    // Sorted summation makes the result independent of question order.
    on_scale.sort_by(f64::total_cmp);
    let mean = on_scale.iter().sum::<f64>() / on_scale.len() as f64;
    Ok(Some(mean.clamp(def.scale.min, def.scale.max)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{MetricId, Question, Scale};
    use proptest::prelude::*;

    fn def(id: MetricId, k: usize, scale: Scale) -> MetricDefinition {
        let qs = (0..k)
            .map(|i| Question {
                column: format!("q{i}"),
                scale,
            })
            .collect();
        MetricDefinition::new(id, qs).unwrap()
    }

    fn three_point(k: usize) -> MetricDefinition {
        def(MetricId::Education, k, Scale::new(1.0, 3.0))
    }

    #[test]
    fn constant_answers() {
        assert_eq!(
            derive_metric(&[Some(3.0), Some(3.0)], &three_point(2)).unwrap(),
            Some(3.0)
        );
    }

    #[test]
    fn symmetric_mean() {
        assert_eq!(
            derive_metric(&[Some(1.0), Some(3.0)], &three_point(2)).unwrap(),
            Some(2.0)
        );
    }

    #[test]
    fn two_of_three_answered() {
        // ceil(3/2) = 2 answered is enough: mean(2, 3)
        assert_eq!(
            derive_metric(&[Some(2.0), Some(3.0), None], &three_point(3)).unwrap(),
            Some(2.5)
        );
    }

    #[test]
    fn one_of_three_answered_is_missing() {
        assert_eq!(
            derive_metric(&[Some(2.0), None, None], &three_point(3)).unwrap(),
            None
        );
    }

    #[test]
    fn half_of_even_count_is_enough() {
        assert_eq!(
            derive_metric(&[Some(1.0), None], &three_point(2)).unwrap(),
            Some(1.0)
        );
        assert_eq!(derive_metric(&[None, None], &three_point(2)).unwrap(), None);
        assert_eq!(
            derive_metric(&[Some(1.0), Some(2.0), None, None], &three_point(4)).unwrap(),
            Some(1.5)
        );
    }

    #[test]
    fn scale_violation() {
        let err = derive_metric(&[Some(4.0), Some(1.0)], &three_point(2)).unwrap_err();
        assert!(matches!(err, IngestError::ScaleViolation { value, .. } if value == 4.0));
        assert!(derive_metric(&[Some(f64::NAN), Some(1.0)], &three_point(2)).is_err());
    }

    #[test]
    fn arity_mismatch() {
        assert!(matches!(
            derive_metric(&[Some(1.0)], &three_point(2)),
            Err(IngestError::ArityMismatch {
                expected: 2,
                got: 1,
                ..
            })
        ));
    }

    #[test]
    fn rescales_question_scale_onto_metric_scale() {
        // five-point questions feeding a three-point metric
        let d = def(MetricId::Safety, 2, Scale::new(1.0, 5.0));
        assert_eq!(
            derive_metric(&[Some(5.0), Some(3.0)], &d).unwrap(),
            Some(2.5)
        );
    }

    proptest! {
        #[test]
        fn permutation_invariant_and_in_range(
            answers in proptest::collection::vec(proptest::option::weighted(0.7, 1.0f64..=3.0), 2..=6),
            seed in any::<u64>(),
        ) {
            let d = three_point(answers.len());
            let base = derive_metric(&answers, &d).unwrap();
            let mut shuffled = answers.clone();
            // deterministic Fisher-Yates driven by the seed
            let mut s = seed;
            for i in (1..shuffled.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (s >> 33) as usize % (i + 1);
                shuffled.swap(i, j);
            }
            prop_assert_eq!(derive_metric(&shuffled, &d).unwrap(), base);
            let answered = answers.iter().filter(|a| a.is_some()).count();
            prop_assert_eq!(base.is_some(), answered >= answers.len().div_ceil(2));
            if let Some(v) = base {
                prop_assert!((1.0..=3.0).contains(&v));
            }
        }
    }
}
