use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use attache_core::domain::{CommunityId, MetricId};
use attache_core::exec::Execution;
use attache_core::fixture::{generate_table, FixtureSpec};
use attache_core::ingestion::build_snapshot;
use attache_core::{Selection, YearFilter};

const ROWS: usize = 43_000;

fn executions() -> Vec<(&'static str, Execution)> {
    let mut out = vec![("sequential", Execution::Sequential)];
    #[cfg(feature = "parallel")]
    out.push(("parallel", Execution::Parallel));
    out
}

fn bench(c: &mut Criterion) {
    let table = generate_table(&FixtureSpec::new(43, ROWS));
    let base = build_snapshot(&table);
    let all = Selection::all(YearFilter::AllYears);
    let ids: Vec<CommunityId> = base
        .registry()
        .communities()
        .iter()
        .map(|c| c.id.clone())
        .collect();

    let mut group = c.benchmark_group("analytics_43k");
    for (name, execution) in executions() {
        let snap = base.clone().with_execution(execution);
        group.bench_with_input(
            BenchmarkId::new("strongest_correlates", name),
            &snap,
            |b, s| b.iter(|| s.strongest_correlates(YearFilter::AllYears)),
        );
        group.bench_with_input(
            BenchmarkId::new("correlation_profile", name),
            &snap,
            |b, s| b.iter(|| s.correlation_profile(&all).unwrap()),
        );
        group.bench_with_input(BenchmarkId::new("community_means", name), &snap, |b, s| {
            b.iter(|| s.community_means(MetricId::Openness, YearFilter::AllYears))
        });
        group.bench_with_input(
            BenchmarkId::new("parallel_coordinates", name),
            &snap,
            |b, s| b.iter(|| s.parallel_coordinates(YearFilter::AllYears)),
        );
        group.bench_with_input(BenchmarkId::new("yearly_series", name), &snap, |b, s| {
            b.iter(|| s.yearly_series(MetricId::Economy, &ids).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("density_4096", name), &snap, |b, s| {
            b.iter(|| {
                s.density_estimate(MetricId::CommunityAttachment, &all, 4096)
                    .unwrap()
            })
        });
    }
    group.finish();

    let mut build = c.benchmark_group("snapshot_build");
    build.sample_size(20);
    build.bench_function("from_table_43k", |b| b.iter(|| build_snapshot(&table)));
    build.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
