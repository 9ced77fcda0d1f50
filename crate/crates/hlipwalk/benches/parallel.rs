use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use hlipwalk::batch::{run_scenarios, run_scenarios_seq};
use hlipwalk::sim::ScenarioConfig;

fn bench_scenario() -> ScenarioConfig {
    serde_json::from_str(
        r#"{"path": {"shape": "circle", "radius": 2.0, "laps": 0.1}, "duration": 3.2}"#,
    )
    .unwrap()
}

fn bench_batches(c: &mut Criterion) {
    let cfg = bench_scenario();
    let mut group = c.benchmark_group("seed_batch");
    group.sample_size(10);
    for runs in [4usize, 16] {
        let seeds: Vec<u64> = (0..runs as u64).collect();
        group.throughput(Throughput::Elements(runs as u64));
        group.bench_with_input(BenchmarkId::new("sequential", runs), &seeds, |b, seeds| {
            b.iter(|| run_scenarios_seq(&cfg, seeds))
        });
        group.bench_with_input(BenchmarkId::new("parallel", runs), &seeds, |b, seeds| {
            b.iter(|| run_scenarios(&cfg, seeds))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_batches);
criterion_main!(benches);
