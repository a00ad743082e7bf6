use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use uavnoma::harness::{simulate, Execution, Experiment};

fn batch() -> Experiment {
    let mut exp = Experiment::default_experiment();
    exp.seeds = (0..4).collect();
    exp.slots = 2_000;
    exp.surrogate.budget_episodes = 500;
    exp
}

fn experiment(c: &mut Criterion) {
    let exp = batch();
    let mut group = c.benchmark_group("experiment");
    group.sample_size(10);
    for (name, mode) in [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ] {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| simulate(&exp, mode).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, experiment);
criterion_main!(benches);
