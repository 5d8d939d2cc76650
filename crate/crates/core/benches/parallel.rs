use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sympman::experiments::{run_feasibility, run_nearest, ExperimentConfig};
use sympman::par::Exec;

fn config(exec: Exec) -> ExperimentConfig {
    ExperimentConfig {
        n: 40,
        k: 4,
        runs: 8,
        t_samples: 40,
        exec,
        ..ExperimentConfig::default()
    }
}

fn feasibility(c: &mut Criterion) {
    let mut group = c.benchmark_group("feasibility");
    group.sample_size(10);
    for (name, exec) in [
        ("sequential", Exec::Sequential),
        ("parallel", Exec::Parallel),
    ] {
        let cfg = config(exec);
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| run_feasibility(cfg).unwrap())
        });
    }
    group.finish();
}

fn nearest(c: &mut Criterion) {
    let mut group = c.benchmark_group("nearest");
    group.sample_size(10);
    for (name, exec) in [
        ("sequential", Exec::Sequential),
        ("parallel", Exec::Parallel),
    ] {
        let cfg = config(exec);
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| run_nearest(cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, feasibility, nearest);
criterion_main!(benches);
