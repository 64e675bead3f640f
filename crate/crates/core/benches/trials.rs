use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use screened::dist::{DistributionModel, ObservablePair};
use screened::harness::run_duality_suite;
use screened::par::Pool;
use screened::screen::{ScreenConfig, Sidedness, TrialKernel};

const TRIALS: u64 = 20_000;

fn pools() -> Vec<(String, Pool)> {
    let mut out = vec![("sequential".to_string(), Pool::Sequential)];
    let threads = Pool::new(None).expect("pool");
    out.push((format!("pool-{}", threads.workers()), threads));
    out
}

fn bench_trials(c: &mut Criterion) {
    let cfg = ScreenConfig { epsilon: 0.5, u: 0.025, n: 200, sidedness: Sidedness::TwoSided };
    let kernel = TrialKernel::new(&DistributionModel::ParetoLike, &ObservablePair::heavy_tail_example(), &cfg).unwrap();
    let mut group = c.benchmark_group("trials");
    group.sample_size(10);
    group.throughput(Throughput::Elements(TRIALS));
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::new("pareto_n200", &name), &pool, |b, pool| {
            b.iter(|| pool.run_trials(black_box(&kernel), 7, 0, TRIALS))
        });
    }
    group.finish();
}

fn bench_duality(c: &mut Criterion) {
    let mut group = c.benchmark_group("duality");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::new("suite_50", &name), &pool, |b, pool| {
            b.iter(|| run_duality_suite(black_box(11), 50, pool).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_trials, bench_duality);
criterion_main!(benches);
