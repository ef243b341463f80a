use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gutmanlab_core::distributions::Distribution;
use gutmanlab_core::parallel::{set_execution, Execution};
use gutmanlab_core::simulation::{exact_binary, mc_binary};
use std::hint::black_box;

const BACKENDS: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn monte_carlo(c: &mut Criterion) {
    let p1 = Distribution::bernoulli(0.2).unwrap();
    let p2 = Distribution::bernoulli(0.4).unwrap();
    let mut group = c.benchmark_group("mc_binary");
    group.sample_size(10);
    for (name, mode) in BACKENDS {
        group.bench_with_input(BenchmarkId::new(name, 1000), &mode, |b, &mode| {
            set_execution(mode);
            b.iter(|| mc_binary(&p1, &p2, 2.0, black_box(1000), 0.05, 20_000, 1).unwrap())
        });
    }
    group.finish();
}

fn exact(c: &mut Criterion) {
    let p1 = Distribution::new(vec![0.2, 0.5, 0.3]).unwrap();
    let p2 = Distribution::new(vec![0.4, 0.4, 0.2]).unwrap();
    let mut group = c.benchmark_group("exact_binary");
    group.sample_size(10);
    for (name, mode) in BACKENDS {
        group.bench_with_input(BenchmarkId::new(name, 20), &mode, |b, &mode| {
            set_execution(mode);
            b.iter(|| exact_binary(&p1, &p2, 1.0, black_box(20), 0.05).unwrap())
        });
    }
    group.finish();
    set_execution(Execution::Parallel);
}

criterion_group!(benches, monte_carlo, exact);
criterion_main!(benches);
