//! Sequential vs rayon execution of the benchmark harness.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sfwt_core::bench::{run_auth_benchmark, run_gas_benchmark, Execution, LatencyModel, SchemeKind};

fn modes() -> Vec<(&'static str, Execution)> {
    vec![
        ("sequential", Execution::Sequential),
        #[cfg(feature = "parallel")]
        ("parallel", Execution::Parallel),
    ]
}

fn gas(c: &mut Criterion) {
    let mut g = c.benchmark_group("gas");
    g.sample_size(10);
    for (label, exec) in modes() {
        g.bench_function(BenchmarkId::new(label, "1..1000x5"), |b| {
            b.iter(|| run_gas_benchmark(black_box(&[1, 10, 100, 1000]), 5, exec).unwrap())
        });
    }
    g.finish();
}

fn auth(c: &mut Criterion) {
    let model = LatencyModel::default();
    let mut g = c.benchmark_group("auth");
    g.sample_size(10);
    for scheme in [SchemeKind::SfwtQuery, SchemeKind::BlockBroadcast] {
        for (label, exec) in modes() {
            g.bench_function(BenchmarkId::new(label, scheme.label()), |b| {
                b.iter(|| run_auth_benchmark(scheme, black_box(100), 10, &model, exec).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, gas, auth);
criterion_main!(benches);
