use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use coordkit::binning::{run_exact, ExactConfig};
use coordkit::polar::{estimate_entropies, Side};
use coordkit::{CoordinationTarget, Execution};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn entropy_estimation(c: &mut Criterion) {
    let target = CoordinationTarget::bsc_cascade(0.3, 0.1).unwrap();
    let mut group = c.benchmark_group("entropy_estimation");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 1024), &exec, |b, &exec| {
            b.iter(|| estimate_entropies(&target, Side::U, 1024, 512, 1, exec).unwrap())
        });
    }
    group.finish();
}

fn binning_scan(c: &mut Criterion) {
    let target = CoordinationTarget::bsc_cascade(0.3, 0.1).unwrap();
    let mut group = c.benchmark_group("binning_scan");
    group.sample_size(10);
    for (name, exec) in MODES {
        let mut cfg = ExactConfig::new(4, 0.6, 0.0, (0..16).collect());
        cfg.exec = exec;
        group.bench_with_input(BenchmarkId::new(name, 4), &cfg, |b, cfg| b.iter(|| run_exact(&target, cfg).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, entropy_estimation, binning_scan);
criterion_main!(benches);
