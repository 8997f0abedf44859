use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use psynet::bootstrap::nonparametric_boot;
use psynet::simgen::{chain_network, ordinalize, pcor_to_covariance, sample_mvn};
use psynet::{Dataset, EstimationOptions};

fn ordinal_data(n: usize) -> Dataset {
    let net = chain_network(10, 0.25, 0.5, 1).unwrap();
    let x = sample_mvn(&pcor_to_covariance(&net).unwrap(), n, 2).unwrap();
    ordinalize(&x, 4, 3).unwrap()
}

// workers = 1 takes the sequential path; 0 hands the replicates to rayon
// (which is the same sequential loop when built without `parallel`).
fn bench_boot(c: &mut Criterion) {
    let opts = EstimationOptions::default();
    let mut g = c.benchmark_group("nonparametric_boot_32");
    g.sample_size(10);
    for n in [500usize, 2500] {
        let ds = ordinal_data(n);
        g.bench_with_input(BenchmarkId::new("sequential", n), &ds, |b, ds| {
            b.iter(|| nonparametric_boot(black_box(ds), &opts, 32, 7, 1).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("rayon", n), &ds, |b, ds| {
            b.iter(|| nonparametric_boot(black_box(ds), &opts, 32, 7, 0).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench_boot);
criterion_main!(benches);
