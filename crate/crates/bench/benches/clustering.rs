use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fttc::{build_matrix, plan_for_head_count, recluster, run_simulation, tune_threshold};
use fttc::{NetworkConfig, Protocol};
use fttc_bench::{field_matrix, field_trajectories};

fn matrix(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_matrix");
    for n in [50, 100, 200] {
        let trajs = field_trajectories(n, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &trajs, |b, t| {
            b.iter(|| build_matrix(black_box(t)))
        });
    }
    group.finish();
}

fn clustering(c: &mut Criterion) {
    let (trajs, m) = field_matrix(100, 1);
    c.bench_function("tune_threshold/k=7", |b| {
        b.iter(|| tune_threshold(black_box(&m), 7))
    });
    let (_, seeded) = tune_threshold(&m, 7);
    c.bench_function("recluster/k=7", |b| {
        b.iter(|| recluster(black_box(&m), black_box(&seeded.representatives)))
    });
    c.bench_function("plan_for_head_count/7", |b| {
        b.iter(|| plan_for_head_count(black_box(&m), black_box(&trajs), 7))
    });
}

fn simulation(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_simulation");
    group.sample_size(10);
    let config = NetworkConfig {
        max_rounds: 500,
        ..NetworkConfig::default()
    };
    for protocol in [Protocol::Fttc, Protocol::Baseline] {
        group.bench_function(protocol.name(), |b| {
            b.iter(|| run_simulation(black_box(&config), protocol).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, matrix, clustering, simulation);
criterion_main!(benches);
