use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use inertial_bench::reference_case;
use inertial_core::{
    corrected_propagate, distance_grid, inertial_propagate, integrate_liouville, integrate_spinor,
    InertialConfig, IntegratorConfig,
};

fn exact(c: &mut Criterion) {
    let (params, psi0, v0) = reference_case(-0.01);
    let cfg = IntegratorConfig::default();
    let mut g = c.benchmark_group("exact");
    g.sample_size(10);
    g.bench_function("liouville", |b| {
        b.iter(|| integrate_liouville(black_box(&params), &v0, &cfg).unwrap())
    });
    g.bench_function("spinor", |b| {
        b.iter(|| integrate_spinor(black_box(&params), &psi0, &cfg).unwrap())
    });
    g.finish();
}

fn approximate(c: &mut Criterion) {
    let (params, _, v0) = reference_case(-0.01);
    let cfg = InertialConfig::default();
    c.bench_function("inertial", |b| {
        b.iter(|| inertial_propagate(black_box(&params), &v0, &cfg).unwrap())
    });
    c.bench_function("inertial_geometric", |b| {
        let cfg = cfg.with_geometric(true);
        b.iter(|| inertial_propagate(black_box(&params), &v0, &cfg).unwrap())
    });
    c.bench_function("corrected", |b| {
        b.iter(|| corrected_propagate(black_box(&params), &v0).unwrap())
    });
}

fn sweep(c: &mut Criterion) {
    let mut base = reference_case(0.0).0;
    base.n_samples = 100;
    let deltas: Vec<f64> = (0..9).map(|i| (i as f64 - 4.0) * 0.025 * base.alpha0).collect();
    let mut g = c.benchmark_group("sweep");
    g.sample_size(10);
    g.bench_function("distance_grid_9x100", |b| {
        b.iter(|| {
            distance_grid(
                black_box(&base),
                &deltas,
                &IntegratorConfig::default(),
                &InertialConfig::default(),
            )
        })
    });
    g.finish();
}

criterion_group!(benches, exact, approximate, sweep);
criterion_main!(benches);
