use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use plap_core::*;

fn disc(h: f64) -> Arc<Grid> {
    let spec = DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap();
    Arc::new(build_grid(&spec, h, &Window::centered(2, 1.0)).unwrap())
}

fn gradient(c: &mut Criterion) {
    let g = disc(1.0 / 64.0);
    let u = Field::from_fn(Arc::clone(&g), |x| 1.0 - x[0] * x[0] - x[1] * x[1]).unwrap();
    let mut group = c.benchmark_group("energy_gradient");
    for p in [1.5, 2.0, 3.0] {
        group.bench_with_input(BenchmarkId::from_parameter(p), &p, |b, &p| {
            b.iter(|| energy_gradient(black_box(&u), p).unwrap())
        });
    }
    group.finish();
}

fn ground_state(c: &mut Criterion) {
    let g = disc(1.0 / 32.0);
    let opts = SolverOptions { tol_residual: 1e-8, restarts: 1, ..Default::default() };
    let mut group = c.benchmark_group("ground_state");
    group.sample_size(10);
    for p in [1.5, 2.0, 3.0] {
        group.bench_with_input(BenchmarkId::from_parameter(p), &p, |b, &p| {
            b.iter(|| solve_ground_state(black_box(&g), p, &opts).unwrap())
        });
    }
    group.finish();
}

fn minmax(c: &mut Criterion) {
    let spec = DomainSpec::interval(0.0, 1.0).unwrap();
    let g = build_grid(&spec, 1.0 / 512.0, &Window::centered(1, 1.0)).unwrap();
    let sq =
        build_grid(&DomainSpec::rect(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(), 1.0 / 32.0, &Window::centered(2, 1.0))
            .unwrap();
    let mut group = c.benchmark_group("courant_fischer");
    group.sample_size(10);
    group.bench_function("interval_k3", |b| b.iter(|| courant_fischer_p2(black_box(&g), 3).unwrap()));
    group.bench_function("square_k4", |b| b.iter(|| courant_fischer_p2(black_box(&sq), 4).unwrap()));
    group.finish();
}

criterion_group!(benches, gradient, ground_state, minmax);
criterion_main!(benches);
