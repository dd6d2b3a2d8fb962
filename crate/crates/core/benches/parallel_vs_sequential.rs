use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qubit_manifolds::dynamics::evolve_dissipative;
use qubit_manifolds::geometry::{christoffel_from_metric, prop2_metric};
use qubit_manifolds::parallel;
use qubit_manifolds::{ActionAnglePoint, DissipationParams, FieldParams};
use std::hint::black_box;

fn ensemble(c: &mut Criterion) {
    let p0 = ActionAnglePoint::new(0.2, 0.4).unwrap();
    let a = FieldParams::new(1.0, 0.0, 0.0);
    let d = DissipationParams {
        gamma: 0.05,
        friction_factor: 1.0,
        noise_sigma: 0.1,
        noise_tau: 1.0,
        seed: 0,
    };
    let seeds: Vec<u64> = (0..64).collect();
    let run = |&seed: &u64| {
        let d = DissipationParams { seed, ..d };
        evolve_dissipative(&p0, &a, &d, 1e-2, 2.0).map(|t| t.len())
    };
    let mut g = c.benchmark_group("ensemble_64");
    g.sample_size(10);
    g.bench_function("sequential", |b| {
        b.iter(|| black_box(parallel::map_sequential(&seeds, run)))
    });
    #[cfg(feature = "parallel")]
    g.bench_function("parallel", |b| {
        b.iter(|| black_box(parallel::map_parallel(&seeds, run)))
    });
    g.finish();
}

fn christoffel_grid(c: &mut Criterion) {
    let m = prop2_metric();
    let mut g = c.benchmark_group("christoffel_grid");
    for n in [256usize, 4096] {
        let grid: Vec<f64> = (0..n)
            .map(|k| -0.95 + 1.9 * (k as f64 + 0.5) / n as f64)
            .collect();
        let eval = |&x: &f64| christoffel_from_metric(&m, x).map(|c| c.max_imag()).ok();
        g.bench_with_input(BenchmarkId::new("sequential", n), &grid, |b, grid| {
            b.iter(|| black_box(parallel::map_sequential(grid, eval)))
        });
        #[cfg(feature = "parallel")]
        g.bench_with_input(BenchmarkId::new("parallel", n), &grid, |b, grid| {
            b.iter(|| black_box(parallel::map_parallel(grid, eval)))
        });
    }
    g.finish();
}

criterion_group!(benches, ensemble, christoffel_grid);
criterion_main!(benches);
