use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use lca_bench::fixture;
use lca_core::{estimate_delta, ista_solve, simulate, udot, IstaConfig};
use ndarray::Array1;

fn bench_simulate(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate_to_convergence");
    group.sample_size(10);
    for (m, s) in [(64usize, 3usize), (256, 5)] {
        let (problem, _, spec, config) = fixture(m, s);
        group.bench_with_input(BenchmarkId::from_parameter(format!("m{m}_s{s}")), &m, |b, _| {
            b.iter(|| {
                let traj = simulate(&problem, &spec, &config, Array1::zeros(problem.n())).unwrap();
                black_box(traj.final_state.t)
            })
        });
    }
    group.finish();
}

fn bench_ista(c: &mut Criterion) {
    let mut group = c.benchmark_group("ista_to_convergence");
    group.sample_size(10);
    for (m, s) in [(64usize, 3usize), (256, 5)] {
        let (problem, _, _, _) = fixture(m, s);
        group.bench_with_input(BenchmarkId::from_parameter(format!("m{m}_s{s}")), &m, |b, _| {
            b.iter(|| {
                let result = ista_solve(&problem, &IstaConfig::default()).unwrap();
                black_box(result.iters)
            })
        });
    }
    group.finish();
}

fn bench_rhs(c: &mut Criterion) {
    let (problem, _, spec, config) = fixture(256, 5);
    let u = Array1::from_shape_fn(problem.n(), |i| 0.05 * ((i % 13) as f64 - 6.0));
    c.bench_function("udot_m256", |b| {
        b.iter(|| black_box(udot(&problem, &spec, &u, config.tau)))
    });
}

fn bench_delta(c: &mut Criterion) {
    let (problem, truth, _, _) = fixture(256, 5);
    c.bench_function("estimate_delta_s5", |b| {
        b.iter(|| black_box(estimate_delta(problem.dictionary(), &truth.support).unwrap()))
    });
}

criterion_group!(benches, bench_simulate, bench_ista, bench_rhs, bench_delta);
criterion_main!(benches);
