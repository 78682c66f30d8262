use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use padmm::nalgebra::{DMatrix, DVector};
use padmm::problems::{
    build_scad_mcp_regression, build_slr_decomposition, gen_slr_instance, gen_sparse_regression, rng_from_seed,
    ScadMcpRegressionConfig, SlrConfig,
};
use padmm::prox::{project_rank, scad_prox};
use padmm::{padmm_iterate, solve, Iterate, LinearOperator, Penalty, ProblemSpec, ScadParams, SolverConfig};
use rand::Rng;

fn regression(n: usize) -> (ProblemSpec, SolverConfig) {
    let m = (2 * n) / 5;
    let inst = gen_sparse_regression(m, n, n / 10, 0.01, 42).unwrap();
    let penalty = Penalty::Scad(ScadParams::new(0.5, 3.7).unwrap());
    let mut cfg = ScadMcpRegressionConfig::new(inst.a, inst.y0, 1.0, penalty);
    cfg.tau = 1.01 * padmm::oracles::gram_max_eigenvalue(&cfg.a_meas);
    let mut solver = SolverConfig::new(4.0, 1.0, LinearOperator::zeros(m));
    solver.tol_step = 1e-8;
    (build_scad_mcp_regression(&cfg, &solver).unwrap(), solver)
}

fn slr(side: usize) -> (ProblemSpec, SolverConfig) {
    let inst = gen_slr_instance(side, side, 2, 2 * side / 3, 42).unwrap();
    let solver = SolverConfig::new(1.0, 1.0, LinearOperator::zeros(side * side));
    (build_slr_decomposition(&SlrConfig::new(inst.a, 2, 2 * side / 3, 0.1), &solver).unwrap(), solver)
}

fn bench_scad_prox(c: &mut Criterion) {
    let p = ScadParams::new(0.5, 3.7).unwrap();
    let mut rng = rng_from_seed(1);
    let v: Vec<f64> = (0..1024).map(|_| rng.random_range(-4.0..4.0)).collect();
    c.bench_function("scad_prox_1024", |b| {
        b.iter(|| v.iter().map(|&t| scad_prox(black_box(t), p, 4.0)).sum::<f64>())
    });
}

fn bench_project_rank(c: &mut Criterion) {
    let mut group = c.benchmark_group("project_rank");
    for side in [20, 40] {
        let mut rng = rng_from_seed(2);
        let x = DMatrix::from_fn(side, side, |_, _| rng.random_range(-1.0..1.0));
        group.bench_with_input(BenchmarkId::from_parameter(side), &x, |b, x| b.iter(|| project_rank(black_box(x), 2)));
    }
    group.finish();
}

fn bench_padmm_iterate(c: &mut Criterion) {
    let mut group = c.benchmark_group("padmm_iterate");
    let (p, s) = regression(50);
    let start = Iterate::zeros(&p);
    group.bench_function("scad_regression_20x50", |b| b.iter(|| padmm_iterate(&p, &s, black_box(&start)).unwrap()));
    let (p, s) = slr(30);
    let x = vec![DVector::zeros(900), DVector::zeros(900)];
    let start = Iterate::from_point(x, DVector::zeros(900), DVector::zeros(900));
    group.bench_function("slr_30x30", |b| b.iter(|| padmm_iterate(&p, &s, black_box(&start)).unwrap()));
    group.finish();
}

fn bench_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    let (p, s) = regression(50);
    group.bench_function("scad_regression_20x50", |b| b.iter(|| solve(&p, &s, None).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_scad_prox, bench_project_rank, bench_padmm_iterate, bench_solve);
criterion_main!(benches);
