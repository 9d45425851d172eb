use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fham_bench::{bump, operator};
use fham_core::dual::eval_j;
use fham_core::hamiltonian::conjugate_field;
use fham_core::lane_emden::eval_i;
use fham_core::{Backend, DiscreteOperator, Grid1D, HamiltonianSpec};
use std::hint::black_box;

fn assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble");
    for n in [128, 256, 512] {
        let grid = Grid1D::new(-1.0, 1.0, n).unwrap();
        group.bench_with_input(BenchmarkId::new("restricted", n), &grid, |b, g| {
            b.iter(|| DiscreteOperator::assemble(g, 0.3, Backend::Restricted).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("spectral", n), &grid, |b, g| {
            b.iter(|| DiscreteOperator::assemble(g, 0.3, Backend::Spectral).unwrap())
        });
    }
    group.finish();
}

fn apply_and_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("operator");
    for n in [256, 1024] {
        let op = operator(n, 0.3);
        let u = bump(&op);
        group.bench_with_input(BenchmarkId::new("apply", n), &u, |b, u| b.iter(|| op.apply(black_box(u)).unwrap()));
        group.bench_with_input(BenchmarkId::new("solve", n), &u, |b, u| b.iter(|| op.solve(black_box(u)).unwrap()));
    }
    group.finish();
}

fn functionals(c: &mut Criterion) {
    let op = operator(257, 0.3);
    let u = bump(&op);
    let le = HamiltonianSpec::lane_emden(2.0, 3.0).unwrap();
    let coupled = HamiltonianSpec::coupled_symmetric(2.0, 3.0, 0.1).unwrap();
    c.bench_function("conjugate_field/lane_emden", |b| {
        b.iter(|| conjugate_field(&le, &op.grid, black_box(&u), black_box(&u)).unwrap())
    });
    c.bench_function("conjugate_field/coupled", |b| {
        b.iter(|| conjugate_field(&coupled, &op.grid, black_box(&u), black_box(&u)).unwrap())
    });
    c.bench_function("eval_i", |b| b.iter(|| eval_i(&op, 2.0, 3.0, black_box(&u)).unwrap()));
    c.bench_function("eval_j", |b| b.iter(|| eval_j(&op, &le, black_box(&u), black_box(&u)).unwrap()));
}

criterion_group!(benches, assembly, apply_and_solve, functionals);
criterion_main!(benches);
