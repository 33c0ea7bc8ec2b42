//! Sequential vs parallel throughput on the per-point hot paths.
//!
//! The workloads here are synthetic: far more training points than the
//! benchmark problems use, so the data-parallel fan-out has something to
//! chew on. Reductions are sequential either way, which keeps the two paths
//! bit-identical; these benches measure what that costs and where it pays.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fibfde::expr::parse;
use fibfde::loss::{CostModel, ProblemSpec};
use fibfde::model::BasisCache;
use fibfde::model::Network;
use fibfde::optimizer::init_weights;
use std::hint::black_box;

const BASIS: usize = 24;
const ORDERS: [f64; 2] = [0.5, 1.25];

fn synthetic_spec(points: usize) -> ProblemSpec {
    let rhs = parse("x^2 + 2*x^(2-0.5)/gamma(3-0.5) - d1 - y").unwrap();
    ProblemSpec::new(
        ORDERS.to_vec(),
        rhs,
        vec![(0, 0.0), (1, 0.0)],
        (0.0, 1.0),
        points,
        BASIS,
    )
    .unwrap()
}

fn bench_cache_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("cache_build");
    group.sample_size(20);
    for points in [1024usize, 16384] {
        let grid: Vec<f64> = (1..=points).map(|p| p as f64 / points as f64).collect();
        group.bench_with_input(BenchmarkId::new("seq", points), &grid, |b, grid| {
            b.iter(|| BasisCache::build_seq(BASIS, black_box(grid), &ORDERS, 2).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("par", points), &grid, |b, grid| {
            b.iter(|| BasisCache::build_par(BASIS, black_box(grid), &ORDERS, 2).unwrap())
        });
    }
    group.finish();
}

fn bench_point_rows(c: &mut Criterion) {
    let mut group = c.benchmark_group("point_rows");
    group.sample_size(20);
    for points in [1024usize, 16384] {
        let spec = synthetic_spec(points);
        let model = CostModel::new(&spec).unwrap();
        let net = Network::new(init_weights(BASIS, 42));
        group.bench_with_input(BenchmarkId::new("seq", points), &(), |b, _| {
            b.iter(|| model.rows_seq(black_box(&net)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("par", points), &(), |b, _| {
            b.iter(|| model.rows_par(black_box(&net)).unwrap())
        });
    }
    group.finish();
}

fn bench_residuals(c: &mut Criterion) {
    let mut group = c.benchmark_group("residuals");
    group.sample_size(20);
    for points in [1024usize, 16384] {
        let spec = synthetic_spec(points);
        let model = CostModel::new(&spec).unwrap();
        let net = Network::new(init_weights(BASIS, 42));
        group.bench_with_input(BenchmarkId::new("seq", points), &(), |b, _| {
            b.iter(|| model.residuals_seq(black_box(&net)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("par", points), &(), |b, _| {
            b.iter(|| model.residuals_par(black_box(&net)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_cache_build, bench_point_rows, bench_residuals);
criterion_main!(benches);
