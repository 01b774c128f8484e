use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use wunt_bench::{frozen_config, y3_draw};
use wunt_core::estimator::{estimate_kernel, estimate_projection};
use wunt_core::UniformTransformer;

const SIZES: [usize; 3] = [1000, 2000, 5000];

fn transformer(c: &mut Criterion) {
    let mut group = c.benchmark_group("adaptive_transformer");
    for n in [1000, 10_000] {
        let ds = y3_draw(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &ds, |b, ds| {
            b.iter(|| UniformTransformer::fit_adaptive(black_box(ds), 0.01).unwrap())
        });
    }
    group.finish();
}

fn estimators(c: &mut Criterion) {
    let cfg = frozen_config(SIZES[0]);
    let mut group = c.benchmark_group("estimators");
    group.sample_size(10);
    for n in SIZES {
        let ds = y3_draw(n);
        let t = UniformTransformer::fit_adaptive(&ds, cfg.margin).unwrap();
        let (n0, n1, d) = (ds.n_control(), ds.n_treated(), ds.dim());
        let kernel = cfg.product_kernel(n0, n1, d).unwrap();
        let basis = cfg.projection_basis(n0, n1, d).unwrap();
        group.bench_with_input(BenchmarkId::new("kernel", n), &ds, |b, ds| {
            b.iter(|| estimate_kernel(black_box(ds), &t, &kernel).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("projection", n), &ds, |b, ds| {
            b.iter(|| estimate_projection(black_box(ds), &t, &basis).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, transformer, estimators);
criterion_main!(benches);
