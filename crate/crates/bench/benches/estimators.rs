use anw_bench::sharpen_data;
use anw_core::{
    anw_fit, dsanw_fit, nw_fit, tune, uniform_grid, AnwConfig, KernelFamily, KernelSpec,
    TuningOptions,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn fits(c: &mut Criterion) {
    let grid = uniform_grid(0.0, 1.0, 1001);
    let mut group = c.benchmark_group("fit");
    for n in [100, 500, 2000] {
        let data = sharpen_data(n, 1);
        let spec = KernelSpec::gaussian(0.03).unwrap();
        let cfg = AnwConfig::new(spec, 100.0).unwrap();
        group.bench_with_input(BenchmarkId::new("nw", n), &data, |b, d| {
            b.iter(|| nw_fit(black_box(d), &spec, &grid).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("anw", n), &data, |b, d| {
            b.iter(|| anw_fit(black_box(d), &cfg, &grid).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("dsanw_m2", n), &data, |b, d| {
            b.iter(|| dsanw_fit(black_box(d), &cfg, 2, &grid).unwrap())
        });
    }
    group.finish();
}

fn tuning(c: &mut Criterion) {
    let data = sharpen_data(500, 2);
    let h_grid = [0.01, 0.02, 0.03, 0.05, 0.08];
    let lambdas = [1.0, 10.0, 100.0, 1000.0];
    let opts = TuningOptions::default();
    let mut group = c.benchmark_group("tune");
    group.sample_size(10);
    group.bench_function("grid_5x4_n500", |b| {
        b.iter(|| {
            tune(
                black_box(&data),
                KernelFamily::Gaussian,
                &h_grid,
                &lambdas,
                &opts,
            )
            .unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, fits, tuning);
criterion_main!(benches);
