use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use helmholtz_bench::{bump, gaussian_density, gradient_field, quadrature};
use helmholtz_core::kernels::grad_e3;
use helmholtz_core::norms::{gagliardo_half, hs_norm_fourier, Lattice};
use helmholtz_core::pipeline::{leray_gradient, normal_trace};

fn kernels(c: &mut Criterion) {
    c.bench_function("grad_e3", |b| b.iter(|| grad_e3(black_box([0.3, -0.2, 0.7]))));
}

fn layer(c: &mut Criterion) {
    let hs = bump();
    let mut group = c.benchmark_group("layer");
    group.sample_size(10);
    for cells in [16, 32] {
        let q = quadrature(&hs, cells);
        let g = gaussian_density(*q.lattice());
        group.bench_with_input(BenchmarkId::new("apply_s", cells), &g, |b, g| b.iter(|| q.apply_s(g).unwrap()));
        group.bench_with_input(BenchmarkId::new("grad_single_layer", cells), &g, |b, g| {
            b.iter(|| q.grad_single_layer(g, black_box([0.1, 0.05, 0.2])).unwrap())
        });
    }
    group.finish();
}

fn norms(c: &mut Criterion) {
    let f = gaussian_density(Lattice::new(5.0, 32).unwrap());
    let flat = helmholtz_core::BoundaryFunction::zero();
    let mut group = c.benchmark_group("norms");
    group.bench_function("hs_norm_fourier", |b| b.iter(|| hs_norm_fourier(&f, 0.5).unwrap()));
    group.sample_size(10);
    group.bench_function("gagliardo_half", |b| b.iter(|| gagliardo_half(&f, &flat)));
    group.finish();
}

fn pipeline(c: &mut Criterion) {
    let hs = bump();
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    for m in [16, 32] {
        let v = gradient_field(&hs, m);
        group.bench_with_input(BenchmarkId::new("leray_gradient", m), &v, |b, v| b.iter(|| leray_gradient(v).unwrap()));
        group.bench_with_input(BenchmarkId::new("normal_trace", m), &v, |b, v| {
            b.iter(|| normal_trace(&hs, v, 1.0).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, kernels, layer, norms, pipeline);
criterion_main!(benches);
