use captree_bench as fx;
use captree_core::yau::first_variation;
use captree_core::{solve_equilibrium, Objective};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn geometry(c: &mut Criterion) {
    let body = fx::smooth_planar(7);
    c.bench_function("planar mean width and quadrature", |b| {
        b.iter(|| {
            let w = black_box(&body).mean_width();
            let q = body.curvature_quadrature().expect("smooth body");
            black_box((w, q.len()))
        })
    });
    let e = fx::ellipsoid();
    c.bench_function("ellipsoid curvature quadrature", |b| {
        b.iter(|| black_box(&e).curvature_quadrature().expect("smooth body").len())
    });
}

fn solves(c: &mut Criterion) {
    let mut g = c.benchmark_group("equilibrium");
    g.sample_size(10);
    let disk = fx::disk();
    g.bench_function("disk p=1.5", |b| {
        b.iter(|| solve_equilibrium(black_box(&disk), 1.5, &fx::grid()).expect("solve").energy)
    });
    let ball = fx::ball3();
    g.bench_function("ball p=2", |b| {
        b.iter(|| solve_equilibrium(black_box(&ball), 2.0, &fx::grid()).expect("solve").energy)
    });
    let ell = fx::ellipsoid();
    g.bench_function("ellipsoid p=2.5", |b| {
        b.iter(|| solve_equilibrium(black_box(&ell), 2.5, &fx::grid()).expect("solve").energy)
    });
    g.finish();
}

fn variation(c: &mut Criterion) {
    let mut g = c.benchmark_group("first variation");
    g.sample_size(10);
    let a = fx::smooth_planar(3);
    let b = fx::smooth_planar(4);
    let h = fx::gaussian();
    let opts = fx::functional_options();
    g.bench_function("planar pcap p=1.5", |bench| {
        bench.iter(|| {
            first_variation(black_box(&a), &b, &h, &Objective::Pcap { p: 1.5 }, &opts)
                .expect("variation")
                .value
        })
    });
    g.finish();
}

criterion_group!(benches, geometry, solves, variation);
criterion_main!(benches);
