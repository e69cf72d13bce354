//! Parallel vs sequential kernel dispatch on the sizes where it matters:
//! per-node maps above the parallel threshold, and the divergence-form
//! Laplacian on large circle/torus grids.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::f64::consts::TAU;
use std::hint::black_box;
use wpme_core::exec::{map_indexed_par, map_indexed_seq};
use wpme_core::ops::witten_laplacian;
use wpme_core::{Manifold, ScalarField, Weight};

fn bench_map_dispatch(c: &mut Criterion) {
    let mut group = c.benchmark_group("map_indexed");
    for &n in &[65_536usize, 262_144] {
        let xs: Vec<f64> = (0..n).map(|i| i as f64 * TAU / n as f64).collect();
        group.bench_with_input(BenchmarkId::new("seq", n), &n, |b, &n| {
            b.iter(|| map_indexed_seq(n, |i| black_box((xs[i].sin() * xs[i].cos()).exp())))
        });
        group.bench_with_input(BenchmarkId::new("par", n), &n, |b, &n| {
            b.iter(|| map_indexed_par(n, |i| black_box((xs[i].sin() * xs[i].cos()).exp())))
        });
    }
    group.finish();
}

fn bench_laplacian(c: &mut Criterion) {
    let mut group = c.benchmark_group("witten_laplacian");
    let circle = Manifold::circle(TAU, 65_536, Weight::SinFirstCoord { amplitude: 0.3 })
        .expect("circle builds");
    let torus = Manifold::torus(
        [TAU, TAU],
        [256, 256],
        Weight::SinFirstCoord { amplitude: 0.3 },
    )
    .expect("torus builds");
    for (label, manifold) in [("circle-65536", &circle), ("torus-256x256", &torus)] {
        let f = ScalarField::from_fn(manifold, |x| {
            2.0 + x[0].sin() + x.get(1).map_or(0.0, |y| y.cos())
        });
        group.bench_function(label, |b| b.iter(|| black_box(witten_laplacian(&f))));
    }
    group.finish();
}

criterion_group!(benches, bench_map_dispatch, bench_laplacian);
criterion_main!(benches);
