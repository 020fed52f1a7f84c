use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64 as C64;
use std::hint::black_box;
use wavetrace::billiards::{build_orbit, find_periodic_orbits, PolygonConfig, SeedSpec, NEWTON_TOL};
use wavetrace::geometry::BoundaryCurve;
use wavetrace::layers::{assemble, OperatorKind};
use wavetrace::specfun::{hankel01, hankel1_seq};
use wavetrace::trace::{spectral_trace_disc, TraceWindow};
use wavetrace::waveinv::wave_invariants;
use wavetrace::{Scaling, SpectralParameter};

fn hankel(c: &mut Criterion) {
    let zs: Vec<C64> = (1..=64).map(|i| C64::new(0.7 * i as f64, 0.05 * i as f64)).collect();
    c.bench_function("hankel01 x64", |b| {
        b.iter(|| zs.iter().map(|&z| hankel01(black_box(z)).1).sum::<C64>())
    });
    c.bench_function("hankel1_seq n=200", |b| b.iter(|| hankel1_seq(200, black_box(C64::new(150.0, 1.0)))));
}

fn assembly(c: &mut Criterion) {
    let curve = BoundaryCurve::ellipse(2.0, 1.0).unwrap();
    let sp = SpectralParameter::constant(20.0, 0.5).unwrap();
    let mut g = c.benchmark_group("assemble");
    g.sample_size(10);
    for n in [256, 512] {
        g.bench_function(format!("N ellipse n={n}"), |b| b.iter(|| assemble(&curve, &sp, n, OperatorKind::N).unwrap()));
    }
    g.finish();
}

fn orbits(c: &mut Criterion) {
    let ellipse = BoundaryCurve::ellipse(2.0, 1.0).unwrap();
    let mut g = c.benchmark_group("orbits");
    g.sample_size(10);
    g.bench_function("ellipse M=3 grid search", |b| {
        b.iter(|| find_periodic_orbits(&ellipse, 3, &SeedSpec::default(), NEWTON_TOL).unwrap())
    });
    g.finish();
}

fn traces(c: &mut Criterion) {
    let w = TraceWindow::new(4.0, 0.25, 0.0, Scaling::Constant).unwrap();
    // warm the zero table
    spectral_trace_disc(&w, 100.0, 200.0).unwrap();
    let mut g = c.benchmark_group("trace");
    g.sample_size(10);
    g.bench_function("disc k=100", |b| b.iter(|| spectral_trace_disc(&w, black_box(100.0), 200.0).unwrap()));
    let curve = BoundaryCurve::ellipse(2.0, 1.0).unwrap();
    let per = curve.total_length();
    let orbit = build_orbit(&curve, &PolygonConfig::new(vec![0.25 * per, 0.75 * per])).unwrap();
    g.bench_function("bouncing-ball invariants J=3", |b| {
        b.iter(|| wave_invariants(&curve, &orbit, 1, 3, 0.0, 0.75).unwrap())
    });
    g.finish();
}

criterion_group!(benches, hankel, assembly, orbits, traces);
criterion_main!(benches);
