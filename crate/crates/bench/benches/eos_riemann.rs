use std::hint::black_box;

use congestion_core::eos::{pressure, specific_volume};
use congestion_core::riemann::{rarefaction_integral, solve_riemann};
use congestion_core::{EosParams, State};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn law(eps: f64) -> EosParams {
    EosParams::new(1.0, eps, 2.0, 2.0).unwrap()
}

fn inversion(c: &mut Criterion) {
    let mut g = c.benchmark_group("specific_volume");
    for eps in [1e-2, 1e-4, 1e-6] {
        let eos = law(eps);
        let ps: Vec<f64> = (0..64)
            .map(|k| 10f64.powf(-3.0 + 6.0 * k as f64 / 63.0))
            .collect();
        g.bench_with_input(BenchmarkId::from_parameter(eps), &ps, |b, ps| {
            b.iter(|| {
                ps.iter()
                    .map(|&p| specific_volume(black_box(p), &eos).unwrap())
                    .sum::<f64>()
            })
        });
    }
    g.finish();

    let eos = law(1e-3);
    c.bench_function("pressure", |b| {
        b.iter(|| pressure(black_box(1.2), &eos).unwrap())
    });
    c.bench_function("rarefaction_integral", |b| {
        b.iter(|| rarefaction_integral(black_box(0.1), black_box(50.0), &eos).unwrap())
    });
}

fn riemann(c: &mut Criterion) {
    let eos = law(1e-3);
    let cases = [
        ("free_free", State::new(0.2, 0.1), State::new(0.3, -0.1)),
        (
            "across_interface",
            State::new(0.25, 0.0),
            State::new(2.0, 0.0),
        ),
        (
            "congested_collision",
            State::new(2.0, 0.5),
            State::new(2.0, -0.5),
        ),
    ];
    let mut g = c.benchmark_group("solve_riemann");
    for (name, l, r) in cases {
        g.bench_function(name, |b| {
            b.iter(|| solve_riemann(black_box(l), black_box(r), &eos).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, inversion, riemann);
criterion_main!(benches);
