use congestion_core::diagnostics::{glimm, GlimmWeights};
use congestion_core::scenarios::{
    build_reference, perturb, PerturbationSpec, RandomPerturbation, ScenarioSpec,
};
use congestion_core::wft::{discretize_initial_datum, run};
use congestion_core::{Datum, EosParams, SimConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn perturbed(eos: &EosParams, waves: usize) -> Datum {
    let spec = ScenarioSpec::single(2.0, 0.25);
    let reference = build_reference(&spec, eos).unwrap();
    let pert = PerturbationSpec {
        random: Some(RandomPerturbation {
            free_count: waves,
            congested_count: waves,
            ..Default::default()
        }),
        ..Default::default()
    };
    perturb(&reference, &pert, spec.delta, 3, eos)
        .unwrap()
        .datum
}

fn tracking(c: &mut Criterion) {
    let mut g = c.benchmark_group("run");
    g.sample_size(10);
    for eps in [1e-1, 1e-2, 1e-3] {
        let eos = EosParams::new(1.0, eps, 2.0, 2.0).unwrap();
        let datum = perturbed(&eos, 3);
        let sim = SimConfig {
            rho: 0.1 * eps * 0.05,
            t_final: 0.5,
            ..Default::default()
        };
        g.bench_with_input(BenchmarkId::from_parameter(eps), &datum, |b, d| {
            b.iter(|| run(d, &sim, &eos).unwrap())
        });
    }
    g.finish();
}

fn functional(c: &mut Criterion) {
    let eos = EosParams::new(1.0, 1e-2, 2.0, 2.0).unwrap();
    let datum = perturbed(&eos, 6);
    let sim = SimConfig {
        rho: 5e-5,
        ..Default::default()
    };
    let config = discretize_initial_datum(&datum, &sim, &eos).unwrap();
    let weights = GlimmWeights::default();
    c.bench_function("glimm_functional", |b| b.iter(|| glimm(&config, &weights)));
}

criterion_group!(benches, tracking, functional);
criterion_main!(benches);
