use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use thermocoding::append::{append_fidelity_simulated, synthetic_setup};
use thermocoding::coding::average_fidelity_ideal;
use thermocoding::measure::{average_fidelity_thermal, haar_average_fidelity_mc};
use thermocoding::source::four_string_epsilon;
use thermocoding::timing::{clock_limited_fidelity, double_dephase, ClockSpec, GeneratorSpec};
use thermocoding::{CodingSetup, PlanOptions, QubitSource};

fn example() -> CodingSetup {
    let src = QubitSource::zero_plus();
    let eps = four_string_epsilon(&src).unwrap();
    CodingSetup::new(src, 3, eps, &PlanOptions::default()).unwrap()
}

fn fidelities(c: &mut Criterion) {
    let s = example();
    let ens = s.ensemble().unwrap();
    c.bench_function("average_fidelity_ideal/n3", |b| {
        b.iter(|| average_fidelity_ideal(black_box(&ens), &s.spec, &s.guess).unwrap())
    });
    c.bench_function("average_fidelity_thermal/n3", |b| {
        b.iter(|| average_fidelity_thermal(black_box(&ens), &s.spec, 0.8, &s.guess).unwrap())
    });
}

fn haar_mc(c: &mut Criterion) {
    let mut g = c.benchmark_group("haar_average_fidelity_mc");
    g.sample_size(10);
    for n in [2usize, 3, 4] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| haar_average_fidelity_mc(n, 0.8, 1000, 7).unwrap())
        });
    }
    g.finish();
}

fn clocks(c: &mut Criterion) {
    let s = example();
    let clock = ClockSpec::with_sigma(0.2).unwrap();
    let gen = GeneratorSpec::from_plan(&s.plan, &clock).unwrap();
    let ens = s.ensemble().unwrap();
    let (psi, _) = &ens.messages[3];
    c.bench_function("clock_limited_fidelity/n3", |b| {
        b.iter(|| clock_limited_fidelity(black_box(psi), &s.spec, &gen, &clock).unwrap())
    });
    let rho = thermocoding::DensityMatrix::new(psi.outer()).unwrap();
    c.bench_function("double_dephase/n3", |b| b.iter(|| double_dephase(black_box(&rho), &gen, &clock).unwrap()));
}

fn append(c: &mut Criterion) {
    let mut g = c.benchmark_group("append_fidelity_simulated");
    for j in [1usize, 3] {
        let s = synthetic_setup(j).unwrap();
        let ens = s.ensemble().unwrap();
        let psi = ens
            .messages
            .iter()
            .map(|(m, _)| m)
            .find(|m| append_fidelity_simulated(m, &s.plan, 0.05).is_ok())
            .unwrap()
            .clone();
        g.bench_with_input(BenchmarkId::new("j", j), &j, |b, _| {
            b.iter(|| append_fidelity_simulated(black_box(&psi), &s.plan, 0.05).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, fidelities, haar_mc, clocks, append);
criterion_main!(benches);
