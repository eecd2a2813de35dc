use criterion::{criterion_group, criterion_main, Criterion};
use ghartree_bench::{gaussian, params_1d, params_3d};
use ghartree_core::evolution::Stepper;
use ghartree_core::observables::Observer;
use ghartree_core::IntegratorConfig;
use std::hint::black_box;

fn strang(c: &mut Criterion) {
    let mut group = c.benchmark_group("strang-step");
    let f = gaussian(1, 40.0, 1024);
    let params = params_1d();
    let mut stepper = Stepper::new(&f, &params, &IntegratorConfig::new(1e-3, 1.0)).unwrap();
    group.bench_function("1d/1024", |b| {
        b.iter(|| stepper.step(black_box(&f), 0.0, 1e-3).unwrap())
    });

    let f = gaussian(3, 16.0, 32);
    let params = params_3d().with_b(4.0).unwrap();
    let mut config = IntegratorConfig::new(1e-3, 0.25);
    config.nonautonomous = Some(4.0);
    let mut stepper = Stepper::new(&f, &params, &config).unwrap();
    group.sample_size(20);
    group.bench_function("3d-nonautonomous/32", |b| {
        b.iter(|| stepper.step(black_box(&f), 0.1, 1e-3).unwrap())
    });
    group.finish();
}

fn observables(c: &mut Criterion) {
    let mut group = c.benchmark_group("observables");
    group.sample_size(10);
    let f = gaussian(1, 40.0, 1024);
    let obs = Observer::new(f.grid(), &params_1d()).unwrap();
    group.bench_function("record-1d/1024", |b| b.iter(|| obs.record(black_box(&f)).unwrap()));
    let f = gaussian(3, 16.0, 32);
    let obs = Observer::new(f.grid(), &params_3d()).unwrap();
    group.bench_function("record-3d/32", |b| b.iter(|| obs.record(black_box(&f)).unwrap()));
    group.finish();
}

criterion_group!(benches, strang, observables);
criterion_main!(benches);
