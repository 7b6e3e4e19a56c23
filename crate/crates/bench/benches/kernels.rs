use std::hint::black_box;

use chernoff_bench::{heat_step, jump_step, killed_step, sine};
use chernoff_core::feynman::{feynman_estimate, MCSpec};
use chernoff_core::fractional::{sample_inverse_subordinator, sample_stable};
use chernoff_core::rng::substream;
use chernoff_core::{apply_step, chernoff_iterate, InitialCondition, QuadratureSpec, SubordinationMeasure};
use criterion::{criterion_group, criterion_main, Criterion, Throughput};

fn step(c: &mut Criterion) {
    let quad = QuadratureSpec::default();
    let mut g = c.benchmark_group("apply_step");
    for (name, s) in [("heat", heat_step()), ("jumps", jump_step()), ("killed", killed_step())] {
        g.bench_function(name, |b| b.iter(|| apply_step(&s, 0.1, &sine, black_box(&[1.0]), &quad).unwrap()));
    }
    g.finish();

    let s = killed_step();
    let grid: Vec<f64> = (1..16).map(|i| 0.2 * i as f64).collect();
    c.bench_function("chernoff_iterate/killed n=32", |b| {
        b.iter(|| chernoff_iterate(&s, 32, 0.5, &InitialCondition::sine(), black_box(&grid), &quad).unwrap())
    });
}

fn chains(c: &mut Criterion) {
    let samples = 20_000;
    let points = vec![vec![1.0]];
    let mut g = c.benchmark_group("feynman_estimate");
    g.sample_size(10);
    g.throughput(Throughput::Elements((samples * 32) as u64));
    for (name, s) in [("heat", heat_step()), ("jumps", jump_step()), ("killed", killed_step())] {
        let mc = MCSpec::new(samples, 7);
        g.bench_function(name, |b| b.iter(|| feynman_estimate(&s, 32, 0.5, &sine, black_box(&points), &mc).unwrap()));
    }
    g.finish();
}

fn subordinators(c: &mut Criterion) {
    let mut rng = substream(11, &[]);
    c.bench_function("sample_stable/beta=0.5", |b| b.iter(|| sample_stable(black_box(0.5), &mut rng)));
    let single = SubordinationMeasure::dirac(0.5).unwrap();
    let mixed = SubordinationMeasure::new(vec![(0.3, 0.5), (0.7, 0.5)]).unwrap();
    c.bench_function("sample_inverse_subordinator/single", |b| {
        b.iter(|| sample_inverse_subordinator(&single, black_box(1.0), &mut rng))
    });
    c.bench_function("sample_inverse_subordinator/mixture", |b| {
        b.iter(|| sample_inverse_subordinator(&mixed, black_box(1.0), &mut rng))
    });
}

criterion_group!(benches, step, chains, subordinators);
criterion_main!(benches);
