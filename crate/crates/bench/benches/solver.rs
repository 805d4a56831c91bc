use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use polariton_bench::{period_exponent, resonant};
use polariton_core::{assemble, expm, stationary_state};

fn bench_expm(c: &mut Criterion) {
    let mut group = c.benchmark_group("expm");
    for m_o in [4, 8] {
        let a = period_exponent(m_o);
        group.bench_with_input(BenchmarkId::from_parameter(m_o), &a, |b, a| b.iter(|| expm::expm(black_box(a))));
    }
    group.finish();
}

fn bench_assemble(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble");
    for m_o in [4, 8] {
        let spec = resonant(m_o);
        group.bench_with_input(BenchmarkId::from_parameter(m_o), &spec, |b, s| b.iter(|| assemble(black_box(s))));
    }
    group.finish();
}

fn bench_stationary(c: &mut Criterion) {
    let mut group = c.benchmark_group("stationary_state");
    group.sample_size(10);
    for m_o in [4, 8] {
        let spec = resonant(m_o);
        group.bench_with_input(BenchmarkId::from_parameter(m_o), &spec, |b, s| {
            b.iter(|| stationary_state(black_box(s)))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_expm, bench_assemble, bench_stationary);
criterion_main!(benches);
