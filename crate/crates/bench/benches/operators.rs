use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fbound_core::averaging::{m_n_apply, m_n_coeff_via, CoeffRoute, VertexFunction};
use fbound_core::boundary::{Cylinder, StepFunction};
use fbound_core::equidistribution::pair_sum;
use fbound_core::word::{Rank, ReducedWord};

fn word(s: &str) -> ReducedWord {
    s.parse().unwrap()
}

fn indicator(r: Rank, s: &str) -> StepFunction {
    StepFunction::indicator(r, &Cylinder::new(word(s))).unwrap()
}

fn apply(c: &mut Criterion) {
    let r = Rank::new(2).unwrap();
    let f = VertexFunction::chi(word("a")).unwrap();
    let g = indicator(r, "ab");
    let mut group = c.benchmark_group("m_n_apply");
    for n in [4, 6, 8] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| m_n_apply(&f, black_box(n), &g).unwrap())
        });
    }
    group.finish();
}

fn coeff(c: &mut Criterion) {
    let r = Rank::new(2).unwrap();
    let f = VertexFunction::chi(word("a")).unwrap();
    let (g, h) = (indicator(r, "b"), indicator(r, "a"));
    let mut group = c.benchmark_group("m_n_coeff");
    for n in [6, 8] {
        for (name, route) in [("grouped", CoeffRoute::Grouped), ("enumerated", CoeffRoute::Enumerated)] {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| m_n_coeff_via(&f, black_box(n), &g, &h, route).unwrap())
            });
        }
    }
    group.bench_function("grouped/20", |b| {
        b.iter(|| m_n_coeff_via(&f, black_box(20), &g, &h, CoeffRoute::Grouped).unwrap())
    });
    group.finish();
}

fn pairs(c: &mut Criterion) {
    let r = Rank::new(2).unwrap();
    let f = VertexFunction::chi(word("a")).unwrap();
    c.bench_function("pair_sum/chi_a/n14", |b| b.iter(|| pair_sum(r, &f, &f, black_box(14)).unwrap()));
}

criterion_group!(benches, apply, coeff, pairs);
criterion_main!(benches);
