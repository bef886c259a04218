use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pmvc_core::*;

fn demand_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("demand");
    for n in [4usize, 8, 12] {
        let g = random_instance(1, n, 2, Generator::Coverage).unwrap();
        let prices: Vec<PriceVector> = (0..16).map(|s| random_prices(&g, s)).collect();
        group.bench_with_input(BenchmarkId::new("coverage", n), &n, |b, _| {
            b.iter(|| {
                for p in &prices {
                    black_box(demand(g.valuation(), p));
                }
            })
        });
    }
    group.finish();
}

fn equilibrium_enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("pure_ne");
    group.sample_size(10);
    for (k, m) in [(2usize, 3usize), (2, 6), (3, 4)] {
        let g = harmonic_instance(k, m).unwrap();
        group.bench_function(BenchmarkId::new("harmonic", format!("{k}x{m}")), |b| {
            b.iter(|| black_box(pmvc_pure_ne(&g, DEFAULT_PROFILE_CAP).unwrap()))
        });
    }
    let g = counterexample_instance();
    group.bench_function("counterexample", |b| b.iter(|| black_box(pmvc_pure_ne(&g, DEFAULT_PROFILE_CAP).unwrap())));
    group.finish();
}

fn exact_best_response(c: &mut Criterion) {
    let mut group = c.benchmark_group("best_response");
    group.sample_size(10);
    let g = counterexample_instance();
    let mut p = PriceVector::uniform(4, Rational::zero());
    p.set(0, "2.601".parse().unwrap());
    p.set(1, "8.6045".parse().unwrap());
    for method in [BrMethod::TargetSetExact, BrMethod::CandidateSet, BrMethod::Grid] {
        group.bench_function(BenchmarkId::new("counterexample", method), |b| {
            b.iter(|| black_box(vc_best_response(&g, 1, &p, method).unwrap()))
        });
    }
    for n in [6usize, 8] {
        let g = random_instance(3, n, 2, Generator::AdditiveConcave).unwrap();
        let p = random_prices(&g, 3);
        group.bench_function(BenchmarkId::new("exact_random", n), |b| {
            b.iter(|| black_box(vc_best_response(&g, 0, &p, BrMethod::TargetSetExact).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, demand_oracle, equilibrium_enumeration, exact_best_response);
criterion_main!(benches);
