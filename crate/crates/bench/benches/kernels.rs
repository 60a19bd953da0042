use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use normlab::engine::check_thm31;
use normlab::generators::{random_expansive, random_hermitian, random_psd, Stream};
use normlab::harness::{run_campaign, Campaign};
use normlab::linalg::eig_hermitian;
use normlab::{CheckOptions, ClaimId, Instance, ScalarFunction, Term};

fn eigensolver(c: &mut Criterion) {
    let mut group = c.benchmark_group("eig_hermitian");
    for n in [8, 32] {
        let h = random_hermitian(&mut Stream::new(1), n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &h, |b, h| b.iter(|| eig_hermitian(black_box(h))));
    }
    group.finish();
}

fn thm31(c: &mut Criterion) {
    let mut rng = Stream::new(2);
    let terms = (0..4)
        .map(|_| {
            let a = random_psd(&mut rng, 8);
            Term::new(a, random_expansive(&mut rng, 8, 1.5))
        })
        .collect();
    let inst = Instance::new(ScalarFunction::sqrt(), terms);
    let opts = CheckOptions::default();
    c.bench_function("check_thm31 n=8 m=4", |b| b.iter(|| check_thm31(black_box(&inst), &opts)));
}

fn campaign(c: &mut Criterion) {
    let camp = Campaign::new(ClaimId::Thm31, 100, 42);
    let mut group = c.benchmark_group("campaign");
    group.sample_size(10);
    group.bench_function("thm31 100 trials, 1 worker", |b| b.iter(|| run_campaign(black_box(&camp))));
    group.finish();
}

criterion_group!(benches, eigensolver, thm31, campaign);
criterion_main!(benches);
