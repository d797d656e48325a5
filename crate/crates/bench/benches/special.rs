use criterion::{criterion_group, criterion_main, Criterion};
use dirichlet_core::special::{beta_bounds, digamma, ln_beta, ln_gamma, reg_inc_beta};
use std::hint::black_box;

fn special(c: &mut Criterion) {
    c.bench_function("ln_gamma", |b| b.iter(|| ln_gamma(black_box(6.7)).unwrap()));
    c.bench_function("digamma", |b| b.iter(|| digamma(black_box(0.37)).unwrap()));
    c.bench_function("ln_beta", |b| b.iter(|| ln_beta(black_box(1.2), black_box(21.6)).unwrap()));
    c.bench_function("reg_inc_beta", |b| {
        b.iter(|| reg_inc_beta(black_box(0.003), black_box(1.2), black_box(21.6)).unwrap())
    });
    c.bench_function("beta_bounds", |b| b.iter(|| beta_bounds(black_box(2.4), black_box(19.2)).unwrap()));
}

criterion_group!(benches, special);
criterion_main!(benches);
