//! Benchmarks for the hot paths: the stateless game solvers, the nested
//! optimizer on the deterministic catalog channels, the codec verification
//! walk, and a depth-2 oracle query.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use zecap_core::capacity::{self, SolverOptions};
use zecap_core::channel::{builtin, StatelessChannel};
use zecap_core::codec::{plan_bit_codec_fb, verify_bit_codec, PlanSizing, VerifyMode};
use zecap_core::oracle::{fb_zero_error_feasible, OracleLimits, SiMode};

fn pentagon() -> StatelessChannel {
    let mut support = vec![false; 25];
    for x in 0..5 {
        support[x * 5 + x] = true;
        support[x * 5 + (x + 1) % 5] = true;
    }
    StatelessChannel::new("pentagon", 5, 5, support, None).unwrap()
}

fn bench_shannon_game(c: &mut Criterion) {
    let ch = pentagon();
    c.bench_function("shannon_fb_capacity/pentagon", |b| {
        b.iter(|| capacity::shannon_fb_capacity(black_box(&ch)).unwrap().value)
    });
}

fn bench_ahlswede(c: &mut Criterion) {
    let ch = builtin("mod3").unwrap().as_stateless().unwrap();
    let opts = SolverOptions::default();
    c.bench_function("ahlswede_capacity/mod3", |b| {
        b.iter(|| {
            capacity::ahlswede_capacity(black_box(&ch), None, &opts)
                .unwrap()
                .value
        })
    });
}

fn bench_acausal_optimizer(c: &mut Criterion) {
    let ch = builtin("gp-table1").unwrap();
    let opts = SolverOptions {
        force_optimizer: true,
        ..Default::default()
    };
    c.bench_function("acausal_fb_capacity/gp-table1-forced", |b| {
        b.iter(|| {
            capacity::acausal_fb_capacity(black_box(&ch), &opts)
                .unwrap()
                .value
        })
    });
}

fn bench_codec_verify(c: &mut Criterion) {
    let ch = builtin("tri-2x2x3").unwrap();
    let plan = plan_bit_codec_fb(&ch, PlanSizing::Standard).unwrap();
    c.bench_function("verify_bit_codec/tri-exhaustive", |b| {
        b.iter(|| {
            verify_bit_codec(black_box(&ch), &plan, VerifyMode::Exhaustive)
                .unwrap()
                .paths
        })
    });
}

fn bench_oracle(c: &mut Criterion) {
    let ch = builtin("stuck-at-one").unwrap();
    let limits = OracleLimits::default();
    c.bench_function("oracle/stuck-at-one-n2", |b| {
        b.iter(|| {
            fb_zero_error_feasible(black_box(&ch), 2, 2, SiMode::Acausal, &limits)
                .unwrap()
                .verdict
        })
    });
}

criterion_group!(
    benches,
    bench_shannon_game,
    bench_ahlswede,
    bench_acausal_optimizer,
    bench_codec_verify,
    bench_oracle
);
criterion_main!(benches);
