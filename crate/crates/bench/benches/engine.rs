use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qct_core::adversary::{estimate_pass_probability, run_reflect_attack};
use qct_core::analysis::{pass_prob_appendix_sum_exact, pass_prob_permutation_model_exact};
use qct_core::rng::session_rng;
use qct_core::statevector::{bell_distribution, prepare_pairs};
use qct_core::{run_honest, BellLabel, EntangledMatching, ParticleId, Party, PauliLabel, SessionConfig};

fn engine_swaps(c: &mut Criterion) {
    let mut g = c.benchmark_group("engine_swap_chain");
    for n in [4usize, 64, 1024] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            let mut rng = session_rng(1);
            b.iter(|| {
                let mut m = EntangledMatching::protocol_initial(n);
                for k in 0..n as u32 {
                    let a = ParticleId::new(Party::Alice, 2 * k + 2);
                    let bp = ParticleId::new(Party::Bob, 2 * k + 1);
                    black_box(m.measure_pair(a, bp, &mut rng).unwrap());
                }
                m
            })
        });
    }
    g.finish();
}

fn sessions(c: &mut Criterion) {
    let mut g = c.benchmark_group("session");
    for n in [4usize, 32] {
        let cfg = SessionConfig::new(n, 2).unwrap();
        g.bench_with_input(BenchmarkId::new("honest", n), &cfg, |b, cfg| {
            let mut rng = session_rng(cfg.seed);
            b.iter(|| run_honest(cfg, &mut rng).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("reflect", n), &cfg, |b, cfg| {
            let mut rng = session_rng(cfg.seed);
            b.iter(|| run_reflect_attack(cfg, PauliLabel::X, &mut rng).unwrap())
        });
    }
    g.finish();
}

fn estimator(c: &mut Criterion) {
    let cfg = SessionConfig::new(3, 3).unwrap();
    c.bench_function("estimate_pass_probability_10k", |b| {
        b.iter(|| estimate_pass_probability(&cfg, PauliLabel::I, 10_000).unwrap())
    });
}

fn exact_sums(c: &mut Criterion) {
    let mut g = c.benchmark_group("exact_sum");
    for n in [11u32, 64] {
        g.bench_with_input(BenchmarkId::new("appendix", n), &n, |b, &n| {
            b.iter(|| pass_prob_appendix_sum_exact(black_box(n)))
        });
        g.bench_with_input(BenchmarkId::new("permutation", n), &n, |b, &n| {
            b.iter(|| pass_prob_permutation_model_exact(black_box(n)))
        });
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let state = prepare_pairs(&[BellLabel::PHI_PLUS; 6]).unwrap();
    c.bench_function("statevector_bell_distribution_12q", |b| {
        b.iter(|| bell_distribution(black_box(&state), 1, 2).unwrap())
    });
}

criterion_group!(benches, engine_swaps, sessions, estimator, exact_sums, oracle);
criterion_main!(benches);
