//! Honest sessions on the symbolic engine against an exact statevector model
//! of the same particle exchange.

use std::collections::HashMap;

use qct_core::analysis::honest_accept_prob;
use qct_core::rng::trial_rng;
use qct_core::statevector::{bell_distribution, bell_project, prepare_pairs, QuantumState};
use qct_core::stats::binomial_sigma;
use qct_core::{run_honest, BellLabel, NoiseModel, Party, SessionConfig, Verdict};

/// Alice's pairs occupy qubits `0..2N`, Bob's `2N..4N`; particle `i` of a
/// party is qubit `i − 1` of its block.
fn qubit(owner: Party, index: usize, n: usize) -> usize {
    let base = if owner == Party::Alice { 0 } else { 2 * n };
    base + index - 1
}

/// Exact distribution of Alice's outcome vector, enumerating every branch
/// of her measurements. Panics unless every branch leaves Bob's measurement
/// of each pair as a point mass on Alice's outcome.
fn oracle_alice_distribution(n: usize) -> HashMap<Vec<BellLabel>, f64> {
    let state = prepare_pairs(&vec![BellLabel::PHI_PLUS; 2 * n]).unwrap();
    let mut out = HashMap::new();
    enumerate(n, 0, state, 1.0, &mut Vec::new(), &mut out);
    out
}

fn enumerate(
    n: usize,
    m: usize,
    state: QuantumState,
    prob: f64,
    prefix: &mut Vec<BellLabel>,
    out: &mut HashMap<Vec<BellLabel>, f64>,
) {
    if m == n {
        for (k, &alice) in prefix.iter().enumerate() {
            let bob = bell_distribution(
                &state,
                qubit(Party::Bob, 2 * k + 2, n),
                qubit(Party::Alice, 2 * k + 1, n),
            )
            .unwrap();
            assert_eq!(bob.support_point(1e-9), Some(alice), "pair {k} of branch {prefix:?}");
        }
        out.insert(prefix.clone(), prob);
        return;
    }
    let (qa, qb) = (qubit(Party::Alice, 2 * m + 2, n), qubit(Party::Bob, 2 * m + 1, n));
    let dist = bell_distribution(&state, qa, qb).unwrap();
    for o in BellLabel::ALL {
        if let Some(post) = bell_project(&state, qa, qb, o).unwrap() {
            prefix.push(o);
            enumerate(n, m + 1, post, prob * dist.prob(o), prefix, out);
            prefix.pop();
        }
    }
}

#[test]
fn honest_sessions_match_oracle_distribution() {
    for n in 1..=3 {
        let exact = oracle_alice_distribution(n);
        assert_eq!(exact.len(), 4usize.pow(n as u32));
        let total: f64 = exact.values().sum();
        assert!((total - 1.0).abs() < 1e-9);

        let cfg = SessionConfig::new(n, 0).unwrap();
        let samples = 100_000u64;
        let mut counts: HashMap<Vec<BellLabel>, u64> = HashMap::new();
        for i in 0..samples {
            let t = run_honest(&cfg, &mut trial_rng(1000 + n as u64, i)).unwrap();
            assert_eq!(t.verdict, Verdict::Accept);
            assert_eq!(t.alice_coin(), t.bob_coin());
            *counts.entry(t.alice_outcomes).or_default() += 1;
        }
        let tv = 0.5
            * exact
                .iter()
                .map(|(k, &p)| (counts.get(k).copied().unwrap_or(0) as f64 / samples as f64 - p).abs())
                .sum::<f64>();
        assert!(counts.keys().all(|k| exact.contains_key(k)));
        assert!(tv < 0.02, "N={n}: TV {tv}");
    }
}

#[test]
fn noisy_reject_rate_matches_collision_model() {
    for (gamma, n) in [(0.9, 3), (0.75, 2), (0.99, 4)] {
        let cfg = SessionConfig::new(n, 0)
            .unwrap()
            .with_noise(NoiseModel::new(gamma).unwrap());
        let trials = 100_000u64;
        let rejects = (0..trials)
            .filter(|&i| run_honest(&cfg, &mut trial_rng(5, i)).unwrap().verdict == Verdict::Reject)
            .count();
        let want = 1.0 - honest_accept_prob(gamma, n as u32);
        let rate = rejects as f64 / trials as f64;
        assert!(
            (rate - want).abs() <= 3.0 * binomial_sigma(want, trials),
            "Γ={gamma} N={n}: {rate} vs {want}"
        );
    }
}

#[test]
fn noiseless_sessions_never_reject() {
    let cfg = SessionConfig::new(4, 0).unwrap();
    for i in 0..10_000 {
        assert_eq!(run_honest(&cfg, &mut trial_rng(6, i)).unwrap().verdict, Verdict::Accept);
    }
}
