//! Engine-versus-statevector equivalence checks.
//!
//! Every check drives the symbolic engine and the dense simulator over the
//! same inputs and compares what they predict. The residual-label rule under
//! test is injectable so the suite can be shown to fail on a wrong rule.

use rand::Rng;
use serde::Serialize;

use crate::bell::{
    apply_pauli, residual_label, total_parity, BellLabel, EntangledMatching, ParticleId, Party,
    PauliLabel,
};
use crate::rng::trial_rng;
use crate::statevector::{
    bell_distribution, bell_measure_collapse, bell_project, prepare_pairs, OutcomeDistribution,
    QuantumState,
};

pub type ResidualRule = fn(BellLabel, BellLabel, BellLabel) -> BellLabel;

const EXACT_TOL: f64 = 1e-12;
const POINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random maximal measurement sequences for the lemma checks.
    pub lemma_sequences: u64,
    /// Largest number of EPR pairs in a lemma sequence.
    pub max_pairs: usize,
    /// Samples per sampled-distribution comparison.
    pub samples: u64,
    /// Largest total-variation distance tolerated between sampled and exact distributions.
    pub tv_tolerance: f64,
    pub residual_rule: ResidualRule,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            lemma_sequences: 1000,
            max_pairs: 4,
            samples: 100_000,
            tv_tolerance: 0.02,
            residual_rule: residual_label,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: u64,
    pub failures: u64,
    pub detail: String,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub fn run_verification(opts: &VerifyOptions) -> VerificationReport {
    VerificationReport {
        checks: vec![
            check_residual_rule(opts.residual_rule),
            check_pauli_action(),
            check_exact_distributions(),
            check_sampled_distributions(opts),
            check_lemma(opts),
        ],
    }
}

fn alice(i: u32) -> ParticleId {
    ParticleId::new(Party::Alice, i)
}

fn qubit(p: ParticleId) -> usize {
    p.index as usize - 1
}

/// Pairs `(A1,A2), (A3,A4), …` with the given labels.
fn engine_for(labels: &[BellLabel]) -> EntangledMatching {
    EntangledMatching::new(
        labels
            .iter()
            .enumerate()
            .map(|(i, &l)| (alice(2 * i as u32 + 1), alice(2 * i as u32 + 2), l)),
    )
    .expect("distinct particles")
}

/// All 64 `(b₁, b₂, outcome)` swaps: the oracle's residual state must be a
/// point mass on the rule's label, and so must the engine's edge.
pub fn check_residual_rule(rule: ResidualRule) -> CheckResult {
    let mut failures = 0;
    let mut first = String::new();
    for b1 in BellLabel::ALL {
        for b2 in BellLabel::ALL {
            let state = prepare_pairs(&[b1, b2]).expect("4 qubits");
            for m in BellLabel::ALL {
                let post = bell_project(&state, 1, 2, m)
                    .expect("valid qubits")
                    .expect("swap outcomes have probability 1/4");
                let oracle = bell_distribution(&post, 0, 3)
                    .expect("valid qubits")
                    .support_point(POINT_TOL);
                let mut engine = engine_for(&[b1, b2]);
                engine
                    .measure_pair_forced(alice(2), alice(3), m)
                    .expect("live particles");
                let engine_label = engine.label_of(alice(1)).ok();
                let predicted = rule(b1, b2, m);
                if oracle != Some(predicted) || engine_label != Some(predicted) {
                    failures += 1;
                    if first.is_empty() {
                        let show = |l: Option<BellLabel>| l.map_or("none", BellLabel::name);
                        first = format!(
                            "{b1} ⊗ {b2}, outcome {m}: rule {predicted}, oracle {}, engine {}",
                            show(oracle),
                            show(engine_label)
                        );
                    }
                }
            }
        }
    }
    CheckResult {
        name: "residual-rule",
        cases: 64,
        failures,
        detail: if failures == 0 { "all 64 cases agree".into() } else { first },
    }
}

/// All 16 `(b, σ)`: `(σ ⊗ I)|b⟩` measures as `apply_pauli(b, σ)` with certainty.
pub fn check_pauli_action() -> CheckResult {
    let mut failures = 0;
    for b in BellLabel::ALL {
        for p in PauliLabel::ALL {
            let mut s = prepare_pairs(&[b]).expect("2 qubits");
            s.apply_pauli(0, p).expect("valid qubit");
            let d = bell_distribution(&s, 0, 1).expect("valid qubits");
            if d.support_point(POINT_TOL) != Some(apply_pauli(b, p)) {
                failures += 1;
            }
        }
    }
    CheckResult {
        name: "pauli-action",
        cases: 16,
        failures,
        detail: format!("{failures} of 16 cases disagree"),
    }
}

/// Partner measurements are point masses on the edge label and
/// cross-pair measurements are exactly uniform, for all 16 label pairs.
pub fn check_exact_distributions() -> CheckResult {
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for b1 in BellLabel::ALL {
        for b2 in BellLabel::ALL {
            let s = prepare_pairs(&[b1, b2]).expect("4 qubits");
            let partner = bell_distribution(&s, 0, 1).expect("valid qubits");
            let cross = bell_distribution(&s, 1, 2).expect("valid qubits");
            let d1 = partner.max_abs_diff(&OutcomeDistribution::point(b1));
            let d2 = cross.max_abs_diff(&OutcomeDistribution::uniform());
            worst = worst.max(d1).max(d2);
            if d1 > EXACT_TOL || d2 > EXACT_TOL {
                failures += 1;
            }
        }
    }
    CheckResult {
        name: "exact-distributions",
        cases: 32,
        failures,
        detail: format!("max deviation {worst:e}"),
    }
}

/// Sampled engine and oracle swap outcomes against the oracle's exact
/// distribution, by total-variation distance.
pub fn check_sampled_distributions(opts: &VerifyOptions) -> CheckResult {
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let mut case = 0;
    for b1 in BellLabel::ALL {
        for b2 in BellLabel::ALL {
            let s = prepare_pairs(&[b1, b2]).expect("4 qubits");
            let exact = bell_distribution(&s, 1, 2).expect("valid qubits");
            let mut rng = trial_rng(opts.seed, case);
            case += 1;
            let mut counts = [0u64; 4];
            for _ in 0..opts.samples {
                let mut engine = engine_for(&[b1, b2]);
                let o = engine
                    .measure_pair(alice(2), alice(3), &mut rng)
                    .expect("live particles");
                counts[o.code() as usize] += 1;
            }
            let tv = OutcomeDistribution::from_counts(&counts).total_variation(&exact);
            worst = worst.max(tv);
            if tv >= opts.tv_tolerance {
                failures += 1;
            }
        }
    }
    // Oracle-side sampling on one representative case.
    let s = prepare_pairs(&[BellLabel::PSI_MINUS, BellLabel::PHI_MINUS]).expect("4 qubits");
    let exact = bell_distribution(&s, 1, 2).expect("valid qubits");
    let mut rng = trial_rng(opts.seed, case);
    let mut counts = [0u64; 4];
    for _ in 0..opts.samples {
        let (o, _) = bell_measure_collapse(&s, 1, 2, &mut rng).expect("valid qubits");
        counts[o.code() as usize] += 1;
    }
    let tv = OutcomeDistribution::from_counts(&counts).total_variation(&exact);
    worst = worst.max(tv);
    if tv >= opts.tv_tolerance {
        failures += 1;
    }
    CheckResult {
        name: "sampled-distributions",
        cases: 17,
        failures,
        detail: format!("max TV distance {worst:.5} at {} samples", opts.samples),
    }
}

/// Random maximal measurement sequences over up to `max_pairs` pairs with
/// random initial labels. Counts a failure whenever the total parity of
/// outcomes differs from the initial total parity (in either simulator),
/// or the engine, replaying the oracle's branch, disagrees with the
/// oracle about any live pair's label.
pub fn check_lemma(opts: &VerifyOptions) -> CheckResult {
    let mut engine_violations = 0;
    let mut oracle_violations = 0;
    let mut replay_mismatches = 0;
    for i in 0..opts.lemma_sequences {
        let mut rng = trial_rng(opts.seed ^ 0x1e33a, i);
        let n = rng.random_range(1..=opts.max_pairs);
        let labels: Vec<BellLabel> = (0..n)
            .map(|_| BellLabel::from_code(rng.random_range(0..4u8)))
            .collect();
        let initial = total_parity(&labels);
        let order = random_pairing(2 * n, &mut rng);

        let mut engine = engine_for(&labels);
        let mut outcomes = Vec::with_capacity(n);
        for &(u, v) in &order {
            outcomes.push(engine.measure_pair(u, v, &mut rng).expect("valid pairing"));
        }
        if total_parity(&outcomes) != initial || !engine.conservation_holds() {
            engine_violations += 1;
        }

        let mut state = prepare_pairs(&labels).expect("at most 16 qubits");
        let mut replay = engine_for(&labels);
        let mut oracle_outcomes = Vec::with_capacity(n);
        let mut agree = true;
        for &(u, v) in &order {
            let (o, post) =
                bell_measure_collapse(&state, qubit(u), qubit(v), &mut rng).expect("valid qubits");
            state = post;
            oracle_outcomes.push(o);
            if replay.measure_pair_checked(u, v, o).is_err() {
                agree = false;
                break;
            }
            agree &= live_edges_agree(&replay, &state);
        }
        if total_parity(&oracle_outcomes) != initial {
            oracle_violations += 1;
        }
        if !agree {
            replay_mismatches += 1;
        }
    }
    CheckResult {
        name: "lemma",
        cases: opts.lemma_sequences,
        failures: engine_violations + oracle_violations + replay_mismatches,
        detail: format!(
            "engine parity violations {engine_violations}, oracle parity violations {oracle_violations}, branch replay mismatches {replay_mismatches}"
        ),
    }
}

fn live_edges_agree(engine: &EntangledMatching, state: &QuantumState) -> bool {
    engine.edges().all(|(a, b, label)| {
        bell_distribution(state, qubit(a), qubit(b))
            .map(|d| d.support_point(POINT_TOL) == Some(label))
            .unwrap_or(false)
    })
}

/// A uniformly random ordering of a uniformly random perfect matching on
/// Alice particles `1..=particles`.
fn random_pairing<R: Rng + ?Sized>(particles: usize, rng: &mut R) -> Vec<(ParticleId, ParticleId)> {
    use rand::seq::SliceRandom;
    let mut ids: Vec<ParticleId> = (1..=particles as u32).map(alice).collect();
    ids.shuffle(rng);
    ids.chunks(2).map(|c| (c[0], c[1])).collect()
}
