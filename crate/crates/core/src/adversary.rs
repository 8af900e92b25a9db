//! Cheating strategies and Monte Carlo experiments.
//!
//! **Reflection attack (Bob).** Bob returns Alice's own particles instead of
//! his, optionally applying a Pauli to one of them. Alice's Bell
//! measurements then only swap among her own pairs, so her total parity is
//! the parity of the applied Pauli and Bob fixes the coin. To survive the
//! check he must announce Alice's individual outcomes. Once Alice reveals
//! her order he knows the permutation `τ` her measurements follow; within
//! each cycle of length `n` the outcomes are uniform over the `4^(n−1)`
//! assignments with the right XOR, which is all he can exploit.
//!
//! **Fake sequence (Alice).** Alice measures first and, if she dislikes her
//! coin, announces a different order. Bob's measurements then swap the
//! residual pairs along a permutation, which preserves total parity, so
//! Bob's coin is unchanged.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bell::{label_xor, total_parity, BellLabel, EntangledMatching, ParticleId, Party, PauliLabel};
use crate::protocol::{
    alice_batch, close_session, report, Message, ProtocolError, Sequence, SessionConfig,
    SessionTranscript, TranscriptBuilder, Verdict,
};
use crate::rng::trial_rng;
use crate::stats::{wilson_interval, Z_95};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AdversaryError {
    #[error("strategy {kind} cannot be played by {party}")]
    PartyMismatch { party: Party, kind: &'static str },
    #[error("sequences have different lengths ({0} vs {1})")]
    SizeMismatch(usize, usize),
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StrategyKind {
    Honest,
    Reflect { flip: PauliLabel },
    FakeSequence { desired: u8 },
}

impl StrategyKind {
    fn name(&self) -> &'static str {
        match self {
            StrategyKind::Honest => "honest",
            StrategyKind::Reflect { .. } => "reflect",
            StrategyKind::FakeSequence { .. } => "fake-sequence",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Strategy {
    pub party: Party,
    #[serde(flatten)]
    pub kind: StrategyKind,
}

impl Strategy {
    pub fn new(party: Party, kind: StrategyKind) -> Result<Self, AdversaryError> {
        match (party, kind) {
            (Party::Alice, StrategyKind::Reflect { .. })
            | (Party::Bob, StrategyKind::FakeSequence { .. }) => Err(AdversaryError::PartyMismatch {
                party,
                kind: kind.name(),
            }),
            _ => Ok(Self { party, kind }),
        }
    }

    pub fn reflect(flip: PauliLabel) -> Self {
        Self {
            party: Party::Bob,
            kind: StrategyKind::Reflect { flip },
        }
    }

    pub fn fake_sequence(desired: u8) -> Self {
        Self {
            party: Party::Alice,
            kind: StrategyKind::FakeSequence { desired: desired & 1 },
        }
    }
}

/// Cycle decomposition of a permutation of pair indices.
///
/// Each cycle lists its members starting from its smallest element, and
/// cycles are ordered by that element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleStructure {
    cycles: Vec<Vec<usize>>,
}

impl CycleStructure {
    /// `perm[i]` is the image of `i`.
    pub fn from_permutation(perm: &[usize]) -> Self {
        let mut seen = vec![false; perm.len()];
        let mut cycles = Vec::new();
        for start in 0..perm.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                cycle.push(j);
                j = perm[j];
            }
            cycles.push(cycle);
        }
        Self { cycles }
    }

    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.cycles.iter().map(Vec::len).collect()
    }

    /// Number of cycles, `m`.
    pub fn count(&self) -> usize {
        self.cycles.len()
    }

    /// Total number of elements, `N`.
    pub fn size(&self) -> usize {
        self.cycles.iter().map(Vec::len).sum()
    }
}

/// Cycles of `τ = true ∘ claimed⁻¹`, the permutation that sends Alice's
/// measurement `m` to the pair whose particle she actually received in
/// place of Bob's particle `m`.
pub fn cycle_structure(
    true_seq: &Sequence,
    claimed_seq: &Sequence,
) -> Result<CycleStructure, AdversaryError> {
    if true_seq.len() != claimed_seq.len() {
        return Err(AdversaryError::SizeMismatch(true_seq.len(), claimed_seq.len()));
    }
    let claimed_inv = claimed_seq.inverse();
    let tau: Vec<usize> = (0..true_seq.len())
        .map(|m| true_seq.pair_at(claimed_inv.pair_at(m)))
        .collect();
    Ok(CycleStructure::from_permutation(&tau))
}

/// A uniformly random outcome list consistent with every cycle having XOR Φ⁺.
pub fn best_guess_results<R: Rng + ?Sized>(cycles: &CycleStructure, rng: &mut R) -> Vec<BellLabel> {
    best_guess_results_with_offsets(cycles, &vec![BellLabel::PHI_PLUS; cycles.size()], rng)
}

/// As [`best_guess_results`], where pair `k`'s edge carries label
/// `offsets[k]`, so a cycle's outcomes must XOR to the XOR of its offsets.
/// Length-1 cycles are deterministic and leave `rng` untouched.
pub fn best_guess_results_with_offsets<R: Rng + ?Sized>(
    cycles: &CycleStructure,
    offsets: &[BellLabel],
    rng: &mut R,
) -> Vec<BellLabel> {
    let mut out = vec![BellLabel::PHI_PLUS; cycles.size()];
    for cycle in cycles.cycles() {
        let target = label_xor(cycle.iter().map(|&k| &offsets[k]));
        let (last, rest) = cycle.split_last().expect("cycles are non-empty");
        let mut acc = target;
        for &m in rest {
            let guess = BellLabel::from_code(rng.random_range(0..4u8));
            out[m] = guess;
            acc = acc ^ guess;
        }
        out[*last] = acc;
    }
    out
}

#[derive(Debug, Clone)]
pub struct ReflectOutcome {
    pub transcript: SessionTranscript,
    pub cycles: CycleStructure,
    pub passed: bool,
    /// The coin Alice computes from her own outcomes.
    pub coin: u8,
}

/// Bob's reflection attack. He returns Alice's particles in a uniformly
/// random claimed order, applying `flip` to the first returned particle
/// unless it is the identity, then fabricates results with
/// [`best_guess_results_with_offsets`].
pub fn run_reflect_attack<R: Rng + ?Sized>(
    config: &SessionConfig,
    flip: PauliLabel,
    rng: &mut R,
) -> Result<ReflectOutcome, AdversaryError> {
    let n = config.n_pairs;
    if n == 0 {
        return Err(ProtocolError::NoPairs.into());
    }
    let noise = config.noise.as_ref();
    let mut engine = EntangledMatching::protocol_initial(n);
    let mut builder = TranscriptBuilder::new(*config);

    let alice_seq = Sequence::random(n, rng);
    let from_alice = alice_batch(&alice_seq);
    builder.push(Message::ParticleBatch {
        sender: Party::Alice,
        particles: from_alice.clone(),
    })?;

    // Received slot s is returned as "Bob's particle claimed[s]".
    let claimed = Sequence::random(n, rng);
    let claimed_inv = claimed.inverse();
    let returned: Vec<ParticleId> = (0..n).map(|m| from_alice[claimed_inv.pair_at(m)]).collect();
    let mut offsets = vec![BellLabel::PHI_PLUS; n];
    if flip != PauliLabel::I {
        engine
            .apply_pauli(returned[0], flip)
            .map_err(ProtocolError::from)?;
        offsets[returned[0].pair()] = flip.as_label();
    }
    builder.push(Message::ParticleBatch {
        sender: Party::Bob,
        particles: returned.clone(),
    })?;

    builder.push(Message::SequenceAnnouncement(alice_seq.clone()))?;

    let mut alice_outcomes = Vec::with_capacity(n);
    for (m, &received) in returned.iter().enumerate() {
        let o = engine
            .measure_pair(ParticleId::kept(Party::Alice, m), received, rng)
            .map_err(ProtocolError::from)?;
        alice_outcomes.push(report(o, noise, rng));
    }

    let cycles = cycle_structure(&alice_seq, &claimed)?;
    let guesses = best_guess_results_with_offsets(&cycles, &offsets, rng);
    let coin = total_parity(&alice_outcomes);
    let transcript = close_session(
        builder,
        alice_outcomes.clone(),
        guesses.clone(),
        guesses,
        &alice_outcomes,
    )?;
    Ok(ReflectOutcome {
        passed: transcript.verdict == Verdict::Accept,
        transcript,
        cycles,
        coin,
    })
}

#[derive(Debug, Clone)]
pub struct FakeSequenceOutcome {
    pub transcript: SessionTranscript,
    /// Whether Alice announced something other than her true order.
    pub lied: bool,
    pub alice_coin: u8,
    pub bob_coin: u8,
    /// Total parity of the noiseless engine outcomes agrees between the parties.
    pub engine_parity_equal: bool,
}

/// Alice's fake-sequence attack: she measures before announcing and, if her
/// coin is not `desired`, announces a uniformly random different order.
pub fn run_fake_sequence_attack<R: Rng + ?Sized>(
    config: &SessionConfig,
    desired: u8,
    rng: &mut R,
) -> Result<FakeSequenceOutcome, AdversaryError> {
    let n = config.n_pairs;
    if n == 0 {
        return Err(ProtocolError::NoPairs.into());
    }
    let noise = config.noise.as_ref();
    let mut engine = EntangledMatching::protocol_initial(n);
    let mut builder = TranscriptBuilder::new(*config);

    let alice_seq = Sequence::random(n, rng);
    let from_alice = alice_batch(&alice_seq);
    builder.push(Message::ParticleBatch {
        sender: Party::Alice,
        particles: from_alice.clone(),
    })?;
    let from_bob: Vec<ParticleId> = (0..n).map(|m| ParticleId::sent(Party::Bob, m)).collect();
    builder.push(Message::ParticleBatch {
        sender: Party::Bob,
        particles: from_bob.clone(),
    })?;

    let mut alice_raw = Vec::with_capacity(n);
    let mut alice_outcomes = Vec::with_capacity(n);
    for (m, &received) in from_bob.iter().enumerate() {
        let o = engine
            .measure_pair(ParticleId::kept(Party::Alice, m), received, rng)
            .map_err(ProtocolError::from)?;
        alice_raw.push(o);
        alice_outcomes.push(report(o, noise, rng));
    }
    let alice_coin = total_parity(&alice_outcomes);

    let announced = if alice_coin == desired & 1 {
        alice_seq.clone()
    } else {
        alice_seq.random_other(rng)
    };
    let lied = announced != alice_seq;
    builder.push(Message::SequenceAnnouncement(announced.clone()))?;

    let slot_of = announced.inverse();
    let mut bob_raw = Vec::with_capacity(n);
    let mut bob_outcomes = Vec::with_capacity(n);
    for m in 0..n {
        let received = from_alice[slot_of.pair_at(m)];
        let o = engine
            .measure_pair(ParticleId::kept(Party::Bob, m), received, rng)
            .map_err(ProtocolError::from)?;
        bob_raw.push(o);
        bob_outcomes.push(report(o, noise, rng));
    }
    let bob_coin = total_parity(&bob_outcomes);

    let transcript = close_session(
        builder,
        alice_outcomes,
        bob_outcomes.clone(),
        bob_outcomes.clone(),
        &bob_outcomes,
    )?;
    Ok(FakeSequenceOutcome {
        transcript,
        lied,
        alice_coin,
        bob_coin,
        engine_parity_equal: total_parity(&alice_raw) == total_parity(&bob_raw),
    })
}

/// Aggregate of a Monte Carlo experiment.
///
/// For the reflection attack `successes` counts accepted sessions and
/// `forced_coin_rate` the fraction whose coin equals the flip's parity.
/// For the fake-sequence attack both count runs where Bob's coin equals
/// Alice's desired value, and `parity_mismatches` counts runs where the
/// parties' engine-level total parities differ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub n_pairs: usize,
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub forced_coin_rate: f64,
    pub parity_mismatches: u64,
    pub seed: u64,
    pub strategy: Strategy,
}

impl ExperimentReport {
    fn new(config: &SessionConfig, strategy: Strategy, trials: u64, tally: Tally) -> Self {
        let (ci_low, ci_high) = wilson_interval(tally.successes, trials, Z_95);
        Self {
            n_pairs: config.n_pairs,
            trials,
            successes: tally.successes,
            estimate: tally.successes as f64 / trials as f64,
            ci_low,
            ci_high,
            forced_coin_rate: tally.forced as f64 / trials as f64,
            parity_mismatches: tally.mismatches,
            seed: config.seed,
            strategy,
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    successes: u64,
    forced: u64,
    mismatches: u64,
}

impl std::ops::Add for Tally {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            successes: self.successes + o.successes,
            forced: self.forced + o.forced,
            mismatches: self.mismatches + o.mismatches,
        }
    }
}

fn run_trials<F>(config: &SessionConfig, trials: u64, trial: F) -> Result<Tally, AdversaryError>
where
    F: Fn(&mut crate::rng::SimRng) -> Result<Tally, AdversaryError> + Sync,
{
    if trials == 0 {
        return Err(AdversaryError::NoTrials);
    }
    (0..trials)
        .into_par_iter()
        .map(|i| trial(&mut trial_rng(config.seed, i)))
        .try_reduce(Tally::default, |a, b| Ok(a + b))
}

/// Pass rate of the reflection attack over `trials` independent sessions;
/// trial `i` uses stream `i` of `config.seed`.
pub fn estimate_pass_probability(
    config: &SessionConfig,
    flip: PauliLabel,
    trials: u64,
) -> Result<ExperimentReport, AdversaryError> {
    let forced = flip.parity();
    let tally = run_trials(config, trials, |rng| {
        let out = run_reflect_attack(config, flip, rng)?;
        Ok(Tally {
            successes: out.passed as u64,
            forced: (out.coin == forced) as u64,
            mismatches: 0,
        })
    })?;
    Ok(ExperimentReport::new(config, Strategy::reflect(flip), trials, tally))
}

/// Frequency with which Alice's fake-sequence attack yields Bob's coin `desired`.
pub fn estimate_fake_sequence(
    config: &SessionConfig,
    desired: u8,
    trials: u64,
) -> Result<ExperimentReport, AdversaryError> {
    let desired = desired & 1;
    let tally = run_trials(config, trials, |rng| {
        let out = run_fake_sequence_attack(config, desired, rng)?;
        let hit = (out.bob_coin == desired) as u64;
        Ok(Tally {
            successes: hit,
            forced: hit,
            mismatches: (!out.engine_parity_equal) as u64,
        })
    })?;
    Ok(ExperimentReport::new(
        config,
        Strategy::fake_sequence(desired),
        trials,
        tally,
    ))
}
