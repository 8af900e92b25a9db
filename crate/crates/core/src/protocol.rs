//! The two-party coin-tossing protocol.
//!
//! Each party starts with `N` EPR pairs in Φ⁺. Pair `m` of a party consists
//! of its odd particle `2m+1` (sent) and even particle `2m+2` (kept).
//!
//! 1. Alice sends her odd particles to Bob in a secret random order.
//! 2. Bob sends his odd particles to Alice in the canonical order.
//! 3. Alice announces the order she used.
//! 4. Each party Bell-measures, for every pair `m`, its kept particle with
//!    the other party's sent particle `m`. Entanglement swapping makes
//!    Alice's outcome `m` equal to Bob's outcome `m`.
//! 5. Bob announces all of his outcomes; Alice compares them to her own
//!    index by index and accepts or rejects.
//! 6. The coin is the total parity of the outcomes, or abort on rejection.
//!
//! [`TranscriptBuilder`] enforces the message order of a session at runtime.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::bell::{total_parity, BellLabel, EngineError, EntangledMatching, ParticleId, Party};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ProtocolError {
    #[error("a session needs at least one pair")]
    NoPairs,
    #[error("gamma must lie in (0, 1], got {0}")]
    InvalidGamma(f64),
    #[error("{0:?} is not a permutation of 0..{1}")]
    InvalidSequence(Vec<usize>, usize),
    #[error("message out of order: expected {expected}, got {got}")]
    OutOfOrder { expected: Phase, got: Phase },
    #[error("{what} carries {got} entries, expected {expected}")]
    WrongLength {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("transcript is incomplete: next phase would be {0}")]
    Incomplete(Phase),
    #[error("cannot toss a coin from zero outcomes")]
    EmptyOutcomes,
    #[error("result lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Per-measurement noise: the reported outcome is correct with probability `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    gamma: f64,
}

impl NoiseModel {
    pub fn new(gamma: f64) -> Result<Self, ProtocolError> {
        if gamma > 0.0 && gamma <= 1.0 {
            Ok(Self { gamma })
        } else {
            Err(ProtocolError::InvalidGamma(gamma))
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub n_pairs: usize,
    pub seed: u64,
    pub noise: Option<NoiseModel>,
}

impl SessionConfig {
    pub fn new(n_pairs: usize, seed: u64) -> Result<Self, ProtocolError> {
        if n_pairs == 0 {
            return Err(ProtocolError::NoPairs);
        }
        Ok(Self {
            n_pairs,
            seed,
            noise: None,
        })
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        self.noise = Some(noise);
        self
    }
}

/// Transmission order: entry `s` is the (zero-based) pair whose particle
/// travels in slot `s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Sequence(Vec<usize>);

impl Sequence {
    pub fn new(slots: Vec<usize>) -> Result<Self, ProtocolError> {
        let n = slots.len();
        let mut seen = vec![false; n];
        for &p in &slots {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(ProtocolError::InvalidSequence(slots, n));
            }
        }
        Ok(Self(slots))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut slots: Vec<usize> = (0..n).collect();
        slots.shuffle(rng);
        Self(slots)
    }

    /// A uniformly random sequence other than `self`; `self` again when `n == 1`.
    pub fn random_other<R: Rng + ?Sized>(&self, rng: &mut R) -> Self {
        if self.len() < 2 {
            return self.clone();
        }
        loop {
            let s = Self::random(self.len(), rng);
            if s != *self {
                return s;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pair_at(&self, slot: usize) -> usize {
        self.0[slot]
    }

    pub fn slots(&self) -> &[usize] {
        &self.0
    }

    /// Pair → slot.
    pub fn inverse(&self) -> Sequence {
        let mut inv = vec![0; self.len()];
        for (slot, &pair) in self.0.iter().enumerate() {
            inv[pair] = slot;
        }
        Sequence(inv)
    }
}

impl TryFrom<Vec<usize>> for Sequence {
    type Error = ProtocolError;

    fn try_from(v: Vec<usize>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<Sequence> for Vec<usize> {
    fn from(s: Sequence) -> Self {
        s.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
}

/// Final coin of a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coin {
    Value(u8),
    Abort,
}

impl fmt::Display for Coin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coin::Value(b) => write!(f, "{b}"),
            Coin::Abort => f.write_str("abort"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    ParticleBatch {
        sender: Party,
        particles: Vec<ParticleId>,
    },
    SequenceAnnouncement(Sequence),
    ResultsAnnouncement(Vec<BellLabel>),
    Verdict(Verdict),
    CoinAnnouncement(Coin),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Phase {
    AliceBatch,
    BobBatch,
    SequenceAnnouncement,
    ResultsAnnouncement,
    Verdict,
    CoinAnnouncement,
    Done,
}

impl Phase {
    const ORDER: [Phase; 6] = [
        Phase::AliceBatch,
        Phase::BobBatch,
        Phase::SequenceAnnouncement,
        Phase::ResultsAnnouncement,
        Phase::Verdict,
        Phase::CoinAnnouncement,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Phase::AliceBatch => "alice_batch",
            Phase::BobBatch => "bob_batch",
            Phase::SequenceAnnouncement => "sequence",
            Phase::ResultsAnnouncement => "results",
            Phase::Verdict => "verdict",
            Phase::CoinAnnouncement => "coin",
            Phase::Done => "done",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl Message {
    pub fn phase(&self) -> Phase {
        match self {
            Message::ParticleBatch {
                sender: Party::Alice,
                ..
            } => Phase::AliceBatch,
            Message::ParticleBatch {
                sender: Party::Bob, ..
            } => Phase::BobBatch,
            Message::SequenceAnnouncement(_) => Phase::SequenceAnnouncement,
            Message::ResultsAnnouncement(_) => Phase::ResultsAnnouncement,
            Message::Verdict(_) => Phase::Verdict,
            Message::CoinAnnouncement(_) => Phase::CoinAnnouncement,
        }
    }

    pub fn sender(&self) -> Party {
        match self {
            Message::ParticleBatch { sender, .. } => *sender,
            Message::ResultsAnnouncement(_) => Party::Bob,
            Message::SequenceAnnouncement(_) | Message::Verdict(_) | Message::CoinAnnouncement(_) => {
                Party::Alice
            }
        }
    }

    fn payload(&self) -> serde_json::Value {
        match self {
            Message::ParticleBatch { particles, .. } => json!({ "particles": particles }),
            Message::SequenceAnnouncement(seq) => json!({ "sequence": seq }),
            Message::ResultsAnnouncement(results) => json!({ "results": results }),
            Message::Verdict(v) => json!({ "verdict": v }),
            Message::CoinAnnouncement(c) => match c {
                Coin::Value(b) => json!({ "coin": b }),
                Coin::Abort => json!({ "coin": "abort" }),
            },
        }
    }
}

/// One line of the line-delimited transcript format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub index: usize,
    pub phase: String,
    pub sender: Option<Party>,
    pub payload: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionTranscript {
    pub config: SessionConfig,
    pub messages: Vec<Message>,
    pub alice_outcomes: Vec<BellLabel>,
    pub bob_outcomes: Vec<BellLabel>,
    pub coin: Coin,
    pub verdict: Verdict,
}

impl SessionTranscript {
    /// Records in log order: session header, the three transmissions,
    /// both parties' measurement outcomes, then the check phase.
    pub fn records(&self) -> Vec<TranscriptRecord> {
        let mut out = Vec::with_capacity(self.messages.len() + 3);
        let mut push = |phase: &str, sender: Option<Party>, payload: serde_json::Value| {
            out.push(TranscriptRecord {
                index: out.len(),
                phase: phase.to_owned(),
                sender,
                payload,
            });
        };
        push(
            "session",
            None,
            json!({
                "n_pairs": self.config.n_pairs,
                "seed": self.config.seed,
                "gamma": self.config.noise.map(|n| n.gamma()),
            }),
        );
        for msg in &self.messages {
            if msg.phase() == Phase::ResultsAnnouncement {
                push(
                    "measurement",
                    Some(Party::Alice),
                    json!({ "outcomes": self.alice_outcomes }),
                );
                push(
                    "measurement",
                    Some(Party::Bob),
                    json!({ "outcomes": self.bob_outcomes }),
                );
            }
            push(msg.phase().tag(), Some(msg.sender()), msg.payload());
        }
        out
    }

    /// One JSON object per line, newline-terminated.
    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for r in self.records() {
            s.push_str(&serde_json::to_string(&r).expect("records serialise"));
            s.push('\n');
        }
        s
    }

    pub fn alice_coin(&self) -> Option<u8> {
        (!self.alice_outcomes.is_empty()).then(|| total_parity(&self.alice_outcomes))
    }

    pub fn bob_coin(&self) -> Option<u8> {
        (!self.bob_outcomes.is_empty()).then(|| total_parity(&self.bob_outcomes))
    }

    pub fn announced_sequence(&self) -> Option<&Sequence> {
        self.messages.iter().find_map(|m| match m {
            Message::SequenceAnnouncement(s) => Some(s),
            _ => None,
        })
    }
}

/// Accumulates messages, rejecting any that arrive out of protocol order.
#[derive(Debug, Clone)]
pub struct TranscriptBuilder {
    config: SessionConfig,
    messages: Vec<Message>,
}

impl TranscriptBuilder {
    pub fn new(config: SessionConfig) -> Self {
        Self {
            config,
            messages: Vec::with_capacity(Phase::ORDER.len()),
        }
    }

    pub fn next_phase(&self) -> Phase {
        Phase::ORDER
            .get(self.messages.len())
            .copied()
            .unwrap_or(Phase::Done)
    }

    pub fn push(&mut self, msg: Message) -> Result<(), ProtocolError> {
        let expected = self.next_phase();
        let got = msg.phase();
        if got != expected {
            return Err(ProtocolError::OutOfOrder { expected, got });
        }
        let n = self.config.n_pairs;
        let (what, len) = match &msg {
            Message::ParticleBatch { particles, .. } => ("particle batch", particles.len()),
            Message::SequenceAnnouncement(s) => ("sequence", s.len()),
            Message::ResultsAnnouncement(r) => ("results announcement", r.len()),
            _ => ("", n),
        };
        if len != n {
            return Err(ProtocolError::WrongLength {
                what,
                expected: n,
                got: len,
            });
        }
        self.messages.push(msg);
        Ok(())
    }

    pub fn finish(
        self,
        alice_outcomes: Vec<BellLabel>,
        bob_outcomes: Vec<BellLabel>,
    ) -> Result<SessionTranscript, ProtocolError> {
        let next = self.next_phase();
        if next != Phase::Done {
            return Err(ProtocolError::Incomplete(next));
        }
        let verdict = match self.messages[4] {
            Message::Verdict(v) => v,
            _ => unreachable!("phase order checked on push"),
        };
        let coin = match self.messages[5] {
            Message::CoinAnnouncement(c) => c,
            _ => unreachable!("phase order checked on push"),
        };
        Ok(SessionTranscript {
            config: self.config,
            messages: self.messages,
            alice_outcomes,
            bob_outcomes,
            coin,
            verdict,
        })
    }
}

/// The coin rule: total parity of a non-empty outcome list.
pub fn toss_from_outcomes(outcomes: &[BellLabel]) -> Result<u8, ProtocolError> {
    if outcomes.is_empty() {
        return Err(ProtocolError::EmptyOutcomes);
    }
    Ok(total_parity(outcomes))
}

/// Alice's check: Bob's announced result for pair `m` must equal her own outcome for pair `m`.
pub fn alice_verify(
    alice_results: &[BellLabel],
    bob_announced: &[BellLabel],
) -> Result<Verdict, ProtocolError> {
    if alice_results.len() != bob_announced.len() {
        return Err(ProtocolError::LengthMismatch(
            alice_results.len(),
            bob_announced.len(),
        ));
    }
    Ok(if alice_results == bob_announced {
        Verdict::Accept
    } else {
        Verdict::Reject
    })
}

/// Reports `outcome` with probability Γ, otherwise one of the other three
/// labels uniformly. Γ = 1 never touches `rng`.
pub fn apply_noise<R: Rng + ?Sized>(outcome: BellLabel, noise: &NoiseModel, rng: &mut R) -> BellLabel {
    if noise.gamma >= 1.0 {
        return outcome;
    }
    if rng.random::<f64>() < noise.gamma {
        outcome
    } else {
        outcome ^ BellLabel::from_code(rng.random_range(1..4u8))
    }
}

pub(crate) fn report<R: Rng + ?Sized>(
    outcome: BellLabel,
    noise: Option<&NoiseModel>,
    rng: &mut R,
) -> BellLabel {
    match noise {
        Some(n) => apply_noise(outcome, n, rng),
        None => outcome,
    }
}

/// Alice's odd particles in transmission order.
pub(crate) fn alice_batch(seq: &Sequence) -> Vec<ParticleId> {
    seq.slots()
        .iter()
        .map(|&pair| ParticleId::sent(Party::Alice, pair))
        .collect()
}

/// Completes the check phase: Bob announces, Alice verifies, the coin is settled.
pub(crate) fn close_session(
    mut builder: TranscriptBuilder,
    alice_outcomes: Vec<BellLabel>,
    bob_outcomes: Vec<BellLabel>,
    announced: Vec<BellLabel>,
    coin_source: &[BellLabel],
) -> Result<SessionTranscript, ProtocolError> {
    let verdict = alice_verify(&alice_outcomes, &announced)?;
    builder.push(Message::ResultsAnnouncement(announced))?;
    builder.push(Message::Verdict(verdict))?;
    let coin = match verdict {
        Verdict::Accept => Coin::Value(toss_from_outcomes(coin_source)?),
        Verdict::Reject => Coin::Abort,
    };
    builder.push(Message::CoinAnnouncement(coin))?;
    builder.finish(alice_outcomes, bob_outcomes)
}

/// Runs one honest session on a fresh shared engine.
pub fn run_honest<R: Rng + ?Sized>(
    config: &SessionConfig,
    rng: &mut R,
) -> Result<SessionTranscript, ProtocolError> {
    let n = config.n_pairs;
    if n == 0 {
        return Err(ProtocolError::NoPairs);
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

    builder.push(Message::SequenceAnnouncement(alice_seq.clone()))?;

    let mut alice_outcomes = Vec::with_capacity(n);
    for (m, &received) in from_bob.iter().enumerate() {
        let o = engine.measure_pair(ParticleId::kept(Party::Alice, m), received, rng)?;
        alice_outcomes.push(report(o, noise, rng));
    }

    let slot_of = alice_seq.inverse();
    let mut bob_outcomes = Vec::with_capacity(n);
    for m in 0..n {
        let received = from_alice[slot_of.pair_at(m)];
        let o = engine.measure_pair(ParticleId::kept(Party::Bob, m), received, rng)?;
        bob_outcomes.push(report(o, noise, rng));
    }

    let announced = bob_outcomes.clone();
    close_session(builder, alice_outcomes, bob_outcomes, announced.clone(), &announced)
}
