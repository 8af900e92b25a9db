//! Symbolic Bell-state algebra.
//!
//! The four Bell states are encoded as two bits, `hi lo`:
//!
//! ```text
//! 00  |Φ⁺⟩ = (|00⟩ + |11⟩) / √2
//! 01  |Φ⁻⟩ = (|00⟩ − |11⟩) / √2
//! 10  |Ψ⁺⟩ = (|01⟩ + |10⟩) / √2
//! 11  |Ψ⁻⟩ = (|01⟩ − |10⟩) / √2
//! ```
//!
//! A single-sided Pauli `σ ⊗ I` maps Bell states to Bell states up to a
//! global phase, so with phases dropped both labels and Paulis form the
//! group `Z₂ × Z₂` under XOR. [`EntangledMatching`] uses this to track a
//! collection of EPR pairs through Bell measurements and entanglement
//! swapping without a statevector.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::BitXor;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One of the four Bell states, as a two-bit label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BellLabel(u8);

impl BellLabel {
    pub const PHI_PLUS: Self = Self(0b00);
    pub const PHI_MINUS: Self = Self(0b01);
    pub const PSI_PLUS: Self = Self(0b10);
    pub const PSI_MINUS: Self = Self(0b11);

    pub const ALL: [Self; 4] = [
        Self::PHI_PLUS,
        Self::PHI_MINUS,
        Self::PSI_PLUS,
        Self::PSI_MINUS,
    ];

    pub fn from_bits(hi: bool, lo: bool) -> Self {
        Self(((hi as u8) << 1) | lo as u8)
    }

    /// Builds a label from its two-bit code; only the low two bits are used.
    pub fn from_code(code: u8) -> Self {
        Self(code & 0b11)
    }

    pub fn code(self) -> u8 {
        self.0
    }

    pub fn hi(self) -> bool {
        self.0 & 0b10 != 0
    }

    pub fn lo(self) -> bool {
        self.0 & 0b01 != 0
    }

    /// Even (`0`) for Φ⁺ and Ψ⁻, odd (`1`) for Φ⁻ and Ψ⁺.
    pub fn parity(self) -> u8 {
        (self.0 >> 1) ^ (self.0 & 1)
    }

    pub fn name(self) -> &'static str {
        match self.0 {
            0b00 => "Φ⁺",
            0b01 => "Φ⁻",
            0b10 => "Ψ⁺",
            _ => "Ψ⁻",
        }
    }

    /// Two-character bit string, e.g. `"10"` for Ψ⁺.
    pub fn bit_string(self) -> &'static str {
        ["00", "01", "10", "11"][self.0 as usize]
    }
}

impl BitXor for BellLabel {
    type Output = Self;

    fn bitxor(self, rhs: Self) -> Self {
        Self(self.0 ^ rhs.0)
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BellLabel {
    type Err = ParseLabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "00" | "Φ⁺" | "phi+" => Ok(Self::PHI_PLUS),
            "01" | "Φ⁻" | "phi-" => Ok(Self::PHI_MINUS),
            "10" | "Ψ⁺" | "psi+" => Ok(Self::PSI_PLUS),
            "11" | "Ψ⁻" | "psi-" => Ok(Self::PSI_MINUS),
            _ => Err(ParseLabelError(s.to_owned())),
        }
    }
}

impl Serialize for BellLabel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.bit_string())
    }
}

impl<'de> Deserialize<'de> for BellLabel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("unrecognised label `{0}`")]
pub struct ParseLabelError(pub String);

/// A phase-free Pauli operator: `I = (0,0)`, `X = (1,0)`, `Z = (0,1)`, `Y = (1,1)`.
///
/// `Y` here is the real matrix `[[0, −1], [1, 0]] = XZ`, which differs from
/// the Hermitian `σ_y` by a global phase only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PauliLabel {
    pub x: bool,
    pub z: bool,
}

impl PauliLabel {
    pub const I: Self = Self { x: false, z: false };
    pub const X: Self = Self { x: true, z: false };
    pub const Z: Self = Self { x: false, z: true };
    pub const Y: Self = Self { x: true, z: true };

    pub const ALL: [Self; 4] = [Self::I, Self::X, Self::Y, Self::Z];

    /// The Bell label this Pauli produces from Φ⁺ when applied to one qubit.
    pub fn as_label(self) -> BellLabel {
        BellLabel::from_bits(self.x, self.z)
    }

    /// Parity of the Bell label `σ|Φ⁺⟩`; the coin value a single flip forces.
    pub fn parity(self) -> u8 {
        self.as_label().parity()
    }

    pub fn name(self) -> &'static str {
        match (self.x, self.z) {
            (false, false) => "I",
            (true, false) => "X",
            (false, true) => "Z",
            (true, true) => "Y",
        }
    }
}

impl BitXor for PauliLabel {
    type Output = Self;

    fn bitxor(self, rhs: Self) -> Self {
        Self {
            x: self.x ^ rhs.x,
            z: self.z ^ rhs.z,
        }
    }
}

impl fmt::Display for PauliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PauliLabel {
    type Err = ParseLabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "I" | "i" => Ok(Self::I),
            "X" | "x" => Ok(Self::X),
            "Y" | "y" => Ok(Self::Y),
            "Z" | "z" => Ok(Self::Z),
            _ => Err(ParseLabelError(s.to_owned())),
        }
    }
}

impl Serialize for PauliLabel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for PauliLabel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn parity(label: BellLabel) -> u8 {
    label.parity()
}

/// Label of `(σ ⊗ I)|b⟩` up to global phase.
pub fn apply_pauli(label: BellLabel, pauli: PauliLabel) -> BellLabel {
    label ^ pauli.as_label()
}

/// XOR of outcome parities. The empty list has parity 0.
pub fn total_parity<'a, I>(outcomes: I) -> u8
where
    I: IntoIterator<Item = &'a BellLabel>,
{
    outcomes.into_iter().fold(0, |acc, b| acc ^ b.parity())
}

/// XOR of labels as elements of `Z₂ × Z₂`.
pub fn label_xor<'a, I>(labels: I) -> BellLabel
where
    I: IntoIterator<Item = &'a BellLabel>,
{
    labels
        .into_iter()
        .fold(BellLabel::PHI_PLUS, |acc, &b| acc ^ b)
}

/// Label left on the two outer particles after swapping pairs labelled
/// `first` and `second` with the given measurement outcome.
pub fn residual_label(first: BellLabel, second: BellLabel, outcome: BellLabel) -> BellLabel {
    first ^ second ^ outcome
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn other(self) -> Self {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Alice => "alice",
            Party::Bob => "bob",
        })
    }
}

/// A particle, numbered `1..=2N` within its owner's supply.
///
/// Pair `m` (zero-based) consists of particles `2m+1` (odd, sent to the
/// other party) and `2m+2` (even, kept).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParticleId {
    pub owner: Party,
    pub index: u32,
}

impl ParticleId {
    pub fn new(owner: Party, index: u32) -> Self {
        Self { owner, index }
    }

    /// The transmitted particle of zero-based pair `pair`.
    pub fn sent(owner: Party, pair: usize) -> Self {
        Self::new(owner, 2 * pair as u32 + 1)
    }

    /// The retained particle of zero-based pair `pair`.
    pub fn kept(owner: Party, pair: usize) -> Self {
        Self::new(owner, 2 * pair as u32 + 2)
    }

    /// Zero-based pair this particle was created in.
    pub fn pair(self) -> usize {
        (self.index as usize - 1) / 2
    }
}

impl fmt::Display for ParticleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.owner {
            Party::Alice => 'A',
            Party::Bob => 'B',
        };
        write!(f, "{tag}{}", self.index)
    }
}

impl FromStr for ParticleId {
    type Err = ParseLabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseLabelError(s.to_owned());
        let mut chars = s.chars();
        let owner = match chars.next() {
            Some('A') => Party::Alice,
            Some('B') => Party::Bob,
            _ => return Err(err()),
        };
        let index: u32 = chars.as_str().parse().map_err(|_| err())?;
        if index == 0 {
            return Err(err());
        }
        Ok(Self::new(owner, index))
    }
}

impl Serialize for ParticleId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ParticleId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("unknown particle {0}")]
    UnknownParticle(ParticleId),
    #[error("particle {0} has already been measured")]
    AlreadyMeasured(ParticleId),
    #[error("cannot Bell-measure particle {0} with itself")]
    SelfMeasurement(ParticleId),
    #[error("particle {0} appears in more than one edge")]
    DuplicateParticle(ParticleId),
    #[error("outcome {outcome} is impossible for partners in state {label}")]
    ImpossibleOutcome { label: BellLabel, outcome: BellLabel },
}

/// A recorded Bell measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub pair: (ParticleId, ParticleId),
    pub outcome: BellLabel,
}

/// A perfect matching of live particles, each edge carrying a Bell label.
///
/// Invariant: `xor(live labels) ^ xor(history outcomes) == xor(initial labels) ^ xor(applied Paulis)`.
/// Projected onto parity this is the statement that Bell measurements
/// never change the total parity of a collection of EPR pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntangledMatching {
    partner: BTreeMap<ParticleId, ParticleId>,
    labels: BTreeMap<(ParticleId, ParticleId), BellLabel>,
    consumed: BTreeSet<ParticleId>,
    history: Vec<MeasurementRecord>,
    initial_xor: BellLabel,
    frame_xor: BellLabel,
}

fn edge_key(a: ParticleId, b: ParticleId) -> (ParticleId, ParticleId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl EntangledMatching {
    pub fn new<I>(edges: I) -> Result<Self, EngineError>
    where
        I: IntoIterator<Item = (ParticleId, ParticleId, BellLabel)>,
    {
        let mut partner = BTreeMap::new();
        let mut labels = BTreeMap::new();
        let mut initial_xor = BellLabel::PHI_PLUS;
        for (a, b, label) in edges {
            if a == b {
                return Err(EngineError::SelfMeasurement(a));
            }
            for (p, q) in [(a, b), (b, a)] {
                if partner.insert(p, q).is_some() {
                    return Err(EngineError::DuplicateParticle(p));
                }
            }
            labels.insert(edge_key(a, b), label);
            initial_xor = initial_xor ^ label;
        }
        Ok(Self {
            partner,
            labels,
            consumed: BTreeSet::new(),
            history: Vec::new(),
            initial_xor,
            frame_xor: BellLabel::PHI_PLUS,
        })
    }

    /// `pairs` EPR pairs per party, every pair in Φ⁺.
    pub fn protocol_initial(pairs: usize) -> Self {
        let edges = [Party::Alice, Party::Bob].into_iter().flat_map(|owner| {
            (0..pairs).map(move |m| {
                (
                    ParticleId::sent(owner, m),
                    ParticleId::kept(owner, m),
                    BellLabel::PHI_PLUS,
                )
            })
        });
        Self::new(edges).expect("protocol particles are distinct")
    }

    pub fn partner_of(&self, p: ParticleId) -> Result<ParticleId, EngineError> {
        self.check_live(p)?;
        Ok(self.partner[&p])
    }

    /// Current label of the edge containing `p`.
    pub fn label_of(&self, p: ParticleId) -> Result<BellLabel, EngineError> {
        let q = self.partner_of(p)?;
        Ok(self.labels[&edge_key(p, q)])
    }

    pub fn is_live(&self, p: ParticleId) -> bool {
        self.partner.contains_key(&p)
    }

    pub fn live_particles(&self) -> impl Iterator<Item = ParticleId> + '_ {
        self.partner.keys().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (ParticleId, ParticleId, BellLabel)> + '_ {
        self.labels.iter().map(|(&(a, b), &l)| (a, b, l))
    }

    pub fn consumed(&self) -> &BTreeSet<ParticleId> {
        &self.consumed
    }

    pub fn history(&self) -> &[MeasurementRecord] {
        &self.history
    }

    pub fn initial_xor(&self) -> BellLabel {
        self.initial_xor
    }

    /// Applies `σ` to a single live particle; its edge label is XOR-ed with `σ`.
    pub fn apply_pauli(&mut self, p: ParticleId, pauli: PauliLabel) -> Result<(), EngineError> {
        let q = self.partner_of(p)?;
        let label = self
            .labels
            .get_mut(&edge_key(p, q))
            .expect("live particle has an edge");
        *label = apply_pauli(*label, pauli);
        self.frame_xor = self.frame_xor ^ pauli.as_label();
        Ok(())
    }

    /// Bell measurement on `u` and `v`.
    ///
    /// Partners yield their own label without touching `rng`. Otherwise the
    /// outcome is uniform over the four labels and the two outer particles
    /// become entangled with label `b₁ ⊕ b₂ ⊕ outcome`.
    pub fn measure_pair<R: Rng + ?Sized>(
        &mut self,
        u: ParticleId,
        v: ParticleId,
        rng: &mut R,
    ) -> Result<BellLabel, EngineError> {
        self.measure_with(u, v, || BellLabel::from_code(rng.random_range(0..4u8)))
    }

    /// Bell measurement whose outcome is supplied by the caller, for replaying
    /// branches sampled elsewhere (e.g. by the statevector oracle).
    pub fn measure_pair_forced(
        &mut self,
        u: ParticleId,
        v: ParticleId,
        outcome: BellLabel,
    ) -> Result<BellLabel, EngineError> {
        self.measure_with(u, v, || outcome)
    }

    fn measure_with<F>(
        &mut self,
        u: ParticleId,
        v: ParticleId,
        swap_outcome: F,
    ) -> Result<BellLabel, EngineError>
    where
        F: FnOnce() -> BellLabel,
    {
        if u == v {
            return Err(EngineError::SelfMeasurement(u));
        }
        let u_partner = self.partner_of(u)?;
        let v_partner = self.partner_of(v)?;

        let outcome = if u_partner == v {
            let label = self.labels[&edge_key(u, v)];
            self.labels.remove(&edge_key(u, v));
            label
        } else {
            let b1 = self.labels[&edge_key(u, u_partner)];
            let b2 = self.labels[&edge_key(v, v_partner)];
            let outcome = swap_outcome();
            self.labels.remove(&edge_key(u, u_partner));
            self.labels.remove(&edge_key(v, v_partner));
            self.labels
                .insert(edge_key(u_partner, v_partner), residual_label(b1, b2, outcome));
            self.partner.insert(u_partner, v_partner);
            self.partner.insert(v_partner, u_partner);
            outcome
        };
        self.partner.remove(&u);
        self.partner.remove(&v);
        self.consumed.insert(u);
        self.consumed.insert(v);
        self.history.push(MeasurementRecord {
            pair: (u, v),
            outcome,
        });
        Ok(outcome)
    }

    /// Forced measurement that additionally rejects outcomes with zero
    /// probability (a partner pair can only yield its own label).
    pub fn measure_pair_checked(
        &mut self,
        u: ParticleId,
        v: ParticleId,
        outcome: BellLabel,
    ) -> Result<BellLabel, EngineError> {
        if u != v && self.partner_of(u)? == v {
            let label = self.label_of(u)?;
            if label != outcome {
                return Err(EngineError::ImpossibleOutcome { label, outcome });
            }
        }
        self.measure_pair_forced(u, v, outcome)
    }

    /// Whether the two-bit conservation law currently holds.
    pub fn conservation_holds(&self) -> bool {
        let live = label_xor(self.labels.values());
        let measured = self
            .history
            .iter()
            .fold(BellLabel::PHI_PLUS, |acc, r| acc ^ r.outcome);
        live ^ measured == self.initial_xor ^ self.frame_xor
    }

    fn check_live(&self, p: ParticleId) -> Result<(), EngineError> {
        if self.partner.contains_key(&p) {
            Ok(())
        } else if self.consumed.contains(&p) {
            Err(EngineError::AlreadyMeasured(p))
        } else {
            Err(EngineError::UnknownParticle(p))
        }
    }
}
