//! Dense statevector simulator used as an independent check on the
//! symbolic engine in [`crate::bell`].
//!
//! Qubit 0 is the most significant bit of the basis index, so
//! `prepare_pairs(&[Φ⁺])` has amplitudes `(1/√2, 0, 0, 1/√2)` over
//! `|00⟩, |01⟩, |10⟩, |11⟩`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::Index;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::bell::{BellLabel, PauliLabel};

pub const MAX_QUBITS: usize = 16;
pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{0} qubits requested, at most {MAX_QUBITS} supported")]
    TooManyQubits(usize),
    #[error("qubit index {index} out of range for a {qubits}-qubit state")]
    IndexOutOfRange { index: usize, qubits: usize },
    #[error("Bell measurement needs two distinct qubits, got {0} twice")]
    CoincidentIndices(usize),
}

/// Real amplitudes of each Bell state over `|00⟩, |01⟩, |10⟩, |11⟩`.
fn bell_vector(label: BellLabel) -> [f64; 4] {
    let h = FRAC_1_SQRT_2;
    match label {
        BellLabel::PHI_PLUS => [h, 0.0, 0.0, h],
        BellLabel::PHI_MINUS => [h, 0.0, 0.0, -h],
        BellLabel::PSI_PLUS => [0.0, h, h, 0.0],
        _ => [0.0, h, -h, 0.0],
    }
}

/// Real 2×2 matrix of each Pauli, row-major. `Y = [[0, −1], [1, 0]]`.
fn pauli_matrix(p: PauliLabel) -> [[f64; 2]; 2] {
    match (p.x, p.z) {
        (false, false) => [[1.0, 0.0], [0.0, 1.0]],
        (true, false) => [[0.0, 1.0], [1.0, 0.0]],
        (false, true) => [[1.0, 0.0], [0.0, -1.0]],
        (true, true) => [[0.0, -1.0], [1.0, 0.0]],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: Vec<Complex64>,
    qubits: usize,
}

/// Probabilities of the four Bell outcomes, indexed by label code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeDistribution(pub [f64; 4]);

impl OutcomeDistribution {
    pub fn uniform() -> Self {
        Self([0.25; 4])
    }

    pub fn point(label: BellLabel) -> Self {
        let mut p = [0.0; 4];
        p[label.code() as usize] = 1.0;
        Self(p)
    }

    pub fn prob(&self, label: BellLabel) -> f64 {
        self.0[label.code() as usize]
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Label carrying (numerically) all of the mass, if any.
    pub fn support_point(&self, tol: f64) -> Option<BellLabel> {
        BellLabel::ALL
            .into_iter()
            .find(|&b| (self.prob(b) - 1.0).abs() <= tol)
    }

    pub fn total_variation(&self, other: &Self) -> f64 {
        0.5 * self
            .0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Empirical distribution from per-label counts.
    pub fn from_counts(counts: &[u64; 4]) -> Self {
        let n: u64 = counts.iter().sum();
        let n = n.max(1) as f64;
        Self(counts.map(|c| c as f64 / n))
    }
}

impl Index<BellLabel> for OutcomeDistribution {
    type Output = f64;

    fn index(&self, label: BellLabel) -> &f64 {
        &self.0[label.code() as usize]
    }
}

impl QuantumState {
    /// `|0…0⟩` on `qubits` qubits.
    pub fn zero(qubits: usize) -> Result<Self, OracleError> {
        if qubits > MAX_QUBITS {
            return Err(OracleError::TooManyQubits(qubits));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes, qubits })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn shift(&self, q: usize) -> usize {
        self.qubits - 1 - q
    }

    fn check_qubit(&self, q: usize) -> Result<(), OracleError> {
        if q >= self.qubits {
            Err(OracleError::IndexOutOfRange {
                index: q,
                qubits: self.qubits,
            })
        } else {
            Ok(())
        }
    }

    fn check_pair(&self, q1: usize, q2: usize) -> Result<(), OracleError> {
        self.check_qubit(q1)?;
        self.check_qubit(q2)?;
        if q1 == q2 {
            return Err(OracleError::CoincidentIndices(q1));
        }
        Ok(())
    }

    /// Applies a single-qubit Pauli to qubit `q`.
    pub fn apply_pauli(&mut self, q: usize, pauli: PauliLabel) -> Result<(), OracleError> {
        self.check_qubit(q)?;
        let m = pauli_matrix(pauli);
        let bit = 1usize << self.shift(q);
        for i in 0..self.amplitudes.len() {
            if i & bit != 0 {
                continue;
            }
            let a0 = self.amplitudes[i];
            let a1 = self.amplitudes[i | bit];
            self.amplitudes[i] = a0 * m[0][0] + a1 * m[0][1];
            self.amplitudes[i | bit] = a0 * m[1][0] + a1 * m[1][1];
        }
        Ok(())
    }

    /// Basis indices `[|00⟩, |01⟩, |10⟩, |11⟩]` on `(q1, q2)` for every
    /// assignment of the remaining qubits.
    fn blocks(&self, q1: usize, q2: usize) -> impl Iterator<Item = [usize; 4]> {
        let b1 = 1usize << self.shift(q1);
        let b2 = 1usize << self.shift(q2);
        (0..self.amplitudes.len())
            .filter(move |i| i & (b1 | b2) == 0)
            .map(move |i| [i, i | b2, i | b1, i | b1 | b2])
    }

    fn overlap(&self, block: &[usize; 4], label: BellLabel) -> Complex64 {
        let v = bell_vector(label);
        block
            .iter()
            .zip(v.iter())
            .map(|(&i, &c)| self.amplitudes[i] * c)
            .sum()
    }
}

/// Tensor product of the given Bell states; pair `i` occupies qubits `2i` and `2i+1`.
pub fn prepare_pairs(labels: &[BellLabel]) -> Result<QuantumState, OracleError> {
    let qubits = 2 * labels.len();
    if qubits > MAX_QUBITS {
        return Err(OracleError::TooManyQubits(qubits));
    }
    let mut amplitudes = vec![Complex64::new(1.0, 0.0)];
    for &label in labels {
        let v = bell_vector(label);
        amplitudes = amplitudes
            .iter()
            .flat_map(|&a| v.iter().map(move |&c| a * c))
            .collect();
    }
    Ok(QuantumState { amplitudes, qubits })
}

/// Exact Born-rule probabilities of a Bell measurement on `(q1, q2)`.
pub fn bell_distribution(
    state: &QuantumState,
    q1: usize,
    q2: usize,
) -> Result<OutcomeDistribution, OracleError> {
    state.check_pair(q1, q2)?;
    let mut probs = [0.0; 4];
    for block in state.blocks(q1, q2) {
        for label in BellLabel::ALL {
            probs[label.code() as usize] += state.overlap(&block, label).norm_sqr();
        }
    }
    Ok(OutcomeDistribution(probs))
}

/// Samples a Bell outcome on `(q1, q2)` and returns the renormalised
/// post-measurement state. Zero-probability outcomes are never returned.
pub fn bell_measure_collapse<R: Rng + ?Sized>(
    state: &QuantumState,
    q1: usize,
    q2: usize,
    rng: &mut R,
) -> Result<(BellLabel, QuantumState), OracleError> {
    let dist = bell_distribution(state, q1, q2)?;
    let r: f64 = rng.random::<f64>() * dist.total();
    let mut acc = 0.0;
    let mut chosen = None;
    for label in BellLabel::ALL {
        let p = dist.prob(label);
        if p <= 0.0 {
            continue;
        }
        acc += p;
        chosen = Some(label);
        if r < acc {
            break;
        }
    }
    let outcome = chosen.expect("a normalised state has some outcome with positive probability");
    Ok((outcome, project(state, q1, q2, outcome, dist.prob(outcome))))
}

/// Collapses onto a specific outcome; `None` when it has zero probability.
pub fn bell_project(
    state: &QuantumState,
    q1: usize,
    q2: usize,
    outcome: BellLabel,
) -> Result<Option<QuantumState>, OracleError> {
    let p = bell_distribution(state, q1, q2)?.prob(outcome);
    if p <= NORM_TOLERANCE {
        return Ok(None);
    }
    Ok(Some(project(state, q1, q2, outcome, p)))
}

fn project(
    state: &QuantumState,
    q1: usize,
    q2: usize,
    outcome: BellLabel,
    prob: f64,
) -> QuantumState {
    let v = bell_vector(outcome);
    let scale = 1.0 / prob.sqrt();
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); state.amplitudes.len()];
    for block in state.blocks(q1, q2) {
        let c = state.overlap(&block, outcome) * scale;
        for (&i, &coef) in block.iter().zip(v.iter()) {
            amplitudes[i] = c * coef;
        }
    }
    QuantumState {
        amplitudes,
        qubits: state.qubits,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{apply_pauli, residual_label};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = 1e-12;

    fn approx(a: Complex64, re: f64) -> bool {
        (a.re - re).abs() < TOL && a.im.abs() < TOL
    }

    #[test]
    fn prepare_single_pairs() {
        let h = FRAC_1_SQRT_2;
        let s = prepare_pairs(&[BellLabel::PHI_PLUS]).unwrap();
        let want = [h, 0.0, 0.0, h];
        assert!(s.amplitudes().iter().zip(want).all(|(&a, w)| approx(a, w)));

        let s = prepare_pairs(&[BellLabel::PSI_MINUS]).unwrap();
        let want = [0.0, h, -h, 0.0];
        assert!(s.amplitudes().iter().zip(want).all(|(&a, w)| approx(a, w)));
    }

    #[test]
    fn prepare_product_state() {
        let s = prepare_pairs(&[BellLabel::PHI_PLUS, BellLabel::PHI_PLUS]).unwrap();
        assert_eq!(s.amplitudes().len(), 16);
        for (i, &a) in s.amplitudes().iter().enumerate() {
            let want = if [0b0000, 0b0011, 0b1100, 0b1111].contains(&i) { 0.5 } else { 0.0 };
            assert!(approx(a, want), "index {i}: {a}");
        }
        assert!((s.norm_sqr() - 1.0).abs() < NORM_TOLERANCE);
    }

    #[test]
    fn too_many_qubits() {
        let labels = vec![BellLabel::PHI_PLUS; 9];
        assert_eq!(prepare_pairs(&labels), Err(OracleError::TooManyQubits(18)));
        assert!(prepare_pairs(&labels[..8]).is_ok());
    }

    #[test]
    fn index_errors() {
        let s = prepare_pairs(&[BellLabel::PHI_PLUS]).unwrap();
        assert_eq!(
            bell_distribution(&s, 0, 2),
            Err(OracleError::IndexOutOfRange { index: 2, qubits: 2 })
        );
        assert_eq!(bell_distribution(&s, 1, 1), Err(OracleError::CoincidentIndices(1)));
    }

    #[test]
    fn eigenstate_distribution() {
        for b in BellLabel::ALL {
            let s = prepare_pairs(&[b]).unwrap();
            let d = bell_distribution(&s, 0, 1).unwrap();
            assert!(d.max_abs_diff(&OutcomeDistribution::point(b)) < TOL);
            // qubit order within a pair does not change the label
            let d = bell_distribution(&s, 1, 0).unwrap();
            assert!(d.max_abs_diff(&OutcomeDistribution::point(b)) < TOL);
        }
    }

    #[test]
    fn cross_pair_distributions_are_uniform() {
        for b1 in BellLabel::ALL {
            for b2 in BellLabel::ALL {
                let s = prepare_pairs(&[b1, b2]).unwrap();
                let d = bell_distribution(&s, 1, 2).unwrap();
                assert!(d.max_abs_diff(&OutcomeDistribution::uniform()) < TOL, "{b1} {b2}: {d:?}");
            }
        }
    }

    #[test]
    fn eigenstate_collapse_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = prepare_pairs(&[BellLabel::PHI_PLUS]).unwrap();
        let (o, post) = bell_measure_collapse(&s, 0, 1, &mut rng).unwrap();
        assert_eq!(o, BellLabel::PHI_PLUS);
        for (a, b) in post.amplitudes().iter().zip(s.amplitudes()) {
            assert!((a - b).norm() < TOL);
        }
    }

    #[test]
    fn swapping_leaves_matching_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = prepare_pairs(&[BellLabel::PHI_PLUS, BellLabel::PHI_PLUS]).unwrap();
        for _ in 0..32 {
            let (m, post) = bell_measure_collapse(&s, 1, 2, &mut rng).unwrap();
            assert!((post.norm_sqr() - 1.0).abs() < NORM_TOLERANCE);
            let residual = bell_distribution(&post, 0, 3).unwrap();
            assert_eq!(residual.support_point(1e-9), Some(m));
        }
    }

    #[test]
    fn psi_minus_phi_minus_residual() {
        let s = prepare_pairs(&[BellLabel::PSI_MINUS, BellLabel::PHI_MINUS]).unwrap();
        let post = bell_project(&s, 1, 2, BellLabel::PHI_PLUS).unwrap().unwrap();
        let residual = bell_distribution(&post, 0, 3).unwrap();
        assert_eq!(residual.support_point(1e-9), Some(BellLabel::PSI_PLUS));
    }

    #[test]
    fn residual_rule_all_64_cases() {
        for b1 in BellLabel::ALL {
            for b2 in BellLabel::ALL {
                let s = prepare_pairs(&[b1, b2]).unwrap();
                for m in BellLabel::ALL {
                    let post = bell_project(&s, 1, 2, m).unwrap().expect("every swap outcome is possible");
                    let d = bell_distribution(&post, 0, 3).unwrap();
                    assert_eq!(d.support_point(1e-9), Some(residual_label(b1, b2, m)), "{b1} {b2} {m}");
                }
            }
        }
    }

    #[test]
    fn pauli_action_matches_label_xor() {
        for b in BellLabel::ALL {
            for p in PauliLabel::ALL {
                let mut s = prepare_pairs(&[b]).unwrap();
                s.apply_pauli(0, p).unwrap();
                let d = bell_distribution(&s, 0, 1).unwrap();
                assert_eq!(d.support_point(1e-9), Some(apply_pauli(b, p)), "{b} {p}");
            }
        }
    }

    #[test]
    fn zero_probability_branch_rejected() {
        let s = prepare_pairs(&[BellLabel::PHI_PLUS]).unwrap();
        assert!(bell_project(&s, 0, 1, BellLabel::PSI_PLUS).unwrap().is_none());
    }
}
