//! Simulation and analysis of two-party quantum coin tossing by
//! entanglement swapping.
//!
//! * [`bell`]: Bell labels, Pauli actions and the matching engine that
//!   executes Bell measurements symbolically.
//! * [`statevector`]: a small dense simulator used to cross-check the engine.
//! * [`protocol`]: the honest session, message ordering and transcripts.
//! * [`adversary`]: Bob's reflection attack, Alice's fake-sequence attack and
//!   Monte Carlo estimators.
//! * [`analysis`]: closed-form pass probabilities and noise bounds.
//! * [`verify`]: the engine/oracle equivalence suite.

pub mod adversary;
pub mod analysis;
pub mod bell;
pub mod protocol;
pub mod report;
pub mod rng;
pub mod statevector;
pub mod stats;
pub mod verify;

pub use adversary::{
    best_guess_results, cycle_structure, estimate_fake_sequence, estimate_pass_probability,
    run_fake_sequence_attack, run_reflect_attack, AdversaryError, CycleStructure,
    ExperimentReport, Strategy, StrategyKind,
};
pub use analysis::{
    min_gamma, min_n_for_bias, min_n_for_pass_bound, pass_prob_appendix_sum, pass_prob_paper,
    pass_prob_permutation_model, robustness_ok, AnalysisError, BiasTarget, RobustnessQuery,
};
pub use bell::{
    apply_pauli, parity, total_parity, BellLabel, EngineError, EntangledMatching, ParticleId,
    Party, PauliLabel,
};
pub use protocol::{
    alice_verify, apply_noise, run_honest, toss_from_outcomes, Coin, Message, NoiseModel,
    ProtocolError, Sequence, SessionConfig, SessionTranscript, Verdict,
};
pub use report::{Model, ReportRow};
