use std::fs;

use qct_core::adversary::{estimate_fake_sequence, estimate_pass_probability, ExperimentReport, StrategyKind};
use qct_core::analysis::{pass_prob_appendix_sum, pass_prob_paper, pass_prob_permutation_model};
use qct_core::report::{analyze_rows, MonteCarloSpec, ReportError};
use qct_core::rng::session_rng;
use qct_core::verify::{run_verification, VerifyOptions};
use qct_core::{run_honest, BellLabel, NoiseModel, PauliLabel, SessionConfig};

use crate::output::{emit, Field, Record, Table};
use crate::{CliError, Command, Common, StrategyArg};

pub(crate) fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Toss { n_pairs, gamma, common } => toss(n_pairs, gamma, &common),
        Command::Cheat {
            strategy,
            n_pairs,
            trials,
            flip,
            desired,
            gamma,
            common,
        } => cheat(strategy, n_pairs, trials, flip, desired, gamma, &common),
        Command::Analyze {
            n_pairs,
            threshold,
            trials,
            common,
        } => analyze(n_pairs, threshold, trials, &common),
        Command::Verify {
            n_pairs,
            trials,
            samples,
            inject_wrong_rule,
            common,
        } => verify(n_pairs, trials, samples, inject_wrong_rule, &common),
    }
}

fn config_error(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn session_config(n_pairs: usize, seed: u64, gamma: Option<f64>) -> Result<SessionConfig, CliError> {
    let mut cfg = SessionConfig::new(n_pairs, seed).map_err(config_error)?;
    if let Some(g) = gamma {
        cfg = cfg.with_noise(NoiseModel::new(g).map_err(config_error)?);
    }
    Ok(cfg)
}

fn labels(v: &[BellLabel]) -> Field {
    Field::List(v.iter().map(|b| b.bit_string().to_owned()).collect())
}

fn toss(n_pairs: usize, gamma: Option<f64>, common: &Common) -> Result<(), CliError> {
    let cfg = session_config(n_pairs, common.seed, gamma)?;
    let transcript = run_honest(&cfg, &mut session_rng(cfg.seed)).map_err(config_error)?;
    if let Some(path) = &common.out {
        fs::write(path, transcript.to_jsonl())?;
    }
    let sequence = transcript
        .announced_sequence()
        .map(|s| s.slots().iter().map(|&p| p as u64).collect())
        .unwrap_or_default();
    let record: Record = vec![
        ("n_pairs", Field::Int(n_pairs as u64)),
        ("seed", Field::Int(cfg.seed)),
        ("gamma", gamma.map_or(Field::Null, Field::Num)),
        ("sequence", Field::IntList(sequence)),
        ("alice_outcomes", labels(&transcript.alice_outcomes)),
        ("bob_results", labels(&transcript.bob_outcomes)),
        ("verdict", Field::Str(format!("{:?}", transcript.verdict).to_lowercase())),
        ("coin", Field::Str(transcript.coin.to_string())),
    ];
    emit(&Table::Single(record), common.format, None)
}

#[allow(clippy::too_many_arguments)]
fn cheat(
    strategy: StrategyArg,
    n_pairs: usize,
    trials: u64,
    flip: Option<PauliLabel>,
    desired: Option<u8>,
    gamma: Option<f64>,
    common: &Common,
) -> Result<(), CliError> {
    if trials == 0 {
        return Err(CliError::Config("--trials must be at least 1".into()));
    }
    let cfg = session_config(n_pairs, common.seed, gamma)?;
    let report = match strategy {
        StrategyArg::Reflect => {
            if desired.is_some() {
                return Err(CliError::Config(
                    "--desired applies to Alice's fake-seq strategy, not Bob's reflect".into(),
                ));
            }
            estimate_pass_probability(&cfg, flip.unwrap_or(PauliLabel::I), trials)
        }
        StrategyArg::FakeSeq => {
            if flip.is_some() {
                return Err(CliError::Config(
                    "--flip applies to Bob's reflect strategy, not Alice's fake-seq".into(),
                ));
            }
            estimate_fake_sequence(&cfg, desired.unwrap_or(0), trials)
        }
    }
    .map_err(config_error)?;
    emit(&Table::Single(cheat_record(&report, gamma)), common.format, common.out.as_deref())
}

fn cheat_record(r: &ExperimentReport, gamma: Option<f64>) -> Record {
    let n = r.n_pairs as u32;
    let (strategy, param) = match r.strategy.kind {
        StrategyKind::Reflect { flip } => ("reflect", Field::Str(flip.to_string())),
        StrategyKind::FakeSequence { desired } => ("fake-seq", Field::Int(desired.into())),
        StrategyKind::Honest => ("honest", Field::Null),
    };
    let param_name = match r.strategy.kind {
        StrategyKind::FakeSequence { .. } => "desired",
        _ => "flip",
    };
    vec![
        ("strategy", Field::Str(strategy.into())),
        ("party", Field::Str(r.strategy.party.to_string())),
        (param_name, param),
        ("n_pairs", Field::Int(r.n_pairs as u64)),
        ("gamma", gamma.map_or(Field::Null, Field::Num)),
        ("trials", Field::Int(r.trials)),
        ("successes", Field::Int(r.successes)),
        ("estimate", Field::Num(r.estimate)),
        ("ci_low", Field::Num(r.ci_low)),
        ("ci_high", Field::Num(r.ci_high)),
        ("forced_coin_rate", Field::Num(r.forced_coin_rate)),
        ("parity_mismatches", Field::Int(r.parity_mismatches)),
        ("seed", Field::Int(r.seed)),
        ("closed_form", Field::Num(pass_prob_paper(n))),
        ("appendix_sum", Field::Num(pass_prob_appendix_sum(n))),
        ("permutation_exact", Field::Num(pass_prob_permutation_model(n))),
        ("model_discrepancy", Field::Bool(n >= 3)),
    ]
}

fn analyze(max_n: u32, threshold: f64, trials: Option<u64>, common: &Common) -> Result<(), CliError> {
    if max_n == 0 {
        return Err(CliError::Config("--n-pairs must be at least 1".into()));
    }
    if trials == Some(0) {
        return Err(CliError::Config("--trials must be at least 1".into()));
    }
    let mc = trials.map(|trials| MonteCarloSpec {
        trials,
        seed: common.seed,
    });
    let rows = analyze_rows(max_n, threshold, mc).map_err(|e: ReportError| config_error(e))?;
    emit(&Table::Rows(rows), common.format, common.out.as_deref())
}

fn verify(
    max_pairs: usize,
    trials: u64,
    samples: u64,
    inject_wrong_rule: bool,
    common: &Common,
) -> Result<(), CliError> {
    if !(1..=8).contains(&max_pairs) {
        return Err(CliError::Config("--n-pairs must lie in 1..=8 for the statevector oracle".into()));
    }
    if trials == 0 || samples == 0 {
        return Err(CliError::Config("--trials and --samples must be at least 1".into()));
    }
    let mut opts = VerifyOptions {
        seed: common.seed,
        lemma_sequences: trials,
        max_pairs,
        samples,
        ..VerifyOptions::default()
    };
    if inject_wrong_rule {
        opts.residual_rule = |b1, b2, _| b1 ^ b2;
    }
    let report = run_verification(&opts);
    emit(&Table::Checks(report.checks.clone()), common.format, common.out.as_deref())?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::VerificationFailed)
    }
}
