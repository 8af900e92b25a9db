//! Tabular results shared by the CLI emitters.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::adversary::{estimate_pass_probability, AdversaryError};
use crate::analysis::{
    min_gamma, pass_prob_appendix_sum, pass_prob_paper, pass_prob_permutation_model, AnalysisError,
};
use crate::bell::PauliLabel;
use crate::protocol::SessionConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    ClosedForm,
    AppendixSum,
    PermutationExact,
    MonteCarlo,
    MinGamma,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::ClosedForm => "closed-form",
            Model::AppendixSum => "appendix-sum",
            Model::PermutationExact => "permutation-exact",
            Model::MonteCarlo => "monte-carlo",
            Model::MinGamma => "min-gamma",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One value for one pair count under one model. Monte Carlo rows carry
/// an interval, trial count and seed; `min-gamma` rows carry the
/// pass-probability threshold they were computed for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n_pairs: u32,
    pub model: Model,
    pub value: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub threshold: Option<f64>,
}

impl ReportRow {
    pub fn exact(n_pairs: u32, model: Model, value: f64) -> Self {
        Self {
            n_pairs,
            model,
            value,
            ci_low: None,
            ci_high: None,
            trials: None,
            seed: None,
            threshold: None,
        }
    }
}

/// The three analytic pass probabilities for `n` pairs.
pub fn analytic_rows(n: u32) -> Vec<ReportRow> {
    vec![
        ReportRow::exact(n, Model::ClosedForm, pass_prob_paper(n)),
        ReportRow::exact(n, Model::AppendixSum, pass_prob_appendix_sum(n)),
        ReportRow::exact(n, Model::PermutationExact, pass_prob_permutation_model(n)),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloSpec {
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
}

/// Rows for `N = 1..=max_n`, sorted by `(N, model)`.
///
/// Monte Carlo rows for pair count `N` use master seed `seed + N` so each
/// row is reproducible on its own.
pub fn analyze_rows(
    max_n: u32,
    threshold: f64,
    monte_carlo: Option<MonteCarloSpec>,
) -> Result<Vec<ReportRow>, ReportError> {
    let mut rows = Vec::new();
    for n in 1..=max_n {
        rows.extend(analytic_rows(n));
        if let Some(mc) = monte_carlo {
            let seed = mc.seed.wrapping_add(u64::from(n));
            let cfg = SessionConfig::new(n as usize, seed).expect("n >= 1");
            let r = estimate_pass_probability(&cfg, PauliLabel::I, mc.trials)?;
            rows.push(ReportRow {
                n_pairs: n,
                model: Model::MonteCarlo,
                value: r.estimate,
                ci_low: Some(r.ci_low),
                ci_high: Some(r.ci_high),
                trials: Some(mc.trials),
                seed: Some(seed),
                threshold: None,
            });
        }
        rows.push(ReportRow {
            threshold: Some(threshold),
            ..ReportRow::exact(n, Model::MinGamma, min_gamma(n, threshold)?)
        });
    }
    rows.sort_by_key(|r| (r.n_pairs, r.model));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_sorted_and_bounded() {
        let rows = analyze_rows(11, 0.01, None).unwrap();
        assert_eq!(rows.len(), 11 * 4);
        assert!(rows.windows(2).all(|w| (w[0].n_pairs, w[0].model) < (w[1].n_pairs, w[1].model)));
        assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.value)));
        for r in rows.iter().filter(|r| r.n_pairs == 1 && r.model != Model::MinGamma) {
            assert_eq!(r.value, 1.0);
        }
        let closed11 = rows
            .iter()
            .find(|r| r.n_pairs == 11 && r.model == Model::ClosedForm)
            .unwrap();
        assert!((closed11.value - 0.009095).abs() < 1e-6);
        let g11 = rows
            .iter()
            .find(|r| r.n_pairs == 11 && r.model == Model::MinGamma)
            .unwrap();
        assert!((g11.value - 0.99909).abs() < 5e-6);
    }

    #[test]
    fn monte_carlo_rows_present() {
        let rows = analyze_rows(2, 0.01, Some(MonteCarloSpec { trials: 1000, seed: 1 })).unwrap();
        let mc: Vec<_> = rows.iter().filter(|r| r.model == Model::MonteCarlo).collect();
        assert_eq!(mc.len(), 2);
        assert_eq!(mc[0].value, 1.0);
        assert_eq!(mc[1].seed, Some(3));
    }
}
