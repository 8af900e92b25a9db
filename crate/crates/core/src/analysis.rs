//! Closed-form security and robustness quantities.
//!
//! Two models of Bob's pass probability are provided:
//!
//! * the published closed form `(5/8)^(N−1)` and the composition-weighted
//!   sum it is derived from, which weights a split of the `N` pairs into
//!   `m` groups by `C(N−1, m−1)`;
//! * the exact average of `4^(m−N)` over a uniformly random permutation
//!   with `m` cycles, which is what the simulated reflection attack
//!   realises. Using `Σ_m c(N,m)·x^m = x(x+1)⋯(x+N−1)` this equals
//!   `(N+1)(N+2)(N+3) / (6·4^N)`.
//!
//! The two agree for `N ≤ 2` and diverge afterwards.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AnalysisError {
    #[error("pair count must be at least 1")]
    NoPairs,
    #[error("gamma must lie in (0, 1], got {0}")]
    InvalidGamma(f64),
    #[error("threshold must lie in {range}, got {value}")]
    InvalidThreshold { value: f64, range: &'static str },
    #[error("bias must lie in (0, 1/2), got {0}")]
    InvalidBias(f64),
}

/// Tolerated cheating bias ξ: a cheater should succeed with probability at
/// most `1/2 + ξ`.
///
/// Sizing is done on the pass-probability bound `2ξ`; see [`min_n_for_bias`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasTarget {
    xi: f64,
}

impl BiasTarget {
    pub fn new(xi: f64) -> Result<Self, AnalysisError> {
        if xi > 0.0 && xi < 0.5 {
            Ok(Self { xi })
        } else {
            Err(AnalysisError::InvalidBias(xi))
        }
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn pass_bound(&self) -> f64 {
        2.0 * self.xi
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustnessQuery {
    gamma: f64,
    n_pairs: u32,
}

impl RobustnessQuery {
    pub fn new(gamma: f64, n_pairs: u32) -> Result<Self, AnalysisError> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(AnalysisError::InvalidGamma(gamma));
        }
        if n_pairs == 0 {
            return Err(AnalysisError::NoPairs);
        }
        Ok(Self { gamma, n_pairs })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n_pairs(&self) -> u32 {
        self.n_pairs
    }
}

fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("probabilities convert to f64")
}

/// `(5/8)^(N−1)`. Panics if `n == 0`.
pub fn pass_prob_paper(n: u32) -> f64 {
    assert!(n >= 1, "pair count must be at least 1");
    let k = n - 1;
    if k <= 1024 {
        0.625f64.powi(k as i32)
    } else {
        (f64::from(k) * 0.625f64.ln()).exp()
    }
}

/// `(5/8)^(N−1)` as an exact rational.
pub fn pass_prob_paper_exact(n: u32) -> BigRational {
    assert!(n >= 1, "pair count must be at least 1");
    ratio(
        BigUint::from(5u32).pow(n - 1),
        BigUint::from(8u32).pow(n - 1),
    )
}

/// `C(n, k)` for all `k` in `0..=n`.
fn binomial_row(n: u32) -> Vec<BigUint> {
    let mut row = vec![BigUint::one()];
    for k in 0..n {
        let next = &row[k as usize] * BigUint::from(n - k) / BigUint::from(k + 1);
        row.push(next);
    }
    row
}

/// `Σ_m C(N−1, m−1)·4^(m−N) / Σ_m C(N−1, m−1)`, exactly.
pub fn pass_prob_appendix_sum_exact(n: u32) -> BigRational {
    assert!(n >= 1, "pair count must be at least 1");
    let row = binomial_row(n - 1);
    let mut weighted = BigRational::zero();
    let mut total = BigUint::zero();
    for (i, c) in row.iter().enumerate() {
        let m = i as u32 + 1;
        weighted += ratio(c.clone(), BigUint::from(4u32).pow(n - m));
        total += c;
    }
    weighted / ratio(total, 1u32)
}

pub fn pass_prob_appendix_sum(n: u32) -> f64 {
    to_f64(&pass_prob_appendix_sum_exact(n))
}

/// Signless Stirling numbers of the first kind `c(n, k)` for `k` in `0..=n`,
/// from `c(n+1, k) = n·c(n, k) + c(n, k−1)`.
pub fn stirling_first_kind_row(n: u32) -> Vec<BigUint> {
    let mut row = vec![BigUint::one()];
    for i in 0..n {
        let mut next = vec![BigUint::zero(); row.len() + 1];
        for (k, c) in row.iter().enumerate() {
            next[k] += c * BigUint::from(i);
            next[k + 1] += c;
        }
        row = next;
    }
    row
}

/// `Σ_m c(N,m)·4^(m−N) / N!`, exactly.
pub fn pass_prob_permutation_model_exact(n: u32) -> BigRational {
    assert!(n >= 1, "pair count must be at least 1");
    let row = stirling_first_kind_row(n);
    let factorial: BigUint = (1..=n).map(BigUint::from).product();
    let mut acc = BigRational::zero();
    for (m, c) in row.iter().enumerate().skip(1) {
        acc += ratio(c.clone(), BigUint::from(4u32).pow(n - m as u32));
    }
    acc / ratio(factorial, 1u32)
}

pub fn pass_prob_permutation_model(n: u32) -> f64 {
    to_f64(&pass_prob_permutation_model_exact(n))
}

/// Whether `1 − Γ^N ≤ (5/8)^(N−1)`.
pub fn robustness_ok(q: &RobustnessQuery) -> bool {
    1.0 - q.gamma.powi(q.n_pairs as i32) <= pass_prob_paper(q.n_pairs)
}

/// Smallest Γ with `1 − Γ^N ≤ p_threshold`, i.e. `(1 − p_threshold)^(1/N)`.
pub fn min_gamma(n: u32, p_threshold: f64) -> Result<f64, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::NoPairs);
    }
    if !(p_threshold > 0.0 && p_threshold < 1.0) {
        return Err(AnalysisError::InvalidThreshold {
            value: p_threshold,
            range: "(0, 1)",
        });
    }
    Ok((1.0 - p_threshold).powf(1.0 / f64::from(n)))
}

/// Smallest `N` with `(5/8)^(N−1) ≤ bound`, compared exactly.
pub fn min_n_for_pass_bound(bound: f64) -> Result<u32, AnalysisError> {
    if !(bound > 0.0 && bound <= 1.0) {
        return Err(AnalysisError::InvalidThreshold {
            value: bound,
            range: "(0, 1]",
        });
    }
    let exact_bound = BigRational::from_float(bound).expect("finite bound");
    let mut n = 1;
    while pass_prob_paper_exact(n) > exact_bound {
        n += 1;
    }
    Ok(n)
}

/// Smallest `N` whose pass probability is within the pass bound `2ξ`.
pub fn min_n_for_bias(target: &BiasTarget) -> u32 {
    min_n_for_pass_bound(target.pass_bound()).expect("2ξ lies in (0, 1)")
}

/// Probability that an honest noisy session is accepted, with each party's
/// report independently corrupted: `(Γ² + (1−Γ)²/3)^N`.
pub fn honest_accept_prob(gamma: f64, n: u32) -> f64 {
    let per_pair = gamma * gamma + (1.0 - gamma).powi(2) / 3.0;
    per_pair.powi(n as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    /// Average of `4^(m−N)` over all `N!` permutations, counting cycles directly.
    fn brute_force_permutation_model(n: usize) -> BigRational {
        fn cycles(p: &[usize]) -> usize {
            let mut seen = vec![false; p.len()];
            let mut count = 0;
            for s in 0..p.len() {
                if !seen[s] {
                    count += 1;
                    let mut j = s;
                    while !seen[j] {
                        seen[j] = true;
                        j = p[j];
                    }
                }
            }
            count
        }
        fn permute(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if k == p.len() {
                out.push(p.clone());
                return;
            }
            for i in k..p.len() {
                p.swap(k, i);
                permute(k + 1, p, out);
                p.swap(k, i);
            }
        }
        let mut all = Vec::new();
        permute(0, &mut (0..n).collect(), &mut all);
        let count = all.len();
        let sum = all.iter().fold(BigRational::zero(), |acc, p| {
            acc + ratio(1u32, BigUint::from(4u32).pow((n - cycles(p)) as u32))
        });
        sum / ratio(count as u32, 1u32)
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(pass_prob_paper(1), 1.0);
        assert_eq!(pass_prob_paper(2), 0.625);
        assert!((pass_prob_paper(11) - 0.009_094_947_017_729_282).abs() < 1e-15);
        assert!(pass_prob_paper(11) <= 0.01 && pass_prob_paper(10) > 0.01);
        assert!(rel_err(pass_prob_paper(1500), 0.625f64.powi(1499)) < 1e-11);
    }

    #[test]
    fn appendix_sum_examples() {
        assert_eq!(pass_prob_appendix_sum(1), 1.0);
        assert_eq!(pass_prob_appendix_sum_exact(2), ratio(5u32, 8u32));
        assert_eq!(pass_prob_appendix_sum(3), 0.390625);
    }

    #[test]
    fn appendix_sum_matches_closed_form() {
        for n in 1..=64 {
            assert_eq!(pass_prob_appendix_sum_exact(n), pass_prob_paper_exact(n), "N={n}");
            assert!(rel_err(pass_prob_appendix_sum(n), pass_prob_paper(n)) <= 1e-12, "N={n}");
        }
    }

    #[test]
    fn stirling_rows() {
        let as_u64 = |n| -> Vec<u64> {
            stirling_first_kind_row(n).iter().map(|c| c.to_u64().unwrap()).collect()
        };
        assert_eq!(as_u64(0), [1]);
        assert_eq!(as_u64(3), [0, 2, 3, 1]);
        assert_eq!(as_u64(4), [0, 6, 11, 6, 1]);
        for n in 1..=20u32 {
            let sum: BigUint = stirling_first_kind_row(n).iter().sum();
            let fact: BigUint = (1..=n).map(BigUint::from).product();
            assert_eq!(sum, fact);
        }
    }

    #[test]
    fn permutation_model_examples() {
        assert_eq!(pass_prob_permutation_model(1), 1.0);
        assert_eq!(pass_prob_permutation_model(2), 0.625);
        assert_eq!(pass_prob_permutation_model(3), 0.3125);
        assert_eq!(pass_prob_permutation_model_exact(4), ratio(35u32, 256u32));
    }

    #[test]
    fn permutation_model_matches_brute_force() {
        for n in 1..=6 {
            assert_eq!(pass_prob_permutation_model_exact(n as u32), brute_force_permutation_model(n), "N={n}");
        }
    }

    #[test]
    fn permutation_model_closed_form() {
        for n in 1..=64u32 {
            let want = ratio(
                BigUint::from((n + 1) * (n + 2) * (n + 3)),
                BigUint::from(6u32) * BigUint::from(4u32).pow(n),
            );
            assert_eq!(pass_prob_permutation_model_exact(n), want, "N={n}");
        }
    }

    #[test]
    fn monotone_and_ordered() {
        for n in 1..20 {
            assert!(pass_prob_paper(n + 1) < pass_prob_paper(n));
            if n >= 2 {
                assert!(pass_prob_permutation_model(n + 1) < pass_prob_permutation_model(n));
            }
        }
        for n in 1..=20 {
            let perm = pass_prob_permutation_model_exact(n);
            let closed = pass_prob_paper_exact(n);
            if n <= 2 {
                assert_eq!(perm, closed);
            } else {
                assert!(perm < closed, "N={n}");
            }
        }
    }

    #[test]
    fn robustness_examples() {
        for n in [1, 5, 11, 40] {
            assert!(robustness_ok(&RobustnessQuery::new(1.0, n).unwrap()));
        }
        assert!(!robustness_ok(&RobustnessQuery::new(0.99, 11).unwrap()));
        assert!(robustness_ok(&RobustnessQuery::new(0.9992, 11).unwrap()));
        assert!(RobustnessQuery::new(0.0, 3).is_err());
        assert!(RobustnessQuery::new(0.5, 0).is_err());
    }

    #[test]
    fn min_gamma_examples() {
        let g = min_gamma(11, 0.01).unwrap();
        assert!((g - 0.999_086_750_370_734_8).abs() < 1e-12);
        assert!((g - 0.9991).abs() < 5e-5);
        assert!((min_gamma(1, 0.5).unwrap() - 0.5).abs() < 1e-15);
        let g = min_gamma(11, pass_prob_paper(11)).unwrap();
        assert!((g - 0.999_169_748_618_330_2).abs() < 1e-12);
        assert!(min_gamma(0, 0.1).is_err());
        assert!(min_gamma(3, 1.0).is_err());
    }

    #[test]
    fn min_gamma_sits_on_robustness_boundary() {
        for n in 1..=30 {
            let g = min_gamma(n, pass_prob_paper(n).min(0.999)).unwrap();
            let slack = 1.0 - g.powi(n as i32) - pass_prob_paper(n).min(0.999);
            assert!(slack.abs() <= 1e-12, "N={n}: {slack}");
            if n > 1 {
                assert!(robustness_ok(&RobustnessQuery::new((g + 1e-12).min(1.0), n).unwrap()));
            }
        }
    }

    #[test]
    fn min_n_examples() {
        assert_eq!(min_n_for_pass_bound(0.01), Ok(11));
        assert_eq!(min_n_for_pass_bound(1.0), Ok(1));
        assert_eq!(min_n_for_pass_bound(0.625), Ok(2));
        assert_eq!(min_n_for_pass_bound(0.6249), Ok(3));
        assert!(min_n_for_pass_bound(0.0).is_err());
        assert_eq!(min_n_for_bias(&BiasTarget::new(0.005).unwrap()), 11);
        assert!(BiasTarget::new(0.5).is_err());
    }

    #[test]
    fn honest_accept_limits() {
        assert_eq!(honest_accept_prob(1.0, 7), 1.0);
        // Γ = 1/4 makes each report uniform, so two reports agree w.p. 1/4.
        assert!((honest_accept_prob(0.25, 1) - 0.25).abs() < 1e-15);
    }
}
