//! Composite hypothesis testing and its correspondence with contracts.
//!
//! The target distribution plays the alternative hypothesis against the
//! composite null formed by the remaining actions. Minimax tests minimize
//! the worst-case sum risk `FP + FN` or ratio risk `FP / TP`; scaling an
//! optimal test by a risk-dependent budget factor turns it into an optimal
//! cost-robust contract, and normalizing a contract by its budget recovers
//! a test. The least favorable mixture of alternatives certifies robust
//! budgets through total-variation duality.

use crate::contracts::{self, ContractError};
use crate::convex::{self, ConvexError, Direction, LinearProgram, SolveStatus};
use crate::domain::{
    Contract, ContractSetting, HypothesisTest, OutcomeDistribution, RiskReport,
    DUPLICATE_ROW_TOLERANCE,
};
use thiserror::Error;

/// Risks at or above `1 - NOT_SEPARABLE_TOLERANCE` mean the target cannot
/// be distinguished from the alternatives.
pub const NOT_SEPARABLE_TOLERANCE: f64 = 1e-9;
/// Scale denominators at or below this are degenerate.
pub const DEGENERATE_SCALE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StatError {
    #[error("target distribution is not separable from the alternatives")]
    NotSeparable,
    #[error("expected {expected} entries, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("target index {target} out of range for {n_actions} actions")]
    InvalidTarget { target: usize, n_actions: usize },
    #[error("scaling denominator {denominator} is degenerate")]
    DegenerateScale { denominator: f64 },
    #[error("contract has no positive payment")]
    ZeroContract,
    #[error("bound must be positive (got {bound})")]
    InvalidBound { bound: f64 },
    #[error(transparent)]
    Convex(#[from] ConvexError),
}

/// Which minimax risk a statistical contract is scaled by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiskKind {
    Sum,
    Ratio,
}

/// The mixture of alternatives closest to the target in total variation,
/// with the dual slacks and the budget it implies for a given cost bound.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastFavorableMix {
    /// Mixture weights over the alternatives, in action order.
    pub weights: Vec<f64>,
    /// Per-outcome dual slacks (the positive part of the mass difference).
    pub slacks: Vec<f64>,
    /// `bound / TV(target, mixture)`.
    pub implied_budget: f64,
}

fn check_target(distributions: &[OutcomeDistribution], target: usize) -> Result<(), StatError> {
    if target >= distributions.len() || distributions.len() < 2 {
        return Err(StatError::InvalidTarget {
            target,
            n_actions: distributions.len(),
        });
    }
    let m = distributions[0].len();
    for d in distributions {
        if d.len() != m {
            return Err(StatError::ArityMismatch {
                expected: m,
                got: d.len(),
            });
        }
    }
    Ok(())
}

/// Error rates of `psi` with the target as the alternative hypothesis and
/// every other action as a simple null.
pub fn risk_report(
    distributions: &[OutcomeDistribution],
    target: usize,
    psi: &HypothesisTest,
) -> Result<RiskReport, StatError> {
    check_target(distributions, target)?;
    let m = distributions[0].len();
    if psi.len() != m {
        return Err(StatError::ArityMismatch {
            expected: m,
            got: psi.len(),
        });
    }
    let accept = psi.accept_probs();
    let tp_rate: f64 = distributions[target].expectation(accept);
    let fn_rate = 1.0 - tp_rate;
    let fp_per_alternative: Vec<f64> = distributions
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != target)
        .map(|(_, d)| d.expectation(accept))
        .collect();
    let worst_fp = fp_per_alternative.iter().copied().fold(0.0, f64::max);
    let sum_risk = worst_fp + fn_rate;
    let ratio_risk = if tp_rate <= DEGENERATE_SCALE_TOLERANCE {
        f64::INFINITY
    } else {
        worst_fp / tp_rate
    };
    Ok(RiskReport {
        fp_per_alternative,
        fn_rate,
        tp_rate,
        sum_risk,
        ratio_risk,
    })
}

/// Minimax test for the worst-case sum risk `max_k (FP_k + FN)`, with its
/// optimal risk.
pub fn minimax_sum_test(
    distributions: &[OutcomeDistribution],
    target: usize,
) -> Result<(HypothesisTest, f64), StatError> {
    check_target(distributions, target)?;
    let m = distributions[0].len();
    // Variables: accept probabilities, then the worst-case risk r.
    let mut objective = vec![0.0; m + 1];
    objective[m] = 1.0;
    let mut lp = LinearProgram::new(Direction::Minimize, objective);
    for j in 0..m {
        lp.set_bounds(j, 0.0, 1.0);
    }
    let target_probs = distributions[target].probs();
    for (i, d) in distributions.iter().enumerate() {
        if i == target {
            continue;
        }
        // FP_i + FN <= r, written with the constant folded to the right.
        let mut coeffs: Vec<f64> = d
            .probs()
            .iter()
            .zip(target_probs)
            .map(|(f, t)| f - t)
            .collect();
        coeffs.push(-1.0);
        lp.add_leq(coeffs, -1.0);
    }
    let out = convex::solve_lp(&lp)?;
    debug_assert_eq!(out.status, SolveStatus::Optimal);
    let risk = out.objective_value;
    if risk >= 1.0 - NOT_SEPARABLE_TOLERANCE {
        return Err(StatError::NotSeparable);
    }
    let psi =
        HypothesisTest::new(out.primal[..m].to_vec()).expect("solver respects [0, 1] bounds");
    Ok((psi, risk))
}

/// Minimax test for the worst-case ratio risk `max_k FP_k / TP`, with its
/// optimal risk. Computed by normalizing the min-pay contract of the
/// unit-spread uniform-cost surrogate.
pub fn minimax_ratio_test(
    distributions: &[OutcomeDistribution],
    target: usize,
) -> Result<(HypothesisTest, f64), StatError> {
    check_target(distributions, target)?;
    let mut ordered: Vec<OutcomeDistribution> = distributions
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != target)
        .map(|(_, d)| d.clone())
        .collect();
    ordered.push(distributions[target].clone());
    let mut costs = vec![0.0; ordered.len()];
    *costs.last_mut().unwrap() = 1.0;
    let surrogate =
        ContractSetting::new(ordered, costs).map_err(|_| StatError::NotSeparable)?;
    let contract = match contracts::min_pay_contract(&surrogate) {
        Ok(c) => c,
        Err(ContractError::NotImplementable { .. }) => return Err(StatError::NotSeparable),
        Err(ContractError::Convex(e)) => return Err(StatError::Convex(e)),
        Err(_) => return Err(StatError::NotSeparable),
    };
    let psi = contract_to_test(&contract)?;
    let report = risk_report(distributions, target, &psi)?;
    Ok((psi, report.ratio_risk))
}

/// Scales a test into a contract: `b / (1 - R)` for the sum risk, or
/// `b / (TP - FP)` for the ratio risk.
pub fn test_to_contract(
    distributions: &[OutcomeDistribution],
    target: usize,
    psi: &HypothesisTest,
    kind: RiskKind,
    bound: f64,
) -> Result<Contract, StatError> {
    if !(bound > 0.0) {
        return Err(StatError::InvalidBound { bound });
    }
    let report = risk_report(distributions, target, psi)?;
    let denominator = match kind {
        RiskKind::Sum => 1.0 - report.sum_risk,
        RiskKind::Ratio => report.tp_rate - report.worst_fp(),
    };
    if denominator <= DEGENERATE_SCALE_TOLERANCE {
        return Err(StatError::DegenerateScale { denominator });
    }
    let scale = bound / denominator;
    let payments = psi.accept_probs().iter().map(|p| scale * p).collect();
    Ok(Contract::new(payments).expect("nonnegative scaling of accept probabilities"))
}

/// Normalizes a contract by its budget into a test.
pub fn contract_to_test(contract: &Contract) -> Result<HypothesisTest, StatError> {
    let budget = contract.budget();
    if budget <= 0.0 {
        return Err(StatError::ZeroContract);
    }
    let probs = contract.payments().iter().map(|t| t / budget).collect();
    Ok(HypothesisTest::new(probs).expect("normalized payments lie in [0, 1]"))
}

/// Total variation distance between two distributions on the same outcomes.
pub fn tv_distance(p: &OutcomeDistribution, q: &OutcomeDistribution) -> Result<f64, StatError> {
    if p.len() != q.len() {
        return Err(StatError::ArityMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    Ok(p.probs()
        .iter()
        .zip(q.probs())
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / 2.0)
}

/// The mixture of alternatives minimizing total variation to the target,
/// as `(weights, tv, slacks)`. A zero distance certifies that the target is
/// not implementable.
pub fn closest_alternative_mixture(
    distributions: &[OutcomeDistribution],
    target: usize,
) -> Result<(Vec<f64>, f64, Vec<f64>), StatError> {
    check_target(distributions, target)?;
    let m = distributions[0].len();
    let alternatives: Vec<&OutcomeDistribution> = distributions
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != target)
        .map(|(_, d)| d)
        .collect();
    let k = alternatives.len();
    // Variables: mixture weights, then per-outcome slacks. The slacks absorb
    // the positive part of (target - mixture), so minimizing their sum
    // minimizes the total variation distance.
    let mut objective = vec![0.0; k + m];
    for coeff in objective[k..].iter_mut() {
        *coeff = 1.0;
    }
    let mut lp = LinearProgram::new(Direction::Minimize, objective);
    let target_probs = distributions[target].probs();
    for j in 0..m {
        let mut coeffs = vec![0.0; k + m];
        for (i, d) in alternatives.iter().enumerate() {
            coeffs[i] = d.probs()[j];
        }
        coeffs[k + j] = 1.0;
        lp.add_geq(coeffs, target_probs[j]);
    }
    let mut simplex_row = vec![0.0; k + m];
    for coeff in simplex_row[..k].iter_mut() {
        *coeff = 1.0;
    }
    lp.add_eq(simplex_row, 1.0);
    let out = convex::solve_lp(&lp)?;
    debug_assert_eq!(out.status, SolveStatus::Optimal);
    let mut weights = out.primal[..k].to_vec();
    let slacks = out.primal[k..].to_vec();
    // Identical alternatives are interchangeable; favor the lowest index.
    for hi in (1..k).rev() {
        if weights[hi] == 0.0 {
            continue;
        }
        for lo in 0..hi {
            if alternatives[lo].approx_eq(alternatives[hi], DUPLICATE_ROW_TOLERANCE) {
                weights[lo] += weights[hi];
                weights[hi] = 0.0;
                break;
            }
        }
    }
    Ok((weights, out.objective_value, slacks))
}

/// Least favorable mixture and the robust budget it implies for `bound`.
pub fn least_favorable_mix(
    distributions: &[OutcomeDistribution],
    target: usize,
    bound: f64,
) -> Result<LeastFavorableMix, StatError> {
    if !(bound > 0.0) {
        return Err(StatError::InvalidBound { bound });
    }
    let (weights, tv, slacks) = closest_alternative_mixture(distributions, target)?;
    if tv <= DEGENERATE_SCALE_TOLERANCE {
        return Err(StatError::NotSeparable);
    }
    Ok(LeastFavorableMix {
        weights,
        slacks,
        implied_budget: bound / tv,
    })
}

/// True when every pair of rows has nondecreasing likelihood ratios over
/// the outcomes. Ratios `0/0` carry the previous value forward; an infinite
/// ratio (`x/0`) may only open a terminal segment.
pub fn check_mlr(distributions: &[OutcomeDistribution]) -> bool {
    let n = distributions.len();
    let m = distributions.first().map_or(0, OutcomeDistribution::len);
    if distributions.iter().any(|d| d.len() != m) {
        return false;
    }
    for lo in 0..n {
        for hi in (lo + 1)..n {
            let denom = distributions[lo].probs();
            let numer = distributions[hi].probs();
            let mut prev: Option<f64> = None;
            let mut infinite_tail = false;
            for j in 0..m {
                if denom[j] > 0.0 {
                    if infinite_tail {
                        return false;
                    }
                    let ratio = numer[j] / denom[j];
                    if let Some(p) = prev {
                        if ratio < p - 1e-9 * (1.0 + p) {
                            return false;
                        }
                    }
                    prev = Some(ratio);
                } else if numer[j] > 0.0 {
                    infinite_tail = true;
                }
            }
        }
    }
    true
}
