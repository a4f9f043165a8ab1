//! Optimal-contract solvers.
//!
//! Every solver enforces incentive compatibility: the target action must
//! weakly beat each alternative in expected payment minus cost. On top of
//! that, `min_pay` minimizes expected payment under the target distribution,
//! `min_budget` the maximum payment, and `min_variance` the payment
//! variance. Monotone variants add nondecreasing-payment rows; threshold
//! variants enumerate every cutoff and pay a flat budget above it.
//!
//! Cost-robust solving replaces the known costs with the uniform surrogate
//! `(0, ..., 0, b)`: a contract that incentivizes the target there keeps
//! doing so for every nondecreasing cost vector with spread at most `b`.

use crate::convex::{
    self, ConvexError, Direction, LinearProgram, QuadraticProgram, Sense, SolveStatus,
};
use crate::domain::{
    ConstraintKind, Contract, ContractSetting, Objective, OutcomeDistribution, Robustness,
    SolveRequest, ValidationError, IC_SLACK_TOLERANCE,
};
use crate::statistics::{self, StatError};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ContractError {
    #[error("no contract can incentivize the target action")]
    NotImplementable {
        /// Mixture of alternatives matching the target distribution, when
        /// one certifies the failure.
        certificate: Option<Vec<f64>>,
    },
    #[error("expected {expected} entries, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("cost gap of action {action} ({gap}) is outside [{lower}, {upper}]")]
    BoundsViolated {
        action: usize,
        gap: f64,
        lower: f64,
        upper: f64,
    },
    #[error("bound must be positive (got {bound})")]
    InvalidBound { bound: f64 },
    #[error(transparent)]
    Convex(#[from] ConvexError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

/// The agent's pure best response to a contract.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse {
    /// Chosen action; ties resolve toward the highest index.
    pub action: usize,
    /// Utility of the chosen action.
    pub utility: f64,
    /// Expected payment minus cost for every action.
    pub per_action_utilities: Vec<f64>,
}

/// Budget ratio between the cost-robust and cost-aware min-budget
/// contracts, with the theoretical bound it must respect.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximationReport {
    pub aware_budget: f64,
    pub robust_budget: f64,
    pub ratio: f64,
    /// `upper / lower` over the admissible cost-gap interval.
    pub ratio_bound: f64,
}

/// One cutoff of the threshold enumeration. `min_budget` is the smallest
/// flat payment making the cutoff incentive compatible, absent when the
/// cutoff is infeasible (paying everything from the lowest score never
/// separates the target).
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCandidate {
    /// First outcome index (0-based) that receives the full budget.
    pub cutoff: usize,
    pub min_budget: Option<f64>,
    pub objective_value: Option<f64>,
}

fn check_contract_arity(
    setting: &ContractSetting,
    contract: &Contract,
) -> Result<(), ContractError> {
    if contract.len() != setting.n_outcomes() {
        return Err(ContractError::ArityMismatch {
            expected: setting.n_outcomes(),
            got: contract.len(),
        });
    }
    Ok(())
}

/// Per-action utilities and the agent's best response, breaking ties toward
/// the highest (most capable) action.
pub fn best_response(
    setting: &ContractSetting,
    contract: &Contract,
) -> Result<BestResponse, ContractError> {
    check_contract_arity(setting, contract)?;
    let per_action_utilities: Vec<f64> = setting
        .distributions()
        .iter()
        .zip(setting.costs())
        .map(|(d, c)| contract.expected_pay(d) - c)
        .collect();
    let mut action = 0;
    for (i, &u) in per_action_utilities.iter().enumerate() {
        if u >= per_action_utilities[action] {
            action = i;
        }
    }
    Ok(BestResponse {
        action,
        utility: per_action_utilities[action],
        per_action_utilities,
    })
}

/// Whether the contract incentivizes the target action of `setting`,
/// within the standard slack tolerance.
pub fn verify_ic(setting: &ContractSetting, contract: &Contract) -> Result<bool, ContractError> {
    check_contract_arity(setting, contract)?;
    verify_ic_with_costs(setting.distributions(), setting.costs(), contract)
}

/// Incentive compatibility against an arbitrary cost vector (used for
/// robustness checks, where sampled vectors need not keep the target
/// strictly costliest).
pub fn verify_ic_with_costs(
    distributions: &[OutcomeDistribution],
    costs: &[f64],
    contract: &Contract,
) -> Result<bool, ContractError> {
    if costs.len() != distributions.len() {
        return Err(ContractError::ArityMismatch {
            expected: distributions.len(),
            got: costs.len(),
        });
    }
    let target = distributions.len() - 1;
    let target_utility = contract.expected_pay(&distributions[target]) - costs[target];
    for (d, c) in distributions[..target].iter().zip(costs) {
        if contract.expected_pay(d) - c > target_utility + IC_SLACK_TOLERANCE {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Incentive-compatibility rows `(F_i - F_n) t <= c_i - c_n` over the
/// payment variables, optionally followed by extra zero-padded variables.
fn push_ic_rows(rows: &mut Vec<(Vec<f64>, f64)>, setting: &ContractSetting, extra_vars: usize) {
    let target = setting.target();
    let target_probs = setting.target_distribution().probs();
    let target_cost = setting.target_cost();
    for (i, d) in setting.distributions().iter().enumerate() {
        if i == target {
            continue;
        }
        let mut coeffs: Vec<f64> = d
            .probs()
            .iter()
            .zip(target_probs)
            .map(|(f, t)| f - t)
            .collect();
        coeffs.extend(std::iter::repeat(0.0).take(extra_vars));
        rows.push((coeffs, setting.costs()[i] - target_cost));
    }
}

fn monotone_rows(m: usize, extra_vars: usize) -> Vec<(Vec<f64>, f64)> {
    (0..m - 1)
        .map(|j| {
            let mut coeffs = vec![0.0; m + extra_vars];
            coeffs[j] = 1.0;
            coeffs[j + 1] = -1.0;
            (coeffs, 0.0)
        })
        .collect()
}

/// Fails fast with a dual certificate when some mixture of alternatives
/// reproduces the target distribution exactly.
fn ensure_implementable(setting: &ContractSetting) -> Result<(), ContractError> {
    match statistics::closest_alternative_mixture(setting.distributions(), setting.target()) {
        Ok((weights, tv, _)) => {
            if tv <= statistics::DEGENERATE_SCALE_TOLERANCE {
                Err(ContractError::NotImplementable {
                    certificate: Some(weights),
                })
            } else {
                Ok(())
            }
        }
        Err(StatError::Convex(e)) => Err(ContractError::Convex(e)),
        Err(_) => Ok(()),
    }
}

fn extract_contract(out: convex::SolveOutcome, m: usize) -> Result<Contract, ContractError> {
    match out.status {
        SolveStatus::Optimal => Ok(Contract::from_solver(out.primal[..m].to_vec())?),
        SolveStatus::Infeasible => Err(ContractError::NotImplementable { certificate: None }),
        SolveStatus::Unbounded => Err(ContractError::Convex(ConvexError::NumericalBreakdown {
            iterations: 0,
        })),
    }
}

fn min_pay_lp(setting: &ContractSetting, monotone: bool) -> LinearProgram {
    let m = setting.n_outcomes();
    let mut lp = LinearProgram::new(
        Direction::Minimize,
        setting.target_distribution().probs().to_vec(),
    );
    let mut rows = Vec::new();
    push_ic_rows(&mut rows, setting, 0);
    if monotone {
        rows.extend(monotone_rows(m, 0));
    }
    for (coeffs, rhs) in rows {
        lp.add_leq(coeffs, rhs);
    }
    lp
}

/// Contract minimizing expected payment under the target distribution.
pub fn min_pay_contract(setting: &ContractSetting) -> Result<Contract, ContractError> {
    min_pay_impl(setting, false)
}

fn min_pay_impl(setting: &ContractSetting, monotone: bool) -> Result<Contract, ContractError> {
    ensure_implementable(setting)?;
    let out = convex::solve_lp(&min_pay_lp(setting, monotone))?;
    extract_contract(out, setting.n_outcomes())
}

/// Contract minimizing the budget `max_j t_j`.
pub fn min_budget_contract(setting: &ContractSetting) -> Result<Contract, ContractError> {
    min_budget_impl(setting, false)
}

fn min_budget_impl(setting: &ContractSetting, monotone: bool) -> Result<Contract, ContractError> {
    ensure_implementable(setting)?;
    let m = setting.n_outcomes();
    // Variables: payments, then the budget.
    let mut objective = vec![0.0; m + 1];
    objective[m] = 1.0;
    let mut lp = LinearProgram::new(Direction::Minimize, objective);
    let mut rows = Vec::new();
    push_ic_rows(&mut rows, setting, 1);
    if monotone {
        rows.extend(monotone_rows(m, 1));
    }
    for (coeffs, rhs) in rows {
        lp.add_leq(coeffs, rhs);
    }
    for j in 0..m {
        let mut coeffs = vec![0.0; m + 1];
        coeffs[j] = 1.0;
        coeffs[m] = -1.0;
        lp.add_leq(coeffs, 0.0);
    }
    let out = convex::solve_lp(&lp)?;
    extract_contract(out, m)
}

/// The variance factor `R = diag(sqrt(p)) (I - 1 p')` of the target
/// distribution; the quadratic objective is `R'R`.
fn variance_factor(p: &[f64]) -> Vec<Vec<f64>> {
    let m = p.len();
    (0..m)
        .map(|i| {
            let s = p[i].sqrt();
            (0..m)
                .map(|j| {
                    let id = if i == j { 1.0 } else { 0.0 };
                    s * (id - p[j])
                })
                .collect()
        })
        .collect()
}

/// Contract minimizing payment variance under the target distribution.
/// The variance matrix annihilates constant shifts, so minimizers form a
/// face; ties are broken by minimizing expected pay over that face.
pub fn min_variance_contract(setting: &ContractSetting) -> Result<Contract, ContractError> {
    min_variance_impl(setting, false)
}

fn min_variance_impl(
    setting: &ContractSetting,
    monotone: bool,
) -> Result<Contract, ContractError> {
    ensure_implementable(setting)?;
    let m = setting.n_outcomes();
    let p = setting.target_distribution().probs();
    let factor = variance_factor(p);
    let mut quadratic = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            quadratic[i][j] = (0..m).map(|k| factor[k][i] * factor[k][j]).sum();
        }
    }
    let mut qp = QuadraticProgram::new(quadratic);
    let mut rows = Vec::new();
    push_ic_rows(&mut rows, setting, 0);
    if monotone {
        rows.extend(monotone_rows(m, 0));
    }
    for (coeffs, rhs) in &rows {
        qp.push_row(coeffs.clone(), Sense::Le, *rhs);
    }
    let out = convex::solve_qp(&qp)?;
    let minimizer = match out.status {
        SolveStatus::Optimal => out.primal,
        SolveStatus::Infeasible => {
            return Err(ContractError::NotImplementable { certificate: None })
        }
        SolveStatus::Unbounded => {
            return Err(ContractError::Convex(ConvexError::NumericalBreakdown {
                iterations: 0,
            }))
        }
    };
    // Minimal expected pay over the optimal face {t : R t = R t*}.
    let mut lp = min_pay_lp(setting, monotone);
    for row in &factor {
        let rhs = convex::dot(row, &minimizer);
        lp.add_eq(row.clone(), rhs);
    }
    let out = convex::solve_lp(&lp)?;
    extract_contract(out, m)
}

/// Enumerates every threshold cutoff with its minimal feasible budget and
/// objective value.
pub fn threshold_candidates(
    setting: &ContractSetting,
    objective: Objective,
) -> Result<Vec<ThresholdCandidate>, ContractError> {
    let m = setting.n_outcomes();
    let target = setting.target();
    let target_cost = setting.target_cost();
    let mut candidates = Vec::with_capacity(m);
    for cutoff in 0..m {
        let target_tail = setting.target_distribution().tail_mass(cutoff);
        let mut budget: Option<f64> = Some(0.0);
        for (i, d) in setting.distributions().iter().enumerate() {
            if i == target {
                continue;
            }
            let advantage = target_tail - d.tail_mass(cutoff);
            let needed = target_cost - setting.costs()[i];
            if advantage <= statistics::DEGENERATE_SCALE_TOLERANCE {
                budget = None;
                break;
            }
            let required = needed / advantage;
            budget = budget.map(|b| b.max(required));
        }
        let objective_value = budget.map(|b| match objective {
            Objective::MinBudget => b,
            Objective::MinPay => b * target_tail,
            Objective::MinVariance => b * b * target_tail * (1.0 - target_tail),
        });
        candidates.push(ThresholdCandidate {
            cutoff,
            min_budget: budget,
            objective_value,
        });
    }
    Ok(candidates)
}

fn threshold_contract(
    setting: &ContractSetting,
    objective: Objective,
) -> Result<Contract, ContractError> {
    let candidates = threshold_candidates(setting, objective)?;
    let mut best: Option<&ThresholdCandidate> = None;
    for c in &candidates {
        let Some(value) = c.objective_value else {
            continue;
        };
        if best.map_or(true, |b| value < b.objective_value.unwrap()) {
            best = Some(c);
        }
    }
    let Some(best) = best else {
        return Err(ContractError::NotImplementable { certificate: None });
    };
    let budget = best.min_budget.unwrap();
    let payments = (0..setting.n_outcomes())
        .map(|j| if j >= best.cutoff { budget } else { 0.0 })
        .collect();
    Ok(Contract::new(payments)?)
}

/// Solves the requested objective under a shape constraint.
pub fn constrained_contract(
    setting: &ContractSetting,
    objective: Objective,
    constraint: ConstraintKind,
) -> Result<Contract, ContractError> {
    match constraint {
        ConstraintKind::Unconstrained => match objective {
            Objective::MinPay => min_pay_contract(setting),
            Objective::MinBudget => min_budget_contract(setting),
            Objective::MinVariance => min_variance_contract(setting),
        },
        ConstraintKind::Monotone => match objective {
            Objective::MinPay => min_pay_impl(setting, true),
            Objective::MinBudget => min_budget_impl(setting, true),
            Objective::MinVariance => min_variance_impl(setting, true),
        },
        ConstraintKind::Threshold => {
            ensure_implementable(setting)?;
            threshold_contract(setting, objective)
        }
    }
}

/// Cost-robust contract: optimal for the uniform surrogate costs
/// `(0, ..., 0, bound)` and incentive compatible for every nondecreasing
/// cost vector with spread at most `bound`.
pub fn cost_robust_contract(
    distributions: &[OutcomeDistribution],
    bound: f64,
    objective: Objective,
    constraint: ConstraintKind,
) -> Result<Contract, ContractError> {
    if !(bound > 0.0) {
        return Err(ContractError::InvalidBound { bound });
    }
    let mut costs = vec![0.0; distributions.len()];
    *costs.last_mut().unwrap_or(&mut 0.0) = bound;
    let surrogate = ContractSetting::new(distributions.to_vec(), costs).map_err(|e| match e {
        ValidationError::DuplicateTargetDistribution { row } => {
            let mut weights = vec![0.0; distributions.len().saturating_sub(1)];
            if row < weights.len() {
                weights[row] = 1.0;
            }
            ContractError::NotImplementable {
                certificate: Some(weights),
            }
        }
        other => ContractError::Validation(other),
    })?;
    constrained_contract(&surrogate, objective, constraint)
}

/// Dispatches a full solve request against a setting.
pub fn solve(setting: &ContractSetting, request: &SolveRequest) -> Result<Contract, ContractError> {
    request.validate()?;
    match request.robustness {
        Robustness::CostAware => {
            constrained_contract(setting, request.objective, request.constraint)
        }
        Robustness::CostRobust { bound } => cost_robust_contract(
            setting.distributions(),
            bound,
            request.objective,
            request.constraint,
        ),
    }
}

/// Compares the cost-robust min-budget contract (bound `upper`) against the
/// cost-aware optimum when every cost gap `c_n - c_i` lies in
/// `[lower, upper]`. The ratio never exceeds `upper / lower`.
pub fn approximation_certificate(
    setting: &ContractSetting,
    lower: f64,
    upper: f64,
) -> Result<ApproximationReport, ContractError> {
    if !(lower > 0.0 && lower <= upper) {
        return Err(ContractError::InvalidBound { bound: lower });
    }
    let target_cost = setting.target_cost();
    for (i, &c) in setting.costs()[..setting.target()].iter().enumerate() {
        let gap = target_cost - c;
        if gap < lower - 1e-12 || gap > upper + 1e-12 {
            return Err(ContractError::BoundsViolated {
                action: i,
                gap,
                lower,
                upper,
            });
        }
    }
    let aware_budget = min_budget_contract(setting)?.budget();
    let robust_budget = cost_robust_contract(
        setting.distributions(),
        upper,
        Objective::MinBudget,
        ConstraintKind::Unconstrained,
    )?
    .budget();
    let ratio = robust_budget / aware_budget;
    let ratio_bound = upper / lower;
    debug_assert!(ratio <= ratio_bound + 1e-7);
    Ok(ApproximationReport {
        aware_budget,
        robust_budget,
        ratio,
        ratio_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> ContractSetting {
        ContractSetting::from_rows(vec![vec![0.8, 0.2], vec![0.5, 0.5]], vec![0.0, 1.0]).unwrap()
    }

    fn tightness() -> ContractSetting {
        ContractSetting::from_rows(
            vec![vec![1.0, 0.0], vec![0.4, 0.6], vec![0.0, 1.0]],
            vec![0.0, 1.0, 2.0],
        )
        .unwrap()
    }

    #[test]
    fn best_response_breaks_tie_toward_target() {
        let s = two_by_two();
        let t = Contract::new(vec![0.0, 10.0 / 3.0]).unwrap();
        let br = best_response(&s, &t).unwrap();
        assert_eq!(br.action, 1);
        assert!((br.utility - 2.0 / 3.0).abs() < 1e-12);
        assert!((br.per_action_utilities[0] - br.per_action_utilities[1]).abs() < 1e-12);
    }

    #[test]
    fn zero_contract_opts_out() {
        let s = two_by_two();
        let t = Contract::new(vec![0.0, 0.0]).unwrap();
        let br = best_response(&s, &t).unwrap();
        assert_eq!(br.action, 0);
        assert_eq!(br.utility, 0.0);
    }

    #[test]
    fn constant_contract_picks_cheapest_action() {
        let s = two_by_two();
        let t = Contract::new(vec![5.0, 5.0]).unwrap();
        let br = best_response(&s, &t).unwrap();
        assert_eq!(br.action, 0);
        assert!((br.utility - 5.0).abs() < 1e-12);
    }

    #[test]
    fn verify_ic_matches_best_response_examples() {
        let s = two_by_two();
        let ok = Contract::new(vec![0.0, 10.0 / 3.0]).unwrap();
        assert!(verify_ic(&s, &ok).unwrap());
        let zero = Contract::new(vec![0.0, 0.0]).unwrap();
        assert!(!verify_ic(&s, &zero).unwrap());
        let constant = Contract::new(vec![5.0, 5.0]).unwrap();
        assert!(!verify_ic(&s, &constant).unwrap());
    }

    #[test]
    fn verify_ic_detects_shortfall_below_optimum() {
        let s = two_by_two();
        let short = Contract::new(vec![0.0, 10.0 / 3.0 - 1e-3]).unwrap();
        assert!(!verify_ic(&s, &short).unwrap());
    }

    #[test]
    fn min_pay_two_by_two() {
        let s = two_by_two();
        let t = min_pay_contract(&s).unwrap();
        assert!(t.payments()[0].abs() < 1e-9);
        assert!((t.payments()[1] - 10.0 / 3.0).abs() < 1e-9);
        assert!((t.expected_pay(s.target_distribution()) - 5.0 / 3.0).abs() < 1e-9);
        assert!(verify_ic(&s, &t).unwrap());
    }

    #[test]
    fn min_pay_disjoint_supports() {
        let s = ContractSetting::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 1.0])
            .unwrap();
        let t = min_pay_contract(&s).unwrap();
        assert!(t.payments()[0].abs() < 1e-9);
        assert!((t.payments()[1] - 1.0).abs() < 1e-9);
        assert!((t.expected_pay(s.target_distribution()) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn min_budget_two_by_two() {
        let s = two_by_two();
        let t = min_budget_contract(&s).unwrap();
        assert!((t.budget() - 10.0 / 3.0).abs() < 1e-9);
        assert!(verify_ic(&s, &t).unwrap());
    }

    #[test]
    fn min_budget_tightness_fixture() {
        let s = tightness();
        let t = min_budget_contract(&s).unwrap();
        assert!((t.budget() - 2.5).abs() < 1e-9);
        assert!(t.payments()[0].abs() < 1e-9);
        assert!((t.payments()[1] - 2.5).abs() < 1e-9);
    }

    #[test]
    fn solvers_reject_unimplementable_target() {
        // The target is an even mixture of the two alternatives.
        let s = ContractSetting::from_rows(
            vec![vec![0.8, 0.2], vec![0.2, 0.8], vec![0.5, 0.5]],
            vec![0.0, 0.0, 1.0],
        )
        .unwrap();
        let err = min_budget_contract(&s).unwrap_err();
        match err {
            ContractError::NotImplementable { certificate } => {
                let w = certificate.expect("mixture certificate");
                assert!((w[0] - 0.5).abs() < 1e-9);
                assert!((w[1] - 0.5).abs() < 1e-9);
            }
            other => panic!("expected NotImplementable, got {other:?}"),
        }
    }

    #[test]
    fn min_variance_two_by_two_matches_other_objectives() {
        let s = two_by_two();
        let t = min_variance_contract(&s).unwrap();
        assert!(t.payments()[0].abs() < 1e-8);
        assert!((t.payments()[1] - 10.0 / 3.0).abs() < 1e-8);
        assert!((t.variance(s.target_distribution()) - 25.0 / 9.0).abs() < 1e-7);
        assert!(verify_ic(&s, &t).unwrap());
    }

    #[test]
    fn min_variance_three_outcomes() {
        // Brute-force pinned optimum: t = (0, 25/14, 2.5), variance 25/28.
        let s = ContractSetting::from_rows(
            vec![vec![0.6, 0.3, 0.1], vec![0.2, 0.3, 0.5]],
            vec![0.0, 1.0],
        )
        .unwrap();
        let t = min_variance_contract(&s).unwrap();
        assert!((t.variance(s.target_distribution()) - 25.0 / 28.0).abs() < 1e-7);
        assert!(t.payments()[0].abs() < 1e-7);
        assert!((t.payments()[1] - 25.0 / 14.0).abs() < 1e-7);
        assert!((t.payments()[2] - 2.5).abs() < 1e-7);
        assert!(verify_ic(&s, &t).unwrap());
    }

    #[test]
    fn min_variance_single_support_target() {
        let s =
            ContractSetting::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 1.0])
                .unwrap();
        let t = min_variance_contract(&s).unwrap();
        assert!(t.variance(s.target_distribution()) < 1e-9);
    }

    #[test]
    fn monotone_matches_unconstrained_on_binary() {
        let s = two_by_two();
        let plain = min_budget_contract(&s).unwrap();
        let mono =
            constrained_contract(&s, Objective::MinBudget, ConstraintKind::Monotone).unwrap();
        for (a, b) in plain.payments().iter().zip(mono.payments()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn threshold_on_tightness_fixture() {
        let s = tightness();
        let t =
            constrained_contract(&s, Objective::MinBudget, ConstraintKind::Threshold).unwrap();
        assert_eq!(t.payments()[0], 0.0);
        assert!((t.payments()[1] - 2.5).abs() < 1e-9);
        let scan = threshold_candidates(&s, Objective::MinBudget).unwrap();
        assert!(scan[0].min_budget.is_none());
        assert!(scan[1].min_budget.is_some());
    }

    #[test]
    fn threshold_full_pay_cutoff_reported_infeasible() {
        let s = two_by_two();
        let scan = threshold_candidates(&s, Objective::MinBudget).unwrap();
        assert_eq!(scan[0].cutoff, 0);
        assert!(scan[0].min_budget.is_none());
    }

    #[test]
    fn mlr_uniform_cost_min_budget_is_threshold_shaped() {
        let s = ContractSetting::from_rows(
            vec![
                vec![0.5, 0.3, 0.2],
                vec![0.2, 0.3, 0.5],
                vec![0.1, 0.2, 0.7],
            ],
            vec![0.0, 0.0, 1.0],
        )
        .unwrap();
        let plain = min_budget_contract(&s).unwrap();
        let thresh =
            constrained_contract(&s, Objective::MinBudget, ConstraintKind::Threshold).unwrap();
        for (a, b) in plain.payments().iter().zip(thresh.payments()) {
            assert!((a - b).abs() < 1e-7, "{plain:?} vs {thresh:?}");
        }
        assert!((plain.budget() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn robust_two_by_two_matches_uniform_cost_solution() {
        let s = two_by_two();
        let t = cost_robust_contract(
            s.distributions(),
            1.0,
            Objective::MinBudget,
            ConstraintKind::Unconstrained,
        )
        .unwrap();
        assert!(t.payments()[0].abs() < 1e-9);
        assert!((t.payments()[1] - 10.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn robust_budget_doubles_on_tightness_fixture() {
        let s = tightness();
        let robust = cost_robust_contract(
            s.distributions(),
            2.0,
            Objective::MinBudget,
            ConstraintKind::Unconstrained,
        )
        .unwrap();
        assert!((robust.budget() - 5.0).abs() < 1e-9);
        let report = approximation_certificate(&s, 1.0, 2.0).unwrap();
        assert!((report.ratio - 2.0).abs() < 1e-9);
        assert!((report.ratio_bound - 2.0).abs() < 1e-12);
    }

    #[test]
    fn approximation_ratio_is_one_for_uniform_costs() {
        let s = ContractSetting::from_rows(
            vec![vec![0.8, 0.2], vec![0.6, 0.4], vec![0.5, 0.5]],
            vec![0.0, 0.0, 1.0],
        )
        .unwrap();
        let report = approximation_certificate(&s, 1.0, 1.0).unwrap();
        assert!((report.ratio - 1.0).abs() < 1e-9);
    }

    #[test]
    fn approximation_certificate_rejects_out_of_range_gaps() {
        let s = tightness();
        let err = approximation_certificate(&s, 1.5, 2.0).unwrap_err();
        assert!(matches!(
            err,
            ContractError::BoundsViolated { action: 1, .. }
        ));
    }

    #[test]
    fn robust_contract_survives_cost_extremes() {
        let s = tightness();
        let robust = cost_robust_contract(
            s.distributions(),
            2.0,
            Objective::MinBudget,
            ConstraintKind::Unconstrained,
        )
        .unwrap();
        let n = s.n_actions();
        let mut extreme = vec![0.0; n];
        extreme[n - 1] = 2.0;
        assert!(verify_ic_with_costs(s.distributions(), &extreme, &robust).unwrap());
        let uniform = vec![2.0; n];
        assert!(verify_ic_with_costs(s.distributions(), &uniform, &robust).unwrap());
    }

    #[test]
    fn solve_dispatches_robust_requests() {
        let s = two_by_two();
        let t = solve(
            &s,
            &SolveRequest {
                objective: Objective::MinPay,
                constraint: ConstraintKind::Unconstrained,
                robustness: Robustness::CostRobust { bound: 1.0 },
            },
        )
        .unwrap();
        assert!((t.payments()[1] - 10.0 / 3.0).abs() < 1e-9);
    }
}
