//! Shared domain types: outcome distributions, contract settings, contracts,
//! hypothesis tests, and solve requests.
//!
//! A contract setting is a pair `(F, c)`: an `n x m` matrix of outcome
//! distributions (one row per action) together with nondecreasing action
//! costs. The last action is the target the principal wants to incentivize
//! and must be strictly costlier than every alternative. All types here are
//! immutable values and safe to share across threads.

use thiserror::Error;

/// Row sums farther than this from 1 are rejected outright.
pub const PROB_RENORM_TOLERANCE: f64 = 1e-6;
/// Row sums within this of 1 are left untouched (keeps validation idempotent).
pub const PROB_SUM_TOLERANCE: f64 = 1e-9;
/// Per-entry tolerance for treating two outcome distributions as identical.
pub const DUPLICATE_ROW_TOLERANCE: f64 = 1e-12;
/// Slack tolerance applied to incentive-compatibility comparisons.
pub const IC_SLACK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ValidationError {
    #[error("row {row} is not a probability distribution (sum {sum})")]
    NonStochasticRow { row: usize, sum: f64 },
    #[error("costs must be nondecreasing (violated at index {index})")]
    CostsNotNondecreasing { index: usize },
    #[error("target action must be strictly costlier than every alternative")]
    TargetNotStrictlyCostliest,
    #[error("action {row} has the same outcome distribution as the target but a lower cost; the target is not implementable")]
    DuplicateTargetDistribution { row: usize },
    #[error("need at least {min} {what}, got {got}")]
    TooFew {
        what: &'static str,
        min: usize,
        got: usize,
    },
    #[error("expected {expected} entries, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("payment {index} is negative ({value})")]
    NegativePayment { index: usize, value: f64 },
    #[error("accept probability {index} is outside [0, 1] ({value})")]
    InvalidAcceptProbability { index: usize, value: f64 },
    #[error("cost-robust bound must be positive (got {bound})")]
    NonPositiveBound { bound: f64 },
}

/// A probability distribution over the `m` outcome scores.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    /// Builds a distribution, renormalizing sums that are off by at most
    /// `PROB_RENORM_TOLERANCE`. Negative entries or larger deviations are
    /// rejected.
    pub fn new(probs: Vec<f64>) -> Result<Self, ValidationError> {
        Self::new_row(probs, 0)
    }

    fn new_row(mut probs: Vec<f64>, row: usize) -> Result<Self, ValidationError> {
        if probs.is_empty() {
            return Err(ValidationError::TooFew {
                what: "outcomes",
                min: 1,
                got: 0,
            });
        }
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > PROB_RENORM_TOLERANCE {
            return Err(ValidationError::NonStochasticRow { row, sum });
        }
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            for p in &mut probs {
                *p /= sum;
            }
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Expectation of `values` under this distribution.
    pub fn expectation(&self, values: &[f64]) -> f64 {
        self.probs
            .iter()
            .zip(values)
            .map(|(p, v)| p * v)
            .sum()
    }

    /// Probability mass on outcomes `from..m`.
    pub fn tail_mass(&self, from: usize) -> f64 {
        self.probs[from.min(self.probs.len())..].iter().sum()
    }

    pub(crate) fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.probs.len() == other.probs.len()
            && self
                .probs
                .iter()
                .zip(&other.probs)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// A full contract design setting `(F, c)` with the target fixed to the
/// last (costliest) action.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractSetting {
    distributions: Vec<OutcomeDistribution>,
    costs: Vec<f64>,
    target: usize,
}

impl ContractSetting {
    /// Validates and builds a setting from raw probability rows.
    pub fn from_rows(rows: Vec<Vec<f64>>, costs: Vec<f64>) -> Result<Self, ValidationError> {
        let distributions = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| OutcomeDistribution::new_row(r, i))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(distributions, costs)
    }

    /// Validates and builds a setting from already-constructed rows.
    pub fn new(
        distributions: Vec<OutcomeDistribution>,
        costs: Vec<f64>,
    ) -> Result<Self, ValidationError> {
        let target = distributions.len().saturating_sub(1);
        let setting = Self {
            distributions,
            costs,
            target,
        };
        validate_setting(setting)
    }

    pub fn n_actions(&self) -> usize {
        self.distributions.len()
    }

    pub fn n_outcomes(&self) -> usize {
        self.distributions[0].len()
    }

    pub fn distributions(&self) -> &[OutcomeDistribution] {
        &self.distributions
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    /// Index of the target action (always the last one).
    pub fn target(&self) -> usize {
        self.target
    }

    pub fn target_distribution(&self) -> &OutcomeDistribution {
        &self.distributions[self.target]
    }

    pub fn target_cost(&self) -> f64 {
        self.costs[self.target]
    }

    /// Spread `c_n - c_1` between the costliest and cheapest action.
    pub fn cost_spread(&self) -> f64 {
        self.costs[self.target] - self.costs[0]
    }
}

/// Checks every setting invariant, renormalizing rows where permitted.
///
/// Idempotent: a setting that already validated passes through unchanged.
pub fn validate_setting(setting: ContractSetting) -> Result<ContractSetting, ValidationError> {
    let ContractSetting {
        distributions,
        costs,
        ..
    } = setting;
    let n = distributions.len();
    if n < 2 {
        return Err(ValidationError::TooFew {
            what: "actions",
            min: 2,
            got: n,
        });
    }
    let m = distributions[0].len();
    if m < 2 {
        return Err(ValidationError::TooFew {
            what: "outcomes",
            min: 2,
            got: m,
        });
    }
    for d in &distributions {
        if d.len() != m {
            return Err(ValidationError::ArityMismatch {
                expected: m,
                got: d.len(),
            });
        }
    }
    if costs.len() != n {
        return Err(ValidationError::ArityMismatch {
            expected: n,
            got: costs.len(),
        });
    }
    // Re-run row validation so raw or hand-edited settings renormalize.
    let distributions = distributions
        .into_iter()
        .enumerate()
        .map(|(i, d)| OutcomeDistribution::new_row(d.probs, i))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, w) in costs.windows(2).enumerate() {
        if w[0].is_nan() || w[1].is_nan() || w[0] > w[1] {
            return Err(ValidationError::CostsNotNondecreasing { index: i + 1 });
        }
    }
    if costs.iter().any(|&c| c < 0.0) {
        return Err(ValidationError::CostsNotNondecreasing { index: 0 });
    }
    let target = n - 1;
    if !(costs[target] > costs[target - 1]) {
        return Err(ValidationError::TargetNotStrictlyCostliest);
    }
    for (i, d) in distributions[..target].iter().enumerate() {
        if d.approx_eq(&distributions[target], DUPLICATE_ROW_TOLERANCE) {
            return Err(ValidationError::DuplicateTargetDistribution { row: i });
        }
    }
    Ok(ContractSetting {
        distributions,
        costs,
        target,
    })
}

/// A payment vector over outcomes. Payments are nonnegative (limited
/// liability).
#[derive(Debug, Clone, PartialEq)]
pub struct Contract {
    payments: Vec<f64>,
}

impl Contract {
    pub fn new(payments: Vec<f64>) -> Result<Self, ValidationError> {
        for (index, &value) in payments.iter().enumerate() {
            if !(value >= 0.0) {
                return Err(ValidationError::NegativePayment { index, value });
            }
        }
        Ok(Self { payments })
    }

    /// Builds a contract from solver output, zeroing negative dust within
    /// `IC_SLACK_TOLERANCE`.
    pub(crate) fn from_solver(mut payments: Vec<f64>) -> Result<Self, ValidationError> {
        for p in &mut payments {
            if *p < 0.0 && *p >= -IC_SLACK_TOLERANCE {
                *p = 0.0;
            }
        }
        Self::new(payments)
    }

    pub fn payments(&self) -> &[f64] {
        &self.payments
    }

    pub fn len(&self) -> usize {
        self.payments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payments.is_empty()
    }

    /// The budget `max_j t_j`.
    pub fn budget(&self) -> f64 {
        self.payments.iter().copied().fold(0.0, f64::max)
    }

    /// Expected payment under `dist`.
    pub fn expected_pay(&self, dist: &OutcomeDistribution) -> f64 {
        dist.expectation(&self.payments)
    }

    /// Payment variance under `dist`.
    pub fn variance(&self, dist: &OutcomeDistribution) -> f64 {
        let mean = self.expected_pay(dist);
        dist.probs()
            .iter()
            .zip(&self.payments)
            .map(|(p, t)| p * (t - mean) * (t - mean))
            .sum()
    }

    /// Payment standard deviation under `dist`.
    pub fn stdev(&self, dist: &OutcomeDistribution) -> f64 {
        self.variance(dist).sqrt()
    }
}

/// A (possibly randomized) composite hypothesis test: per-outcome accept
/// probabilities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisTest {
    accept_probs: Vec<f64>,
}

impl HypothesisTest {
    pub fn new(mut accept_probs: Vec<f64>) -> Result<Self, ValidationError> {
        for (index, p) in accept_probs.iter_mut().enumerate() {
            if *p < 0.0 || *p > 1.0 {
                // Snap solver dust; reject anything materially outside.
                if *p >= -IC_SLACK_TOLERANCE && *p <= 1.0 + IC_SLACK_TOLERANCE {
                    *p = p.clamp(0.0, 1.0);
                } else {
                    return Err(ValidationError::InvalidAcceptProbability {
                        index,
                        value: *p,
                    });
                }
            }
        }
        Ok(Self { accept_probs })
    }

    pub fn accept_probs(&self) -> &[f64] {
        &self.accept_probs
    }

    pub fn len(&self) -> usize {
        self.accept_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accept_probs.is_empty()
    }
}

/// Error rates of a hypothesis test against a setting's alternatives.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskReport {
    /// False-positive rate against each alternative, in action order.
    pub fp_per_alternative: Vec<f64>,
    /// False-negative rate against the target distribution.
    pub fn_rate: f64,
    /// True-positive rate, `1 - fn_rate`.
    pub tp_rate: f64,
    /// Worst-case sum risk `max_k (FP_k + FN)`.
    pub sum_risk: f64,
    /// Worst-case ratio risk `max_k FP_k / TP`; infinite when `TP = 0`.
    pub ratio_risk: f64,
}

impl RiskReport {
    /// Worst-case false-positive rate across alternatives.
    pub fn worst_fp(&self) -> f64 {
        self.fp_per_alternative.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    MinPay,
    MinBudget,
    MinVariance,
}

impl Objective {
    pub fn label(self) -> &'static str {
        match self {
            Objective::MinPay => "min-pay",
            Objective::MinBudget => "min-budget",
            Objective::MinVariance => "min-variance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    Unconstrained,
    Monotone,
    Threshold,
}

impl ConstraintKind {
    pub fn label(self) -> &'static str {
        match self {
            ConstraintKind::Unconstrained => "none",
            ConstraintKind::Monotone => "monotone",
            ConstraintKind::Threshold => "threshold",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Robustness {
    /// Solve against the setting's known costs.
    CostAware,
    /// Guarantee incentive compatibility for every nondecreasing cost vector
    /// with spread at most `bound`.
    CostRobust { bound: f64 },
}

impl Robustness {
    pub fn label(self) -> &'static str {
        match self {
            Robustness::CostAware => "cost-aware",
            Robustness::CostRobust { .. } => "cost-robust",
        }
    }
}

/// Selector for one solver invocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveRequest {
    pub objective: Objective,
    pub constraint: ConstraintKind,
    pub robustness: Robustness,
}

impl SolveRequest {
    pub fn validate(&self) -> Result<(), ValidationError> {
        if let Robustness::CostRobust { bound } = self.robustness {
            if !(bound > 0.0) {
                return Err(ValidationError::NonPositiveBound { bound });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(setting: &ContractSetting) -> Vec<u64> {
        setting
            .distributions()
            .iter()
            .flat_map(|d| d.probs().iter().map(|p| p.to_bits()))
            .collect()
    }

    #[test]
    fn accepts_well_formed_setting() {
        let s = ContractSetting::from_rows(
            vec![vec![0.8, 0.2], vec![0.5, 0.5]],
            vec![0.0, 1.0],
        )
        .unwrap();
        assert_eq!(s.n_actions(), 2);
        assert_eq!(s.n_outcomes(), 2);
        assert_eq!(s.target(), 1);
    }

    #[test]
    fn rejects_non_stochastic_row() {
        let err = ContractSetting::from_rows(
            vec![vec![0.8, 0.3], vec![0.5, 0.5]],
            vec![0.0, 1.0],
        )
        .unwrap_err();
        assert!(matches!(err, ValidationError::NonStochasticRow { row: 0, .. }));
    }

    #[test]
    fn rejects_duplicate_target_distribution() {
        let err = ContractSetting::from_rows(
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            vec![0.0, 1.0],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            ValidationError::DuplicateTargetDistribution { row: 0 }
        ));
    }

    #[test]
    fn rejects_decreasing_costs() {
        let err = ContractSetting::from_rows(
            vec![vec![0.8, 0.2], vec![0.5, 0.5]],
            vec![1.0, 0.0],
        )
        .unwrap_err();
        assert!(matches!(err, ValidationError::CostsNotNondecreasing { .. }));
    }

    #[test]
    fn rejects_tied_target_cost() {
        let err = ContractSetting::from_rows(
            vec![vec![0.8, 0.2], vec![0.5, 0.5]],
            vec![1.0, 1.0],
        )
        .unwrap_err();
        assert_eq!(err, ValidationError::TargetNotStrictlyCostliest);
    }

    #[test]
    fn renormalizes_slightly_off_rows() {
        let s = ContractSetting::from_rows(
            vec![vec![0.8, 0.2 + 5e-7], vec![0.5, 0.5]],
            vec![0.0, 1.0],
        )
        .unwrap();
        let sum: f64 = s.distributions()[0].probs().iter().sum();
        assert!((sum - 1.0).abs() <= PROB_SUM_TOLERANCE);
    }

    #[test]
    fn validation_is_idempotent() {
        let s = ContractSetting::from_rows(
            vec![vec![0.8, 0.2 + 5e-7], vec![0.5, 0.5 - 3e-8]],
            vec![0.0, 1.0],
        )
        .unwrap();
        let before = bits(&s);
        let again = validate_setting(s).unwrap();
        assert_eq!(before, bits(&again));
    }

    #[test]
    fn budget_is_exact_max() {
        let t = Contract::new(vec![0.25, 4.0, 1.5]).unwrap();
        assert_eq!(t.budget(), 4.0);
    }

    #[test]
    fn expected_pay_matches_dot_product() {
        let t = Contract::new(vec![0.0, 10.0 / 3.0]).unwrap();
        let d = OutcomeDistribution::new(vec![0.5, 0.5]).unwrap();
        assert!((t.expected_pay(&d) - 5.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn contract_rejects_negative_payment() {
        assert!(matches!(
            Contract::new(vec![1.0, -0.5]),
            Err(ValidationError::NegativePayment { index: 1, .. })
        ));
    }

    #[test]
    fn hypothesis_test_bounds_checked() {
        assert!(HypothesisTest::new(vec![0.0, 0.5, 1.0]).is_ok());
        assert!(HypothesisTest::new(vec![0.0, 1.5]).is_err());
        // Solver dust inside the tolerance is snapped.
        let t = HypothesisTest::new(vec![-1e-12, 1.0 + 1e-12]).unwrap();
        assert_eq!(t.accept_probs(), &[0.0, 1.0]);
    }

    #[test]
    fn solve_request_requires_positive_bound() {
        let req = SolveRequest {
            objective: Objective::MinBudget,
            constraint: ConstraintKind::Unconstrained,
            robustness: Robustness::CostRobust { bound: 0.0 },
        };
        assert!(req.validate().is_err());
    }
}
