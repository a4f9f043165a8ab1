//! Pay-for-performance contract design for delegated text generation.
//!
//! A principal delegates generation to an agent who privately picks one of
//! `n` generators, each with an outcome-score distribution and an inference
//! cost. This crate computes payment schemes over the `m` outcome scores
//! that make the costliest, most capable generator the agent's best
//! response:
//!
//! - [`contracts`] solves min-pay, min-budget, and min-variance contracts,
//!   optionally under monotonicity or threshold constraints, both cost-aware
//!   and cost-robust (incentive compatible for every nondecreasing cost
//!   vector with bounded spread).
//! - [`statistics`] computes minimax composite hypothesis tests, converts
//!   between tests and contracts, and certifies robust budgets through
//!   total-variation duality.
//! - [`convex`] is the self-contained dense LP/QP engine behind both.
//! - [`oracle`] holds deliberately simple brute-force verifiers.
//! - [`ingest`] loads benchmark score histograms and energy-based cost
//!   estimates from instance files.
//! - [`cli`] implements the `p4p` command-line tool.

pub mod cli;
pub mod contracts;
pub mod convex;
pub mod domain;
pub mod ingest;
pub mod oracle;
pub mod statistics;

pub use domain::{
    Contract, ContractSetting, ConstraintKind, HypothesisTest, Objective, OutcomeDistribution,
    RiskReport, Robustness, SolveRequest, ValidationError,
};
