//! Dense linear and convex quadratic programming.
//!
//! Solves problems of the form
//!
//! ```text
//!     min/max  c' x            (LP)
//!     min      x' V x + c' x   (QP, V positive semidefinite)
//!     s.t.     a_i' x  <= / >= / =  b_i
//!              l <= x <= u     (defaults: 0 <= x < inf)
//! ```
//!
//! The LP path is a two-phase dense simplex with Bland's anti-cycling rule,
//! so identical inputs produce bit-identical outputs. The QP path is a
//! primal active-set method that solves equality-constrained KKT systems by
//! a null-space reduction; semidefinite objectives (nontrivial kernels) are
//! handled exactly. Both report dual multipliers; optimal LP outcomes carry
//! a certified duality gap and QP outcomes a checkable KKT residual.
//!
//! Everything is dense. Problem sizes in this crate stay in the dozens, so
//! no sparse machinery is warranted.

mod linalg;
mod qp;
mod simplex;

pub(crate) use linalg::{dot, jacobi_eigen, mat_t_vec, mat_vec, null_basis, solve_consistent};
pub use qp::solve_qp;
pub use simplex::solve_lp;

use thiserror::Error;

/// Maximum primal feasibility violation for an `Optimal` outcome.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-8;
/// Maximum duality gap / KKT residual for an `Optimal` outcome.
pub const OPTIMALITY_TOLERANCE: f64 = 1e-7;
/// Entries smaller than this are treated as zero during pivoting.
pub(crate) const PIVOT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ConvexError {
    #[error("pivoting failed to terminate within {iterations} iterations")]
    NumericalBreakdown { iterations: usize },
    #[error("quadratic matrix is not positive semidefinite (min eigenvalue {min_eigenvalue})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("quadratic matrix is not symmetric (max asymmetry {max_delta})")]
    AsymmetricQuadratic { max_delta: f64 },
    #[error("constraint row {row} has {got} coefficients, expected {expected}")]
    RowArity {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("variable {var} has empty bound interval [{lower}, {upper}]")]
    BadBounds { var: usize, lower: f64, upper: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

/// Per-variable bounds; default `[0, +inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            lower: 0.0,
            upper: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub direction: Direction,
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    pub bounds: Vec<Bounds>,
}

impl LinearProgram {
    pub fn new(direction: Direction, objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            direction,
            objective,
            rows: Vec::new(),
            bounds: vec![Bounds::default(); n],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn push_row(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) {
        self.rows.push(Row { coeffs, sense, rhs });
    }

    pub fn add_leq(&mut self, coeffs: Vec<f64>, rhs: f64) {
        self.push_row(coeffs, Sense::Le, rhs);
    }

    pub fn add_geq(&mut self, coeffs: Vec<f64>, rhs: f64) {
        self.push_row(coeffs, Sense::Ge, rhs);
    }

    pub fn add_eq(&mut self, coeffs: Vec<f64>, rhs: f64) {
        self.push_row(coeffs, Sense::Eq, rhs);
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.bounds[var] = Bounds { lower, upper };
    }

    pub(crate) fn check_shape(&self) -> Result<(), ConvexError> {
        let n = self.n_vars();
        for (row, r) in self.rows.iter().enumerate() {
            if r.coeffs.len() != n {
                return Err(ConvexError::RowArity {
                    row,
                    expected: n,
                    got: r.coeffs.len(),
                });
            }
        }
        for (var, b) in self.bounds.iter().enumerate() {
            if !(b.lower <= b.upper) {
                return Err(ConvexError::BadBounds {
                    var,
                    lower: b.lower,
                    upper: b.upper,
                });
            }
        }
        Ok(())
    }
}

/// Convex quadratic program: minimize `x' V x + c' x` over the same
/// polyhedron shape as [`LinearProgram`]. `V` must be symmetric positive
/// semidefinite (within an eigenvalue floor of `-1e-9`).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProgram {
    pub quadratic: Vec<Vec<f64>>,
    pub linear: Vec<f64>,
    pub rows: Vec<Row>,
    pub bounds: Vec<Bounds>,
}

impl QuadraticProgram {
    pub fn new(quadratic: Vec<Vec<f64>>) -> Self {
        let n = quadratic.len();
        QuadraticProgram {
            quadratic,
            linear: vec![0.0; n],
            rows: Vec::new(),
            bounds: vec![Bounds::default(); n],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.quadratic.len()
    }

    pub fn push_row(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) {
        self.rows.push(Row { coeffs, sense, rhs });
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        let vx = mat_vec(&self.quadratic, x);
        dot(x, &vx) + dot(&self.linear, x)
    }

    pub fn gradient_at(&self, x: &[f64]) -> Vec<f64> {
        let mut g = mat_vec(&self.quadratic, x);
        for (gi, (row_i, ci)) in g
            .iter_mut()
            .zip(mat_t_vec(&self.quadratic, x).into_iter().zip(&self.linear))
        {
            // 2Vx for symmetric V, written as Vx + V'x to stay exact under
            // slight asymmetry in the input.
            *gi += row_i;
            *gi += ci;
        }
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of an LP or QP solve.
///
/// For `Optimal`, `primal` and `dual` hold the solution and one multiplier
/// per constraint row (sign conventions: for minimization, duals of `>=`
/// rows are nonnegative and duals of `<=` rows nonpositive; mirrored for
/// maximization). `reduced_costs` holds per-variable reduced costs against
/// the constraint rows; bound multipliers are implied by their signs.
///
/// For `Infeasible`, `certificate` is a Farkas-style dual ray over the rows;
/// for `Unbounded`, a primal ray that improves the objective.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub objective_value: f64,
    pub certificate: Option<Vec<f64>>,
}

impl SolveOutcome {
    pub(crate) fn non_optimal(status: SolveStatus, certificate: Option<Vec<f64>>) -> Self {
        SolveOutcome {
            status,
            primal: Vec::new(),
            dual: Vec::new(),
            reduced_costs: Vec::new(),
            objective_value: f64::NAN,
            certificate,
        }
    }
}

/// Residuals certifying an `Optimal` outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub complementarity: f64,
    pub gap: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.complementarity).max(self.gap)
    }
}

fn row_activity(rows: &[Row], x: &[f64]) -> Vec<f64> {
    rows.iter().map(|r| dot(&r.coeffs, x)).collect()
}

fn primal_residual(rows: &[Row], bounds: &[Bounds], x: &[f64]) -> f64 {
    let mut res = 0.0_f64;
    for (r, act) in rows.iter().zip(row_activity(rows, x)) {
        let scale = 1.0 + r.rhs.abs();
        let v = match r.sense {
            Sense::Le => (act - r.rhs) / scale,
            Sense::Ge => (r.rhs - act) / scale,
            Sense::Eq => (act - r.rhs).abs() / scale,
        };
        res = res.max(v);
    }
    for (b, &xj) in bounds.iter().zip(x) {
        if b.lower.is_finite() {
            res = res.max(b.lower - xj);
        }
        if b.upper.is_finite() {
            res = res.max(xj - b.upper);
        }
    }
    res.max(0.0)
}

/// Dual objective value implied by an optimal outcome, including bound
/// contributions carried by the reduced costs.
pub fn dual_objective(lp: &LinearProgram, outcome: &SolveOutcome) -> f64 {
    let mut value: f64 = lp
        .rows
        .iter()
        .zip(&outcome.dual)
        .map(|(r, y)| r.rhs * y)
        .sum();
    for ((b, &r), &_x) in lp
        .bounds
        .iter()
        .zip(&outcome.reduced_costs)
        .zip(&outcome.primal)
    {
        if r.abs() <= OPTIMALITY_TOLERANCE {
            continue;
        }
        let at_lower = match lp.direction {
            Direction::Minimize => r > 0.0,
            Direction::Maximize => r < 0.0,
        };
        value += if at_lower { r * b.lower } else { r * b.upper };
    }
    value
}

/// Certifies an optimal LP outcome: primal/dual feasibility, complementary
/// slackness, and the duality gap.
pub fn certify(lp: &LinearProgram, outcome: &SolveOutcome) -> Residuals {
    let x = &outcome.primal;
    let primal = primal_residual(&lp.rows, &lp.bounds, x);

    // Dual sign feasibility and row complementarity.
    let mut dual_res = 0.0_f64;
    let mut compl = 0.0_f64;
    let flip = match lp.direction {
        Direction::Minimize => 1.0,
        Direction::Maximize => -1.0,
    };
    for (r, (&y, act)) in lp
        .rows
        .iter()
        .zip(outcome.dual.iter().zip(row_activity(&lp.rows, x)))
    {
        let slack = act - r.rhs;
        match r.sense {
            Sense::Ge => dual_res = dual_res.max(-flip * y),
            Sense::Le => dual_res = dual_res.max(flip * y),
            Sense::Eq => {}
        }
        compl = compl.max((y * slack).abs() / (1.0 + r.rhs.abs()));
    }
    // Reduced-cost complementarity against the active bound.
    for ((b, &r), &xj) in lp
        .bounds
        .iter()
        .zip(&outcome.reduced_costs)
        .zip(x)
    {
        if r.abs() <= OPTIMALITY_TOLERANCE {
            continue;
        }
        let at_lower = match lp.direction {
            Direction::Minimize => r > 0.0,
            Direction::Maximize => r < 0.0,
        };
        let gap = if at_lower {
            if b.lower.is_finite() {
                xj - b.lower
            } else {
                f64::INFINITY
            }
        } else if b.upper.is_finite() {
            b.upper - xj
        } else {
            f64::INFINITY
        };
        compl = compl.max((r * gap).abs() / (1.0 + r.abs()));
    }
    let gap = (outcome.objective_value - dual_objective(lp, outcome)).abs()
        / (1.0 + outcome.objective_value.abs());
    Residuals {
        primal,
        dual: dual_res,
        complementarity: compl,
        gap,
    }
}

/// KKT residual of a QP outcome: stationarity, primal feasibility, dual
/// signs, and complementary slackness, as a single max.
pub fn kkt_residual(qp: &QuadraticProgram, outcome: &SolveOutcome) -> f64 {
    let x = &outcome.primal;
    let mut res = primal_residual(&qp.rows, &qp.bounds, x);
    let grad = qp.gradient_at(x);
    // r = grad - A' y; bound multipliers are implied by the sign of r.
    let mut r = grad;
    for (row, &y) in qp.rows.iter().zip(&outcome.dual) {
        for (rj, &a) in r.iter_mut().zip(&row.coeffs) {
            *rj -= y * a;
        }
    }
    for (row, (&y, act)) in qp
        .rows
        .iter()
        .zip(outcome.dual.iter().zip(row_activity(&qp.rows, x)))
    {
        match row.sense {
            Sense::Ge => res = res.max(-y),
            Sense::Le => res = res.max(y),
            Sense::Eq => {}
        }
        res = res.max((y * (act - row.rhs)).abs() / (1.0 + row.rhs.abs()));
    }
    for ((b, &rj), &xj) in qp.bounds.iter().zip(&r).zip(x) {
        let scale = 1.0 + rj.abs();
        if rj > OPTIMALITY_TOLERANCE {
            // Must be supported by the lower bound.
            if b.lower.is_finite() {
                res = res.max((rj * (xj - b.lower)).abs() / scale);
            } else {
                res = res.max(rj);
            }
        } else if rj < -OPTIMALITY_TOLERANCE {
            if b.upper.is_finite() {
                res = res.max((rj * (b.upper - xj)).abs() / scale);
            } else {
                res = res.max(-rj);
            }
        }
    }
    res
}
