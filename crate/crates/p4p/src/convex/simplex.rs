//! Two-phase dense simplex with Bland's rule.
//!
//! The user-facing problem is rewritten in computational standard form
//! (`min c's, A s = b, s >= 0, b >= 0`): finite lower bounds are shifted
//! out, free variables split, finite upper bounds become internal rows, and
//! slack/surplus/artificial columns complete the basis. Bland's lowest-index
//! pivoting rule guarantees termination and makes the solver fully
//! deterministic: bit-identical inputs give bit-identical outputs.

use super::{
    dot, ConvexError, Direction, LinearProgram, Sense, SolveOutcome, SolveStatus,
    FEASIBILITY_TOLERANCE, PIVOT_TOLERANCE,
};

const ENTERING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
enum StdCol {
    /// User variable shifted by its finite lower bound.
    Shifted { var: usize, shift: f64 },
    /// Positive part of a free user variable.
    Pos { var: usize },
    /// Negative part of a free user variable.
    Neg { var: usize },
    Slack,
    Surplus,
    Artificial,
}

struct Tableau {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    rc: Vec<f64>,
    basis: Vec<usize>,
    iterations: usize,
    max_iterations: usize,
}

enum LoopExit {
    Optimal,
    Unbounded { entering: usize },
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.a[row][col];
        for v in self.a[row].iter_mut() {
            *v /= p;
        }
        self.b[row] /= p;
        self.a[row][col] = 1.0;
        let pivot_row = self.a[row].clone();
        let pivot_rhs = self.b[row];
        for i in 0..self.a.len() {
            if i == row {
                continue;
            }
            let factor = self.a[i][col];
            if factor != 0.0 {
                for (dst, &src) in self.a[i].iter_mut().zip(&pivot_row) {
                    *dst -= factor * src;
                }
                self.b[i] -= factor * pivot_rhs;
                self.a[i][col] = 0.0;
            }
        }
        let factor = self.rc[col];
        if factor != 0.0 {
            for (dst, &src) in self.rc.iter_mut().zip(&pivot_row) {
                *dst -= factor * src;
            }
            self.rc[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Recomputes reduced costs for the given column costs.
    fn reset_costs(&mut self, costs: &[f64]) {
        let rows = self.a.len();
        let cols = costs.len();
        let mut rc = costs.to_vec();
        for i in 0..rows {
            let cb = costs[self.basis[i]];
            if cb != 0.0 {
                for j in 0..cols {
                    rc[j] -= cb * self.a[i][j];
                }
            }
        }
        self.rc = rc;
    }

    fn objective(&self, costs: &[f64]) -> f64 {
        self.basis
            .iter()
            .zip(&self.b)
            .map(|(&j, &v)| costs[j] * v)
            .sum()
    }

    /// Bland's rule: lowest eligible entering column; leaving row by minimum
    /// ratio, ties broken toward the lowest basic variable index.
    fn run(&mut self, allowed: &[bool]) -> Result<LoopExit, ConvexError> {
        loop {
            let entering = (0..self.rc.len())
                .find(|&j| allowed[j] && self.rc[j] < -ENTERING_TOLERANCE);
            let Some(col) = entering else {
                return Ok(LoopExit::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.a.len() {
                let aij = self.a[i][col];
                if aij > PIVOT_TOLERANCE {
                    let ratio = self.b[i].max(0.0) / aij;
                    let better = match leave {
                        None => true,
                        Some((cur, best)) => {
                            ratio < best - 1e-12
                                || (ratio <= best + 1e-12 && self.basis[i] < self.basis[cur])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((row, _)) = leave else {
                return Ok(LoopExit::Unbounded { entering: col });
            };
            self.pivot(row, col);
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(ConvexError::NumericalBreakdown {
                    iterations: self.iterations,
                });
            }
        }
    }
}

pub fn solve_lp(lp: &LinearProgram) -> Result<SolveOutcome, ConvexError> {
    lp.check_shape()?;
    let n = lp.n_vars();
    let minimize = matches!(lp.direction, Direction::Minimize);
    let dir = if minimize { 1.0 } else { -1.0 };

    // Structural columns and internal upper-bound rows.
    let mut cols: Vec<StdCol> = Vec::new();
    let mut var_main_col = vec![usize::MAX; n];
    let mut var_neg_col = vec![usize::MAX; n];
    // (columns with +/- coefficient, rhs)
    let mut ub_rows: Vec<(usize, Option<usize>, f64)> = Vec::new();
    for (j, b) in lp.bounds.iter().enumerate() {
        if b.lower.is_finite() {
            var_main_col[j] = cols.len();
            cols.push(StdCol::Shifted {
                var: j,
                shift: b.lower,
            });
            if b.upper.is_finite() {
                ub_rows.push((var_main_col[j], None, b.upper - b.lower));
            }
        } else {
            var_main_col[j] = cols.len();
            cols.push(StdCol::Pos { var: j });
            var_neg_col[j] = cols.len();
            cols.push(StdCol::Neg { var: j });
            if b.upper.is_finite() {
                ub_rows.push((var_main_col[j], Some(var_neg_col[j]), b.upper));
            }
        }
    }
    let n_struct = cols.len();
    let n_user_rows = lp.rows.len();
    let n_rows = n_user_rows + ub_rows.len();

    // Dense structural matrix with shift-adjusted right-hand sides.
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(n_rows);
    let mut rhs: Vec<f64> = Vec::with_capacity(n_rows);
    let mut senses: Vec<Sense> = Vec::with_capacity(n_rows);
    for row in &lp.rows {
        let mut coeffs = vec![0.0; n_struct];
        let mut shift_sum = 0.0;
        for (j, &c) in row.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            match cols[var_main_col[j]] {
                StdCol::Shifted { shift, .. } => {
                    coeffs[var_main_col[j]] += c;
                    shift_sum += c * shift;
                }
                _ => {
                    coeffs[var_main_col[j]] += c;
                    coeffs[var_neg_col[j]] -= c;
                }
            }
        }
        a.push(coeffs);
        rhs.push(row.rhs - shift_sum);
        senses.push(row.sense);
    }
    for &(pos, neg, ub) in &ub_rows {
        let mut coeffs = vec![0.0; n_struct];
        coeffs[pos] = 1.0;
        if let Some(neg) = neg {
            coeffs[neg] = -1.0;
        }
        a.push(coeffs);
        rhs.push(ub);
        senses.push(Sense::Le);
    }

    // Normalize right-hand sides to be nonnegative.
    let mut flipped = vec![false; n_rows];
    for i in 0..n_rows {
        if rhs[i] < 0.0 {
            for v in a[i].iter_mut() {
                *v = -*v;
            }
            rhs[i] = -rhs[i];
            flipped[i] = true;
            senses[i] = match senses[i] {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }

    // Slack, surplus, and artificial columns; markers recover the duals.
    let mut marker = vec![usize::MAX; n_rows];
    let mut basis = vec![usize::MAX; n_rows];
    let mut is_artificial = vec![false; n_struct];
    for i in 0..n_rows {
        match senses[i] {
            Sense::Le => {
                let col = push_unit_col(&mut a, &mut cols, StdCol::Slack, i, 1.0);
                is_artificial.push(false);
                marker[i] = col;
                basis[i] = col;
            }
            Sense::Ge => {
                let col = push_unit_col(&mut a, &mut cols, StdCol::Surplus, i, -1.0);
                is_artificial.push(false);
                let _ = col;
            }
            Sense::Eq => {}
        }
    }
    for i in 0..n_rows {
        if basis[i] == usize::MAX {
            let col = push_unit_col(&mut a, &mut cols, StdCol::Artificial, i, 1.0);
            is_artificial.push(true);
            marker[i] = col;
            basis[i] = col;
        }
    }
    let n_cols = cols.len();
    let max_iterations = 1000 + 10 * (n_rows + n_cols) * (n_rows + n_cols);

    let mut t = Tableau {
        a,
        b: rhs,
        rc: Vec::new(),
        basis,
        iterations: 0,
        max_iterations,
    };

    // Phase 1: drive artificial variables to zero.
    let phase1_costs: Vec<f64> = is_artificial
        .iter()
        .map(|&art| if art { 1.0 } else { 0.0 })
        .collect();
    t.reset_costs(&phase1_costs);
    let allow_all = vec![true; n_cols];
    match t.run(&allow_all)? {
        LoopExit::Optimal => {}
        LoopExit::Unbounded { .. } => {
            return Err(ConvexError::NumericalBreakdown {
                iterations: t.iterations,
            });
        }
    }
    let scale = 1.0 + t.b.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if t.objective(&phase1_costs) > FEASIBILITY_TOLERANCE * scale {
        // Farkas certificate from the phase-1 duals of the user rows.
        let mut cert = Vec::with_capacity(n_user_rows);
        for i in 0..n_user_rows {
            let c_marker = phase1_costs[marker[i]];
            let mut y = c_marker - t.rc[marker[i]];
            if flipped[i] {
                y = -y;
            }
            cert.push(y);
        }
        return Ok(SolveOutcome::non_optimal(
            SolveStatus::Infeasible,
            Some(cert),
        ));
    }

    // Pivot basic artificials out where possible; rows that cannot release
    // their artificial are redundant and keep it basic at zero.
    for i in 0..n_rows {
        if is_artificial[t.basis[i]] {
            let col = (0..n_cols)
                .find(|&j| !is_artificial[j] && t.a[i][j].abs() > ENTERING_TOLERANCE);
            if let Some(col) = col {
                t.pivot(i, col);
            }
        }
    }

    // Phase 2 with the real objective.
    let mut phase2_costs = vec![0.0; n_cols];
    for (j, kind) in cols.iter().enumerate() {
        match *kind {
            StdCol::Shifted { var, .. } | StdCol::Pos { var } => {
                phase2_costs[j] = dir * lp.objective[var];
            }
            StdCol::Neg { var } => phase2_costs[j] = -dir * lp.objective[var],
            _ => {}
        }
    }
    t.reset_costs(&phase2_costs);
    let allowed: Vec<bool> = is_artificial.iter().map(|&art| !art).collect();
    match t.run(&allowed)? {
        LoopExit::Optimal => {}
        LoopExit::Unbounded { entering } => {
            let mut d_std = vec![0.0; n_cols];
            d_std[entering] = 1.0;
            for i in 0..n_rows {
                d_std[t.basis[i]] = -t.a[i][entering];
            }
            let mut ray = vec![0.0; n];
            for (j, kind) in cols.iter().enumerate() {
                match *kind {
                    StdCol::Shifted { var, .. } | StdCol::Pos { var } => ray[var] += d_std[j],
                    StdCol::Neg { var } => ray[var] -= d_std[j],
                    _ => {}
                }
            }
            return Ok(SolveOutcome::non_optimal(
                SolveStatus::Unbounded,
                Some(ray),
            ));
        }
    }

    // Recover the user-space primal solution.
    let mut x_std = vec![0.0; n_cols];
    for i in 0..n_rows {
        x_std[t.basis[i]] = t.b[i].max(0.0);
    }
    let mut x = vec![0.0; n];
    for (j, kind) in cols.iter().enumerate() {
        match *kind {
            StdCol::Shifted { var, shift } => x[var] = shift + x_std[j],
            StdCol::Pos { var } => x[var] += x_std[j],
            StdCol::Neg { var } => x[var] -= x_std[j],
            _ => {}
        }
    }

    // Duals from the marker columns (unit columns of each row), then undo
    // the row flips and the minimize/maximize sign change.
    let mut dual = Vec::with_capacity(n_user_rows);
    for i in 0..n_user_rows {
        let mut y = -t.rc[marker[i]];
        if flipped[i] {
            y = -y;
        }
        dual.push(dir * y);
    }
    let reduced_costs: Vec<f64> = (0..n)
        .map(|j| {
            let mut r = lp.objective[j];
            for (row, &y) in lp.rows.iter().zip(&dual) {
                r -= y * row.coeffs[j];
            }
            r
        })
        .collect();
    let objective_value = dot(&lp.objective, &x);

    Ok(SolveOutcome {
        status: SolveStatus::Optimal,
        primal: x,
        dual,
        reduced_costs,
        objective_value,
        certificate: None,
    })
}

fn push_unit_col(
    a: &mut [Vec<f64>],
    cols: &mut Vec<StdCol>,
    kind: StdCol,
    row: usize,
    coeff: f64,
) -> usize {
    let idx = cols.len();
    cols.push(kind);
    for (i, r) in a.iter_mut().enumerate() {
        r.push(if i == row { coeff } else { 0.0 });
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{certify, Direction, LinearProgram, OPTIMALITY_TOLERANCE};

    #[test]
    fn maximizes_single_variable_with_cap() {
        let mut lp = LinearProgram::new(Direction::Maximize, vec![1.0]);
        lp.add_leq(vec![1.0], 3.0);
        let out = solve_lp(&lp).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert!((out.primal[0] - 3.0).abs() < 1e-12);
        assert!((out.objective_value - 3.0).abs() < 1e-12);
        let res = certify(&lp, &out);
        assert!(res.max() <= OPTIMALITY_TOLERANCE, "residuals {res:?}");
    }

    #[test]
    fn detects_unbounded_maximization() {
        let lp = LinearProgram::new(Direction::Maximize, vec![1.0]);
        let out = solve_lp(&lp).unwrap();
        assert_eq!(out.status, SolveStatus::Unbounded);
        let ray = out.certificate.unwrap();
        assert!(ray[0] > 0.0);
    }

    #[test]
    fn solves_budget_scaling_form() {
        // max beta subject to 0.3 psi_1 - 0.3 psi_2 + beta <= 0, psi in [0,1].
        let mut lp = LinearProgram::new(Direction::Maximize, vec![0.0, 0.0, 1.0]);
        lp.set_bounds(0, 0.0, 1.0);
        lp.set_bounds(1, 0.0, 1.0);
        lp.add_leq(vec![0.3, -0.3, 1.0], 0.0);
        let out = solve_lp(&lp).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert!((out.objective_value - 0.3).abs() < 1e-9);
        assert!(out.primal[0].abs() < 1e-9);
        assert!((out.primal[1] - 1.0).abs() < 1e-9);
        let res = certify(&lp, &out);
        assert!(res.max() <= OPTIMALITY_TOLERANCE, "residuals {res:?}");
    }

    #[test]
    fn reports_infeasible_with_certificate() {
        let mut lp = LinearProgram::new(Direction::Maximize, vec![0.0]);
        lp.add_leq(vec![1.0], 1.0);
        lp.add_geq(vec![1.0], 2.0);
        let out = solve_lp(&lp).unwrap();
        assert_eq!(out.status, SolveStatus::Infeasible);
        assert!(out.certificate.is_some());
    }

    #[test]
    fn handles_equality_rows() {
        let mut lp = LinearProgram::new(Direction::Maximize, vec![1.0, 0.0]);
        lp.add_eq(vec![1.0, 1.0], 2.0);
        lp.add_leq(vec![1.0, 0.0], 1.5);
        let out = solve_lp(&lp).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert!((out.primal[0] - 1.5).abs() < 1e-9);
        assert!((out.primal[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn tolerates_redundant_equalities() {
        let mut lp = LinearProgram::new(Direction::Minimize, vec![1.0, 1.0]);
        lp.add_eq(vec![1.0, 1.0], 2.0);
        lp.add_eq(vec![2.0, 2.0], 4.0);
        let out = solve_lp(&lp).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert!((out.primal[0] + out.primal[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn handles_free_and_shifted_variables() {
        // min x + y with x free, y in [2, 5], x + y >= 1.
        let mut lp = LinearProgram::new(Direction::Minimize, vec![1.0, 1.0]);
        lp.set_bounds(0, f64::NEG_INFINITY, f64::INFINITY);
        lp.set_bounds(1, 2.0, 5.0);
        lp.add_geq(vec![1.0, 1.0], 1.0);
        let out = solve_lp(&lp).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert!((out.primal[0] + out.primal[1] - 1.0).abs() < 1e-9);
        assert!((out.primal[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn deterministic_bitwise_repeat() {
        let mut lp = LinearProgram::new(Direction::Minimize, vec![0.5, 0.2, 0.3]);
        lp.add_geq(vec![-0.3, 0.1, 0.3], 1.0);
        lp.add_geq(vec![0.2, -0.4, 0.2], 0.5);
        let a = solve_lp(&lp).unwrap();
        let b = solve_lp(&lp).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.primal), bits(&b.primal));
        assert_eq!(bits(&a.dual), bits(&b.dual));
        assert_eq!(a.objective_value.to_bits(), b.objective_value.to_bits());
    }
}
