//! Primal active-set method for convex quadratic programs.
//!
//! Equality-constrained subproblems are reduced onto the null space of the
//! working set and solved through an eigendecomposition of the reduced
//! Hessian. Zero-curvature directions (the objective here is typically a
//! payment variance whose matrix annihilates the all-ones vector) are
//! resolved exactly: components of the gradient in the kernel either vanish,
//! yield a linear descent ray, or are blocked by a constraint.

use super::{
    dot, jacobi_eigen, mat_vec, null_basis, solve_consistent, ConvexError, Direction,
    LinearProgram, QuadraticProgram, Sense, SolveOutcome, SolveStatus,
};

const ACTIVE_TOLERANCE: f64 = 1e-9;
const CURVATURE_TOLERANCE: f64 = 1e-9;
const STEP_TOLERANCE: f64 = 1e-11;

struct NormCon {
    coeffs: Vec<f64>,
    rhs: f64,
    eq: bool,
    /// `(user_row, sign)` when this constraint mirrors a user row.
    origin: Option<(usize, f64)>,
}

pub fn solve_qp(qp: &QuadraticProgram) -> Result<SolveOutcome, ConvexError> {
    let n = qp.n_vars();
    for (row, r) in qp.rows.iter().enumerate() {
        if r.coeffs.len() != n {
            return Err(ConvexError::RowArity {
                row,
                expected: n,
                got: r.coeffs.len(),
            });
        }
    }
    for (var, b) in qp.bounds.iter().enumerate() {
        if !(b.lower <= b.upper) {
            return Err(ConvexError::BadBounds {
                var,
                lower: b.lower,
                upper: b.upper,
            });
        }
    }
    let mut asym = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            asym = asym.max((qp.quadratic[i][j] - qp.quadratic[j][i]).abs());
        }
    }
    if asym > 1e-9 {
        return Err(ConvexError::AsymmetricQuadratic { max_delta: asym });
    }
    let hessian: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| qp.quadratic[i][j] + qp.quadratic[j][i])
                .collect()
        })
        .collect();
    let (eigvals, _) = jacobi_eigen(&qp.quadratic);
    let min_eig = eigvals.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eig < -1e-9 {
        return Err(ConvexError::NotPsd {
            min_eigenvalue: min_eig,
        });
    }

    // Normalize everything to `a'x >= b` plus equalities.
    let mut cons: Vec<NormCon> = Vec::new();
    for (i, r) in qp.rows.iter().enumerate() {
        match r.sense {
            Sense::Ge => cons.push(NormCon {
                coeffs: r.coeffs.clone(),
                rhs: r.rhs,
                eq: false,
                origin: Some((i, 1.0)),
            }),
            Sense::Le => cons.push(NormCon {
                coeffs: r.coeffs.iter().map(|c| -c).collect(),
                rhs: -r.rhs,
                eq: false,
                origin: Some((i, -1.0)),
            }),
            Sense::Eq => cons.push(NormCon {
                coeffs: r.coeffs.clone(),
                rhs: r.rhs,
                eq: true,
                origin: Some((i, 1.0)),
            }),
        }
    }
    for (j, b) in qp.bounds.iter().enumerate() {
        if b.lower.is_finite() {
            let mut coeffs = vec![0.0; n];
            coeffs[j] = 1.0;
            cons.push(NormCon {
                coeffs,
                rhs: b.lower,
                eq: false,
                origin: None,
            });
        }
        if b.upper.is_finite() {
            let mut coeffs = vec![0.0; n];
            coeffs[j] = -1.0;
            cons.push(NormCon {
                coeffs,
                rhs: -b.upper,
                eq: false,
                origin: None,
            });
        }
    }

    // Feasible start from a phase-one LP over the same polyhedron.
    let mut feas = LinearProgram::new(Direction::Minimize, vec![0.0; n]);
    feas.rows = qp.rows.clone();
    feas.bounds = qp.bounds.clone();
    let start = super::solve_lp(&feas)?;
    match start.status {
        SolveStatus::Optimal => {}
        status => return Ok(SolveOutcome::non_optimal(status, start.certificate)),
    }
    let mut x = start.primal;

    // Initial working set: equalities plus independent active inequalities.
    let mut working: Vec<usize> = Vec::new();
    for (k, con) in cons.iter().enumerate() {
        let active = con.eq
            || (dot(&con.coeffs, &x) - con.rhs).abs() <= ACTIVE_TOLERANCE * (1.0 + con.rhs.abs());
        if active && is_independent(&cons, &working, &con.coeffs) {
            working.push(k);
        }
    }

    let max_iterations = 1000 + 10 * (n + cons.len()) * (n + cons.len());
    let final_multipliers: Vec<f64>;
    let mut iterations = 0usize;
    loop {
        iterations += 1;
        if iterations > max_iterations {
            return Err(ConvexError::NumericalBreakdown { iterations });
        }
        let g = qp.gradient_at(&x);
        let a_w: Vec<Vec<f64>> = working.iter().map(|&k| cons[k].coeffs.clone()).collect();
        let basis = null_basis(&a_w, 1e-10);
        let (p, ray_mode) = direction(&hessian, &g, &basis);
        let p_norm = p.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        let x_scale = 1.0 + x.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));

        if !ray_mode && p_norm <= STEP_TOLERANCE * x_scale {
            // Stationary on the working set; check multiplier signs.
            let multipliers = solve_multipliers(&a_w, &g);
            let mut drop: Option<(usize, f64)> = None;
            for (pos, &k) in working.iter().enumerate() {
                if cons[k].eq {
                    continue;
                }
                let lambda = multipliers[pos];
                if lambda < -1e-9 && drop.map_or(true, |(_, best)| lambda < best) {
                    drop = Some((pos, lambda));
                }
            }
            match drop {
                None => {
                    final_multipliers = multipliers;
                    break;
                }
                Some((pos, _)) => {
                    working.remove(pos);
                    continue;
                }
            }
        }

        // Ratio test against constraints outside the working set.
        let mut alpha = if ray_mode { f64::INFINITY } else { 1.0 };
        let mut blocker: Option<usize> = None;
        for (k, con) in cons.iter().enumerate() {
            if working.contains(&k) {
                continue;
            }
            let ap = dot(&con.coeffs, &p);
            if ap < -1e-11 {
                let slack = (dot(&con.coeffs, &x) - con.rhs).max(0.0);
                let step = slack / (-ap);
                if step < alpha - 1e-12 {
                    alpha = step;
                    blocker = Some(k);
                }
            }
        }
        if ray_mode && blocker.is_none() {
            return Ok(SolveOutcome::non_optimal(SolveStatus::Unbounded, Some(p)));
        }
        for (xj, pj) in x.iter_mut().zip(&p) {
            *xj += alpha * pj;
        }
        if let Some(k) = blocker {
            debug_assert!(is_independent(&cons, &working, &cons[k].coeffs));
            working.push(k);
        }
    }

    // Map working-set multipliers back onto the user rows.
    let multipliers = final_multipliers;
    let mut dual = vec![0.0; qp.rows.len()];
    for (pos, &k) in working.iter().enumerate() {
        if let Some((row, sign)) = cons[k].origin {
            dual[row] = sign * multipliers[pos];
        }
    }
    let grad = qp.gradient_at(&x);
    let reduced_costs: Vec<f64> = (0..n)
        .map(|j| {
            let mut r = grad[j];
            for (row, &y) in qp.rows.iter().zip(&dual) {
                r -= y * row.coeffs[j];
            }
            r
        })
        .collect();
    let objective_value = qp.objective_at(&x);
    Ok(SolveOutcome {
        status: SolveStatus::Optimal,
        primal: x,
        dual,
        reduced_costs,
        objective_value,
        certificate: None,
    })
}

/// Search direction on the working-set null space. Returns the step and
/// whether it is a zero-curvature (linear descent) ray.
fn direction(hessian: &[Vec<f64>], g: &[f64], basis: &[Vec<f64>]) -> (Vec<f64>, bool) {
    let n = g.len();
    let k = basis.len();
    if k == 0 {
        return (vec![0.0; n], false);
    }
    // Reduced Hessian and gradient in basis coordinates.
    let mut reduced = vec![vec![0.0; k]; k];
    for i in 0..k {
        let hv = mat_vec(hessian, &basis[i]);
        for j in 0..k {
            reduced[j][i] = dot(&basis[j], &hv);
        }
    }
    let q: Vec<f64> = basis.iter().map(|v| dot(v, g)).collect();
    let (vals, vecs) = jacobi_eigen(&reduced);
    let lambda_max = vals.iter().copied().fold(0.0_f64, f64::max);
    let curv_tol = CURVATURE_TOLERANCE * lambda_max.max(1.0);
    let g_scale = 1.0 + q.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    // Gradient components in eigencoordinates.
    let qt: Vec<f64> = (0..k)
        .map(|i| (0..k).map(|r| vecs[r][i] * q[r]).sum())
        .collect();
    let ray = (0..k).any(|i| vals[i] <= curv_tol && qt[i].abs() > 1e-9 * g_scale);
    let mut z = vec![0.0; k];
    for i in 0..k {
        if ray {
            if vals[i] <= curv_tol && qt[i].abs() > 1e-9 * g_scale {
                z[i] = -qt[i];
            }
        } else if vals[i] > curv_tol {
            z[i] = -qt[i] / vals[i];
        }
    }
    // p = basis * (vecs * z)
    let w: Vec<f64> = (0..k).map(|r| (0..k).map(|i| vecs[r][i] * z[i]).sum()).collect();
    let mut p = vec![0.0; n];
    for (wr, b) in w.iter().zip(basis) {
        for (pj, bj) in p.iter_mut().zip(b) {
            *pj += wr * bj;
        }
    }
    (p, ray)
}

/// Least-squares multipliers for `A_W' lambda = g` via normal equations.
fn solve_multipliers(a_w: &[Vec<f64>], g: &[f64]) -> Vec<f64> {
    let k = a_w.len();
    if k == 0 {
        return Vec::new();
    }
    let mut gram = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            gram[i][j] = dot(&a_w[i], &a_w[j]);
        }
    }
    let rhs: Vec<f64> = a_w.iter().map(|row| dot(row, g)).collect();
    solve_consistent(&gram, &rhs, 1e-12).unwrap_or_else(|| vec![0.0; k])
}

fn is_independent(cons: &[NormCon], working: &[usize], coeffs: &[f64]) -> bool {
    if working.is_empty() {
        return coeffs.iter().any(|c| c.abs() > 1e-12);
    }
    // `coeffs` is dependent iff it lies in the row space of the working set.
    let n = coeffs.len();
    let a_t: Vec<Vec<f64>> = (0..n)
        .map(|j| working.iter().map(|&k| cons[k].coeffs[j]).collect())
        .collect();
    solve_consistent(&a_t, coeffs, 1e-8).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{kkt_residual, QuadraticProgram, OPTIMALITY_TOLERANCE};

    #[test]
    fn minimizes_square_above_threshold() {
        // min t^2 subject to t >= 2.
        let mut qp = QuadraticProgram::new(vec![vec![1.0]]);
        qp.push_row(vec![1.0], Sense::Ge, 2.0);
        let out = solve_qp(&qp).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert!((out.primal[0] - 2.0).abs() < 1e-9);
        assert!((out.objective_value - 4.0).abs() < 1e-8);
        assert!(kkt_residual(&qp, &out) <= OPTIMALITY_TOLERANCE);
    }

    #[test]
    fn zero_matrix_returns_any_feasible_point() {
        let mut qp = QuadraticProgram::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
        qp.push_row(vec![1.0, 1.0], Sense::Ge, 1.0);
        let out = solve_qp(&qp).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert!(out.primal[0] + out.primal[1] >= 1.0 - 1e-9);
        assert!(out.objective_value.abs() < 1e-12);
    }

    #[test]
    fn rejects_indefinite_matrix() {
        let qp = QuadraticProgram::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(matches!(solve_qp(&qp), Err(ConvexError::NotPsd { .. })));
    }

    #[test]
    fn reports_infeasible_polyhedron() {
        let mut qp = QuadraticProgram::new(vec![vec![1.0]]);
        qp.push_row(vec![1.0], Sense::Ge, 2.0);
        qp.push_row(vec![1.0], Sense::Le, 1.0);
        let out = solve_qp(&qp).unwrap();
        assert_eq!(out.status, SolveStatus::Infeasible);
    }

    #[test]
    fn handles_singular_objective_with_kernel() {
        // Variance-style matrix annihilating the all-ones direction:
        // V = R'R with R = diag(sqrt(p)) (I - 1 p') for p = (0.5, 0.5).
        let p: [f64; 2] = [0.5, 0.5];
        let mut r = vec![vec![0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { 1.0 } else { 0.0 };
                r[i][j] = p[i].sqrt() * (id - p[j]);
            }
        }
        let mut v = vec![vec![0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                v[i][j] = (0..2).map(|k| r[k][i] * r[k][j]).sum();
            }
        }
        let mut qp = QuadraticProgram::new(v);
        // t_2 - t_1 >= 10/3 is the binding constraint of the two-point case.
        qp.push_row(vec![-1.0, 1.0], Sense::Ge, 10.0 / 3.0);
        let out = solve_qp(&qp).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        // Optimal variance is 0.25 * (10/3)^2 = 25/9 along the whole face.
        assert!((out.objective_value - 25.0 / 9.0).abs() < 1e-7);
        assert!(kkt_residual(&qp, &out) <= OPTIMALITY_TOLERANCE);
    }
}
