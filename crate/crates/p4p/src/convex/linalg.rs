//! Small dense linear algebra used by the LP and QP solvers.
//!
//! Everything here targets matrices of at most a few dozen rows and columns,
//! so plain Gaussian elimination with complete pivoting and cyclic Jacobi
//! sweeps are accurate and fast enough.

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| dot(row, x)).collect()
}

pub(crate) fn mat_t_vec(a: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let cols = a.first().map_or(0, Vec::len);
    let mut out = vec![0.0; cols];
    for (row, &yi) in a.iter().zip(y) {
        for (o, &v) in out.iter_mut().zip(row) {
            *o += yi * v;
        }
    }
    out
}

/// Solves `A x = b` for a consistent (possibly rank-deficient or
/// rectangular) system via Gaussian elimination with complete pivoting.
/// Free variables are set to zero. Returns `None` if the system is
/// inconsistent beyond `tol`.
pub(crate) fn solve_consistent(a: &[Vec<f64>], b: &[f64], tol: f64) -> Option<Vec<f64>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<f64>> = a.iter().map(|r| {
        let mut r = r.clone();
        r.push(0.0);
        r
    }).collect();
    for (i, &bi) in b.iter().enumerate() {
        m[i][cols] = bi;
    }
    let mut col_perm: Vec<usize> = (0..cols).collect();
    let mut rank = 0;
    for step in 0..rows.min(cols) {
        // Complete pivoting: largest remaining entry, lowest indices on ties.
        let mut best = (step, step, 0.0_f64);
        for i in step..rows {
            for j in step..cols {
                let v = m[i][j].abs();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        if best.2 <= tol {
            break;
        }
        m.swap(step, best.0);
        if best.1 != step {
            for row in m.iter_mut() {
                row.swap(step, best.1);
            }
            col_perm.swap(step, best.1);
        }
        let pivot = m[step][step];
        for i in 0..rows {
            if i == step {
                continue;
            }
            let factor = m[i][step] / pivot;
            if factor != 0.0 {
                for j in step..=cols {
                    let upd = m[step][j] * factor;
                    m[i][j] -= upd;
                }
                m[i][step] = 0.0;
            }
        }
        rank = step + 1;
    }
    let scale = 1.0 + b.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    for row in m.iter().take(rows).skip(rank) {
        if row[cols].abs() > tol * scale {
            return None;
        }
    }
    let mut x = vec![0.0; cols];
    for step in 0..rank {
        x[col_perm[step]] = m[step][cols] / m[step][step];
    }
    Some(x)
}

/// Returns a basis of the null space of `a` as column vectors.
pub(crate) fn null_basis(a: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    if rows == 0 {
        return (0..cols)
            .map(|j| {
                let mut e = vec![0.0; cols];
                e[j] = 1.0;
                e
            })
            .collect();
    }
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut r = 0;
    for j in 0..cols {
        if r == rows {
            break;
        }
        // Partial pivoting per column keeps pivot columns in index order,
        // which makes the basis deterministic.
        let (best_i, best_v) = (r..rows)
            .map(|i| (i, m[i][j].abs()))
            .fold((r, 0.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if best_v <= tol {
            continue;
        }
        m.swap(r, best_i);
        let pivot = m[r][j];
        for row in m[r].iter_mut() {
            *row /= pivot;
        }
        for i in 0..rows {
            if i != r {
                let factor = m[i][j];
                if factor != 0.0 {
                    for k in 0..cols {
                        let upd = m[r][k] * factor;
                        m[i][k] -= upd;
                    }
                }
            }
        }
        pivot_cols.push(j);
        r += 1;
    }
    let mut basis = Vec::new();
    let mut is_pivot = vec![false; cols];
    for &j in &pivot_cols {
        is_pivot[j] = true;
    }
    for free in 0..cols {
        if is_pivot[free] {
            continue;
        }
        let mut v = vec![0.0; cols];
        v[free] = 1.0;
        for (row, &pj) in pivot_cols.iter().enumerate() {
            v[pj] = -m[row][free];
        }
        basis.push(v);
    }
    basis
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as columns;
/// `a = V diag(vals) V^T`.
pub(crate) fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = vec![0.0; n];
            row[i] = 1.0;
            row
        })
        .collect();
    let norm: f64 = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |acc, x| acc.max(x.abs()));
    let tol = 1e-14 * norm.max(1.0);
    for _sweep in 0..100 {
        let mut off = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(m[i][j].abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() <= tol {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let vals = (0..n).map(|i| m[i][i]).collect();
    (vals, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_square_system() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve_consistent(&a, &[5.0, 10.0], 1e-12).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn solves_rank_deficient_consistent_system() {
        let a = vec![vec![1.0, 1.0], vec![2.0, 2.0]];
        let x = solve_consistent(&a, &[3.0, 6.0], 1e-12).unwrap();
        assert!((x[0] + x[1] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn detects_inconsistency() {
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(solve_consistent(&a, &[1.0, 2.0], 1e-12).is_none());
    }

    #[test]
    fn null_basis_spans_kernel() {
        let a = vec![vec![1.0, 1.0, 1.0]];
        let basis = null_basis(&a, 1e-12);
        assert_eq!(basis.len(), 2);
        for v in &basis {
            assert!(dot(&a[0], v).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobi_recovers_eigenvalues() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let (mut vals, _) = jacobi_eigen(&a);
        vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((vals[0] - 1.0).abs() < 1e-10);
        assert!((vals[1] - 3.0).abs() < 1e-10);
    }
}
