//! Dense linear algebra for the small systems that arise here (dimensions
//! are bounded by the species count and reaction count, both single-digit in
//! practice): dot products, norms, Gaussian elimination, Cholesky,
//! Gram-Schmidt span bases, and reduced-row-echelon nullspaces.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// a + s*b
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
/// Returns None when the matrix is singular at working precision.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            m[i][col]
                .abs()
                .partial_cmp(&m[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        for row in (col + 1)..n {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                for k in col..=n {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = m[col][n];
        for k in (col + 1)..n {
            s -= m[col][k] * x[k];
        }
        x[col] = s / m[col][col];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Cholesky solve for a symmetric positive-definite system; None when a
/// pivot drops below `floor` (matrix numerically not PD).
pub fn cholesky_solve(a: &[Vec<f64>], b: &[f64], floor: f64) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= floor {
                    return None;
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    // Forward then backward substitution.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    Some(x)
}

/// Orthonormal basis of span{vectors} by modified Gram-Schmidt; vectors with
/// residual norm below `tol` times their original norm are dropped.
pub fn orthonormal_span(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let scale0 = norm2(v);
        if scale0 == 0.0 {
            continue;
        }
        let mut u = v.clone();
        for b in &basis {
            let c = dot(&u, b);
            for (ui, bi) in u.iter_mut().zip(b) {
                *ui -= c * bi;
            }
        }
        // Second pass improves orthogonality for near-dependent inputs.
        for b in &basis {
            let c = dot(&u, b);
            for (ui, bi) in u.iter_mut().zip(b) {
                *ui -= c * bi;
            }
        }
        let n = norm2(&u);
        if n > tol * scale0 {
            basis.push(scale(&u, 1.0 / n));
        }
    }
    basis
}

/// Basis of the nullspace {x : A x = 0} via reduced row echelon form.
/// `a` is row-major with `cols` columns.
pub fn nullspace(a: &[Vec<f64>], cols: usize, tol: f64) -> Vec<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let rows = m.len();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        let pivot = (r..rows).max_by(|&i, &j| {
            m[i][c]
                .abs()
                .partial_cmp(&m[j][c].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let Some(p) = pivot else { break };
        let scale_row = m[p]
            .iter()
            .fold(0.0f64, |acc: f64, x: &f64| acc.max(x.abs()))
            .max(1.0);
        if m[p][c].abs() <= tol * scale_row {
            continue;
        }
        m.swap(r, p);
        let inv = 1.0 / m[r][c];
        for k in 0..cols {
            m[r][k] *= inv;
        }
        for i in 0..rows {
            if i != r && m[i][c] != 0.0 {
                let f = m[i][c];
                for k in 0..cols {
                    m[i][k] -= f * m[r][k];
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![0.0; cols];
        v[free] = 1.0;
        for (row, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -m[row][free];
        }
        basis.push(v);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_recovers_known_solution() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x_true = [1.5, -2.0];
        let b = vec![
            a[0][0] * x_true[0] + a[0][1] * x_true[1],
            a[1][0] * x_true[0] + a[1][1] * x_true[1],
        ];
        let x = solve(&a, &b).unwrap();
        assert!((x[0] - x_true[0]).abs() < 1e-12 && (x[1] - x_true[1]).abs() < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 1.0]]; // eigenvalues 3, -1
        assert!(cholesky_solve(&a, &[1.0, 1.0], 1e-300).is_none());
    }

    #[test]
    fn cholesky_solves_spd() {
        let a = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let x = cholesky_solve(&a, &[1.0, 2.0], 1e-300).unwrap();
        let r0 = 4.0 * x[0] + x[1] - 1.0;
        let r1 = x[0] + 3.0 * x[1] - 2.0;
        assert!(r0.abs() < 1e-12 && r1.abs() < 1e-12);
    }

    #[test]
    fn orthonormal_span_drops_dependent_vectors() {
        let vs = vec![
            vec![1.0, 0.0, 0.0],
            vec![2.0, 0.0, 0.0],
            vec![1.0, 1.0, 0.0],
        ];
        let b = orthonormal_span(&vs, 1e-10);
        assert_eq!(b.len(), 2);
        assert!((norm2(&b[0]) - 1.0).abs() < 1e-12);
        assert!(dot(&b[0], &b[1]).abs() < 1e-12);
    }

    #[test]
    fn nullspace_of_conservation_matrix() {
        // Gamma for A<->B as rows of A^T mu = y: matrix (d x R) = [[-1, 1], [1, -1]]
        let m = vec![vec![-1.0, 1.0], vec![1.0, -1.0]];
        let ns = nullspace(&m, 2, 1e-12);
        assert_eq!(ns.len(), 1);
        // Null vector proportional to (1, 1).
        let v = &ns[0];
        assert!((v[0] - v[1]).abs() < 1e-12, "null vector {v:?}");
    }
}
