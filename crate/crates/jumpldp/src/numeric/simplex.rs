//! Dense two-phase simplex with Bland's pivoting rule.
//!
//! The linear programs solved here are tiny (tens of variables at most):
//! feasibility of `Gamma mu = y, mu >= 0`, escape-direction checks over a
//! probability simplex, and coordinate bounds over halfspace polytopes.
//! Bland's rule makes termination unconditional, which matters because the
//! feasibility problems are routinely degenerate. Infeasible problems come
//! back with a Farkas certificate so callers can report a separating vector
//! instead of a bare failure.

/// Entries this close to zero are treated as zero during pivoting.
pub const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub enum LpOutcome {
    /// Minimizer and objective value.
    Optimal { x: Vec<f64>, value: f64 },
    /// Certificate `pi` with `pi . b > 0` and `pi . A_j <= 0` for every
    /// column j (rows in the caller's original orientation).
    Infeasible { certificate: Vec<f64> },
    Unbounded,
}

struct Tableau {
    /// Row-major body, one extra trailing column for the right-hand side.
    rows: Vec<Vec<f64>>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn rhs_col(&self) -> usize {
        self.ncols
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = 1.0 / self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v *= inv;
        }
        for r in 0..self.rows.len() {
            if r != row {
                let f = self.rows[r][col];
                if f != 0.0 {
                    for k in 0..=self.ncols {
                        let delta = f * self.rows[row][k];
                        self.rows[r][k] -= delta;
                    }
                    self.rows[r][col] = 0.0;
                }
            }
        }
        let f = self.cost[col];
        if f != 0.0 {
            for k in 0..=self.ncols {
                self.cost[k] -= f * self.rows[row][k];
            }
            self.cost[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Bland: entering = lowest-index negative reduced cost, leaving = the
    /// minimum-ratio row, ties broken by lowest basis index. `limit` caps
    /// which columns may enter (used to keep artificials out in phase two).
    fn run(&mut self, limit: usize) -> Result<(), ()> {
        loop {
            let enter = (0..limit).find(|&j| self.cost[j] < -PIVOT_TOL);
            let Some(j) = enter else { return Ok(()) };
            let rhs = self.rhs_col();
            let mut leave: Option<usize> = None;
            let mut best = f64::INFINITY;
            for i in 0..self.rows.len() {
                let a = self.rows[i][j];
                if a > PIVOT_TOL {
                    let ratio = self.rows[i][rhs] / a;
                    let better = ratio < best - PIVOT_TOL
                        || (ratio < best + PIVOT_TOL
                            && leave.is_some_and(|l| self.basis[i] < self.basis[l]));
                    if better {
                        best = ratio;
                        leave = Some(i);
                    }
                }
            }
            match leave {
                Some(i) => self.pivot(i, j),
                None => return Err(()),
            }
        }
    }
}

/// Minimize `c . x` subject to `A x = b`, `x >= 0`.
pub fn solve_eq_form(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> LpOutcome {
    let m = b.len();
    let n = c.len();
    debug_assert!(a.iter().all(|row| row.len() == n));
    let ncols = n + m;
    let mut rows = Vec::with_capacity(m);
    let mut flipped = vec![false; m];
    for i in 0..m {
        let mut row = vec![0.0; ncols + 1];
        let s = if b[i] < 0.0 {
            flipped[i] = true;
            -1.0
        } else {
            1.0
        };
        for j in 0..n {
            row[j] = s * a[i][j];
        }
        row[n + i] = 1.0;
        row[ncols] = s * b[i];
        rows.push(row);
    }
    // Phase-one cost: sum of artificials, expressed with basis columns
    // eliminated so the row holds true reduced costs.
    let mut cost = vec![0.0; ncols + 1];
    for j in 0..n {
        cost[j] = -rows.iter().map(|r| r[j]).sum::<f64>();
    }
    cost[ncols] = -rows.iter().map(|r| r[ncols]).sum::<f64>();
    let mut t = Tableau {
        rows,
        cost,
        basis: (n..ncols).collect(),
        ncols,
    };
    if t.run(n).is_err() {
        // Phase one is bounded below by zero; a failed ratio test here means
        // numerical breakdown, reported as infeasible with a zero certificate.
        return LpOutcome::Infeasible {
            certificate: vec![0.0; m],
        };
    }
    let scale = 1.0 + b.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if -t.cost[ncols] > PIVOT_TOL * scale {
        // Infeasible. Phase-one duals pi_i satisfy
        // reduced_cost(artificial_i) = 1 - pi_i.
        let mut cert = vec![0.0; m];
        for i in 0..m {
            let pi = 1.0 - t.cost[n + i];
            cert[i] = if flipped[i] { -pi } else { pi };
        }
        return LpOutcome::Infeasible { certificate: cert };
    }
    // Drive artificials out of the basis; rows where no structural column
    // can pivot are redundant and dropped.
    let mut keep = vec![true; t.rows.len()];
    for i in 0..t.rows.len() {
        if t.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t.rows[i][j].abs() > PIVOT_TOL) {
                t.pivot(i, j);
            } else {
                keep[i] = false;
            }
        }
    }
    let mut idx = 0;
    t.rows.retain(|_| {
        idx += 1;
        keep[idx - 1]
    });
    let mut idx = 0;
    t.basis.retain(|_| {
        idx += 1;
        keep[idx - 1]
    });
    // Phase-two cost row for the real objective.
    let mut cost = vec![0.0; ncols + 1];
    cost[..n].copy_from_slice(c);
    for (i, &bi) in t.basis.iter().enumerate() {
        let f = cost[bi];
        if f != 0.0 {
            for k in 0..=ncols {
                cost[k] -= f * t.rows[i][k];
            }
            cost[bi] = 0.0;
        }
    }
    t.cost = cost;
    if t.run(n).is_err() {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    let rhs = t.rhs_col();
    for (i, &bi) in t.basis.iter().enumerate() {
        if bi < n {
            x[bi] = t.rows[i][rhs].max(0.0);
        }
    }
    let value = -t.cost[ncols];
    LpOutcome::Optimal { x, value }
}

/// Minimize `c . x` subject to `A x <= b` with x unrestricted in sign,
/// via the split x = xp - xn plus one slack per row.
pub fn solve_ineq_free(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> LpOutcome {
    let m = b.len();
    let n = c.len();
    let cols = 2 * n + m;
    let mut a_eq = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = vec![0.0; cols];
        for j in 0..n {
            row[j] = a[i][j];
            row[n + j] = -a[i][j];
        }
        row[2 * n + i] = 1.0;
        a_eq.push(row);
    }
    let mut c_eq = vec![0.0; cols];
    for j in 0..n {
        c_eq[j] = c[j];
        c_eq[n + j] = -c[j];
    }
    match solve_eq_form(&a_eq, b, &c_eq) {
        LpOutcome::Optimal { x, value } => {
            let xs = (0..n).map(|j| x[j] - x[n + j]).collect();
            LpOutcome::Optimal { x: xs, value }
        }
        other => other,
    }
}
