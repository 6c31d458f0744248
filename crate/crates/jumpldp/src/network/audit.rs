//! Rate-scaling audits: how close the microscopic rates are to their
//! macroscopic limits on a box, and the worst-case ratio between them.
//!
//! Both audits scan a regular grid over a box, snap each grid point to the
//! lattice at volume v (counts = round(v x)), and evaluate the microscopic
//! and macroscopic rates at the snapped point so the two sit at exactly the
//! same state.

use crate::error::{Error, Result};
use crate::network::{ReactionNetwork, ScaledState};
use crate::numeric::sample::linspace;

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub v: u64,
    /// sup over the grid of sum_r |Lambda^v_r - lambda_r|.
    pub sup_gap: f64,
    /// Grid point attaining the supremum.
    pub witness: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Gaps strictly decrease along the volume ladder; ladders that are
    /// already at zero gap (rates identical at every scale) pass vacuously.
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct AlephWitness {
    pub reaction: usize,
    pub counts: Vec<i64>,
}

#[derive(Debug, Clone)]
pub struct AlephReport {
    pub v: u64,
    /// min over grid points and reactions with Lambda^v_r > 0 of
    /// Lambda^v_r / lambda_r; +inf when no such point exists.
    pub min_ratio: f64,
    pub witness: Option<AlephWitness>,
}

/// Cartesian grid with `per_axis` points per axis over [lo, hi].
pub fn grid_points(lo: &[f64], hi: &[f64], per_axis: usize) -> Result<Vec<Vec<f64>>> {
    if lo.len() != hi.len() || lo.is_empty() {
        return Err(Error::Invalid("grid bounds must have equal nonzero dimension".into()));
    }
    if per_axis < 2 {
        return Err(Error::Invalid("grid needs at least two points per axis".into()));
    }
    if lo.iter().zip(hi).any(|(a, b)| !(a <= b)) {
        return Err(Error::Invalid("grid bounds must satisfy lo <= hi".into()));
    }
    let d = lo.len();
    let total = (per_axis as u64).checked_pow(d as u32);
    if total.is_none_or(|t| t > 2_000_000) {
        return Err(Error::Invalid(format!(
            "grid of {per_axis}^{d} points is too large"
        )));
    }
    let axes: Vec<Vec<f64>> = (0..d).map(|i| linspace(lo[i], hi[i], per_axis)).collect();
    let mut out = Vec::with_capacity(total.unwrap() as usize);
    let mut idx = vec![0usize; d];
    loop {
        out.push((0..d).map(|i| axes[i][idx[i]]).collect());
        let mut i = 0;
        loop {
            idx[i] += 1;
            if idx[i] < per_axis {
                break;
            }
            idx[i] = 0;
            i += 1;
            if i == d {
                return Ok(out);
            }
        }
    }
}

/// For each volume in the ladder, the largest total rate gap
/// sum_r |Lambda^v_r - lambda_r| over the snapped grid.
pub fn audit_rate_convergence(
    net: &ReactionNetwork,
    lo: &[f64],
    hi: &[f64],
    per_axis: usize,
    v_ladder: &[u64],
) -> Result<ConvergenceReport> {
    if v_ladder.len() < 2 {
        return Err(Error::Invalid("convergence audit needs at least two volumes".into()));
    }
    if v_ladder.iter().any(|&v| v == 0) {
        return Err(Error::Invalid("volumes must be positive".into()));
    }
    let grid = grid_points(lo, hi, per_axis)?;
    let mut rows = Vec::with_capacity(v_ladder.len());
    for &v in v_ladder {
        let mut sup = -1.0f64;
        let mut witness = grid[0].clone();
        for x in &grid {
            let state = ScaledState::from_concentrations(v, x);
            let snapped = state.concentrations();
            let mut gap = 0.0;
            for r in 0..net.n_reactions() {
                let micro = net.micro_rate(r, &state)?;
                let macr = net.macro_rate(r, &snapped)?;
                gap += (micro - macr).abs();
            }
            if gap > sup {
                sup = gap;
                witness = snapped;
            }
        }
        rows.push(ConvergenceRow {
            v,
            sup_gap: sup,
            witness,
        });
    }
    let scale = rows.iter().fold(0.0f64, |m, r| m.max(r.sup_gap));
    let tiny = 1e-14 * (1.0 + scale);
    let passed = rows.windows(2).all(|w| {
        w[1].sup_gap < w[0].sup_gap || (w[0].sup_gap <= tiny && w[1].sup_gap <= tiny)
    });
    Ok(ConvergenceReport { rows, passed })
}

/// Worst ratio Lambda^v_r / lambda_r over the snapped grid, restricted to
/// states where the microscopic rate is positive.
pub fn audit_aleph(
    net: &ReactionNetwork,
    lo: &[f64],
    hi: &[f64],
    per_axis: usize,
    v: u64,
) -> Result<AlephReport> {
    if v == 0 {
        return Err(Error::Invalid("volume must be positive".into()));
    }
    let grid = grid_points(lo, hi, per_axis)?;
    let mut min_ratio = f64::INFINITY;
    let mut witness = None;
    for x in &grid {
        let state = ScaledState::from_concentrations(v, x);
        let snapped = state.concentrations();
        for r in 0..net.n_reactions() {
            let micro = net.micro_rate(r, &state)?;
            if micro <= 0.0 {
                continue;
            }
            let macr = net.macro_rate(r, &snapped)?;
            let ratio = micro / macr;
            if ratio < min_ratio {
                min_ratio = ratio;
                witness = Some(AlephWitness {
                    reaction: r,
                    counts: state.counts.clone(),
                });
            }
        }
    }
    Ok(AlephReport {
        v,
        min_ratio,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{RateLaw, Reaction};

    fn mass(inputs: Vec<u64>, outputs: Vec<u64>, k: f64) -> Reaction {
        Reaction {
            inputs,
            outputs,
            rate: RateLaw::MassAction { k },
        }
    }

    fn dimer() -> ReactionNetwork {
        ReactionNetwork::new(
            "dimer".into(),
            vec!["A".into()],
            vec![mass(vec![2], vec![0], 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn quadratic_rates_converge_linearly_in_v() {
        // |ff(c,2)/v^2 - x^2| = x / v at x = c / v: halving grid gap per
        // decade of v, so the ladder strictly decreases.
        let rep =
            audit_rate_convergence(&dimer(), &[0.0], &[2.0], 21, &[10, 100, 1000]).unwrap();
        assert!(rep.passed, "{:?}", rep.rows);
        assert!((rep.rows[0].sup_gap - 0.2).abs() < 1e-12);
        assert!((rep.rows[1].sup_gap - 0.02).abs() < 1e-12);
        assert!((rep.rows[0].witness[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn linear_rates_pass_vacuously() {
        // Unary mass action: Lambda = k c / v = k x at lattice points up to
        // the rounding difference between k*(c/v) and (k*c)/v, so the gaps
        // sit at machine dust and the ladder passes vacuously.
        let net = ReactionNetwork::new(
            "linear".into(),
            vec!["A".into()],
            vec![mass(vec![1], vec![2], 1.5)],
        )
        .unwrap();
        let rep = audit_rate_convergence(&net, &[0.0], &[3.0], 13, &[10, 100]).unwrap();
        assert!(rep.passed);
        assert!(rep.rows.iter().all(|r| r.sup_gap <= 1e-14));
    }

    #[test]
    fn aleph_of_the_dimer_at_two_copies() {
        // At c = 2: Lambda = 2 * 1 / v^2 while lambda = 4 / v^2, ratio 1/2.
        let rep = audit_aleph(&dimer(), &[0.0], &[1.0], 11, 20).unwrap();
        assert!((rep.min_ratio - 0.5).abs() < 1e-12, "{}", rep.min_ratio);
        let w = rep.witness.unwrap();
        assert_eq!(w.counts, vec![2]);
        assert_eq!(w.reaction, 0);
    }

    #[test]
    fn aleph_with_no_active_states_is_infinite() {
        // On a box strictly below two copies the dimer never fires.
        let rep = audit_aleph(&dimer(), &[0.0], &[0.05], 6, 20).unwrap();
        assert!(rep.min_ratio.is_infinite());
        assert!(rep.witness.is_none());
    }
}
