//! Grid minimization of the entropy form, as an independent check of the
//! dual ascent.
//!
//! The velocity cost is also the value of the constrained problem
//!
//! ```text
//! min { H(mu | lambda) : mu >= 0, sum_r mu_r gamma_r = y }.
//! ```
//!
//! This module solves it without derivatives: the solution set of the
//! balance equations is an affine space `mu0 + span(N)` (particular solution
//! from a phase-1 simplex, `N` a nullspace basis of the jump matrix), and the
//! entropy is minimized by a zooming grid over the nullspace coordinates.
//! Candidates with a negative component are discarded, which restricts the
//! search to the true feasible polytope.  The method is slow and only
//! suitable for small reaction counts, which is exactly what makes it a
//! trustworthy cross-check for the Newton route.

use crate::error::{Error, Result};
use crate::network::ReactionNetwork;
use crate::numeric::linalg::{norm_inf, nullspace};
use crate::numeric::simplex::{solve_eq_form, LpOutcome};
use crate::ratefn::entropy_log;
use crate::ratefn::lagrangian::{lagrangian_from_log_rates, NewtonOpts};

/// Points per axis in each zoom round (odd, so the center is a node).
const GRID_POINTS: usize = 41;

/// Zoom rounds; each shrinks the window by 10x.
const ZOOM_ROUNDS: usize = 12;

/// Bounded number of window enlargements when the minimum sits on the edge.
const EDGE_RETRIES: usize = 6;

/// Comparison between the dual ascent value and the grid value.
#[derive(Debug, Clone)]
pub struct DualityReport {
    pub dual_value: f64,
    pub grid_value: f64,
    /// Absolute difference, 0 when both are infinite.
    pub gap: f64,
    pub feasible: bool,
}

/// Minimize `H(mu | lambda)` over `{mu >= 0 : sum_r mu_r gamma_r = y}` on a
/// zooming grid.  Returns `+inf` when the constraint set is empty.
///
/// Reactions with zero rate are pinned to `mu_r = 0` and zero-jump reactions
/// to `mu_r = lambda_r` (both are forced at any finite optimum), so the grid
/// only runs over the remaining coordinates.
pub fn entropy_grid_min(
    jumps: &[Vec<f64>],
    log_lambda: &[f64],
    y: &[f64],
) -> Result<f64> {
    let d = y.len();
    if jumps.len() != log_lambda.len() {
        return Err(Error::Invalid(
            "entropy_grid_min: one log rate per jump vector required".into(),
        ));
    }
    // Free coordinates: positive rate and a nonzero jump.
    let free: Vec<usize> = (0..jumps.len())
        .filter(|&r| log_lambda[r] > f64::NEG_INFINITY && jumps[r].iter().any(|&g| g != 0.0))
        .collect();
    let m = free.len();
    let a_mat: Vec<Vec<f64>> = (0..d)
        .map(|i| free.iter().map(|&r| jumps[r][i]).collect())
        .collect();
    let mu0 = match solve_eq_form(&a_mat, y, &vec![0.0; m]) {
        LpOutcome::Optimal { x, .. } => x,
        LpOutcome::Infeasible { .. } => return Ok(f64::INFINITY),
        LpOutcome::Unbounded => {
            return Err(Error::Numeric(
                "entropy_grid_min: feasibility program reported unbounded".into(),
            ))
        }
    };
    // Entropy restricted to the free coordinates plus the pinned constant:
    // zero-jump reactions sit at their rate (zero term) and dead reactions at
    // zero (term lambda = 0).
    let log_free: Vec<f64> = free.iter().map(|&r| log_lambda[r]).collect();
    let h_of = |mu_free: &[f64]| entropy_log(mu_free, &log_free);

    let basis = nullspace(&a_mat, m, 1e-10);
    let nu = basis.len();
    if nu == 0 {
        return Ok(h_of(&mu0));
    }
    if nu > 3 {
        return Err(Error::Invalid(format!(
            "entropy_grid_min: nullspace dimension {nu} exceeds the grid limit of 3"
        )));
    }

    let mu_at = |xi: &[f64]| -> Vec<f64> {
        let mut mu = mu0.clone();
        for (c, b) in xi.iter().zip(&basis) {
            for (m, bi) in mu.iter_mut().zip(b) {
                *m += c * bi;
            }
        }
        mu
    };

    let mut center = vec![0.0; nu];
    let mut width = 10.0 * (1.0 + norm_inf(&mu0));
    let mut best = h_of(&mu0);
    let mut retries = 0usize;
    let mut round = 0usize;

    while round < ZOOM_ROUNDS {
        // Scan the grid around the current center.
        let mut best_xi = center.clone();
        let mut best_h = f64::INFINITY;
        let mut on_edge = false;
        let npts = GRID_POINTS;
        let mut idx = vec![0usize; nu];
        loop {
            let xi: Vec<f64> = (0..nu)
                .map(|k| center[k] + width * (2.0 * idx[k] as f64 / (npts - 1) as f64 - 1.0))
                .collect();
            let h = h_of(&mu_at(&xi));
            if h < best_h {
                best_h = h;
                best_xi = xi;
                on_edge = idx.iter().any(|&i| i == 0 || i == npts - 1);
            }
            // Odometer increment over the nu-dimensional grid.
            let mut k = 0;
            loop {
                if k == nu {
                    break;
                }
                idx[k] += 1;
                if idx[k] < npts {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == nu {
                break;
            }
        }
        if best_h.is_finite() {
            best = best.min(best_h);
        }
        if on_edge && retries < EDGE_RETRIES {
            // The optimum may sit outside the window: enlarge and rescan.
            width *= 4.0;
            center = best_xi;
            retries += 1;
            continue;
        }
        center = best_xi;
        width /= 10.0;
        round += 1;
    }
    Ok(best)
}

/// Run both routes to the velocity cost and report the gap.
pub fn duality_check(net: &ReactionNetwork, x: &[f64], y: &[f64]) -> Result<DualityReport> {
    let log_lambda = net.log_macro_rates_checked(x)?;
    let dual = lagrangian_from_log_rates(net.jumps_f64(), &log_lambda, y, &NewtonOpts::default())?;
    let grid = entropy_grid_min(net.jumps_f64(), &log_lambda, y)?;
    let gap = if dual.value == f64::INFINITY && grid == f64::INFINITY {
        0.0
    } else {
        (dual.value - grid).abs()
    };
    Ok(DualityReport {
        dual_value: dual.value,
        grid_value: grid,
        gap,
        feasible: dual.feasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::model::parse_model;

    #[test]
    fn unique_solution_needs_no_grid() {
        // One jump +1: mu is determined, H is the 1-d closed form.
        let jumps = vec![vec![1.0]];
        let log_lambda = vec![0.0];
        let h = entropy_grid_min(&jumps, &log_lambda, &[2.0]).unwrap();
        let expect = 1.0 - 2.0 + 2.0 * 2.0f64.ln();
        assert!((h - expect).abs() < 1e-12, "{h} vs {expect}");
    }

    #[test]
    fn infeasible_velocity_is_infinite() {
        let jumps = vec![vec![1.0]];
        let log_lambda = vec![0.0];
        let h = entropy_grid_min(&jumps, &log_lambda, &[-1.0]).unwrap();
        assert_eq!(h, f64::INFINITY);
    }

    #[test]
    fn grid_agrees_with_newton_on_a_reversible_pair() {
        // Jumps +1 and -1 leave a one-dimensional family mu0 + t (1, 1).
        let net = parse_model(
            r#"{
                "name": "pm",
                "species": ["A"],
                "reactions": [
                    {"in": {}, "out": {"A": 1}, "rate": {"type": "mass_action", "k": 1.5}},
                    {"in": {"A": 1}, "out": {}, "rate": {"type": "mass_action", "k": 1.0}}
                ]
            }"#,
        )
        .unwrap();
        for y in [0.0, 0.4, -0.7, 2.0] {
            let rep = duality_check(&net, &[0.8], &[y]).unwrap();
            assert!(rep.feasible);
            assert!(
                rep.gap <= 1e-6 * (1.0 + rep.dual_value.abs()),
                "y = {y}: dual {} vs grid {}",
                rep.dual_value,
                rep.grid_value
            );
        }
    }

    #[test]
    fn grid_agrees_in_two_dimensions() {
        let net = parse_model(
            r#"{
                "name": "tri",
                "species": ["A", "B"],
                "reactions": [
                    {"in": {"A": 1}, "out": {"B": 1}, "rate": {"type": "mass_action", "k": 1.0}},
                    {"in": {"B": 1}, "out": {"A": 1}, "rate": {"type": "mass_action", "k": 0.5}},
                    {"in": {}, "out": {"A": 1}, "rate": {"type": "mass_action", "k": 2.0}}
                ]
            }"#,
        )
        .unwrap();
        let x = [0.6, 0.4];
        for y in [[0.1, 0.2], [0.5, -0.1], [-0.2, 0.3]] {
            let rep = duality_check(&net, &x, &y).unwrap();
            assert!(rep.feasible, "y = {y:?}");
            assert!(
                rep.gap <= 1e-6 * (1.0 + rep.dual_value.abs()),
                "y = {y:?}: dual {} vs grid {}",
                rep.dual_value,
                rep.grid_value
            );
        }
    }

    #[test]
    fn both_routes_agree_on_infeasibility() {
        let net = parse_model(
            r#"{
                "name": "up",
                "species": ["A"],
                "reactions": [
                    {"in": {}, "out": {"A": 1}, "rate": {"type": "mass_action", "k": 1.0}}
                ]
            }"#,
        )
        .unwrap();
        let rep = duality_check(&net, &[0.5], &[-1.0]).unwrap();
        assert!(!rep.feasible);
        assert_eq!(rep.dual_value, f64::INFINITY);
        assert_eq!(rep.grid_value, f64::INFINITY);
        assert_eq!(rep.gap, 0.0);
    }
}
