//! Rate functionals for density-scaled jump processes.
//!
//! The local cost of moving with velocity `y` from state `x` is the convex
//! conjugate of the log moment generating function of the jump measure:
//!
//! ```text
//! l(x, y) = sup_theta  theta . y - sum_r lambda_r(x) (exp(theta . gamma_r) - 1)
//!         = inf { H(mu | lambda(x)) : mu >= 0, sum_r mu_r gamma_r = y }
//! ```
//!
//! where `H` is the relative entropy between jump intensity vectors:
//!
//! ```text
//! H(mu | lambda) = sum_r  lambda_r - mu_r + mu_r log(mu_r / lambda_r)
//! ```
//!
//! with the conventions `0 log 0 = 0` and `H = +inf` whenever some `mu_r > 0`
//! meets `lambda_r = 0`.  Path costs integrate these densities:
//!
//! * [`action::path_action`] computes `I(z) = int l(z(t), z'(t)) dt` for a
//!   piecewise linear path, with dyadic quadrature refinement near points
//!   where some rate vanishes.
//! * [`action::flux_action`] computes `J(w) = int H(w'(t) | lambda(z(t))) dt`
//!   for a cumulative flux path `w` whose induced state path is `z`.
//! * [`lagrangian::lagrangian`] solves the dual problem by Newton ascent with
//!   an exact feasibility pre-check, returning the optimizer pair
//!   `(theta*, mu*)`.
//! * [`duality::entropy_grid_min`] minimizes the entropy form directly on a
//!   zooming grid over the solution affine space, as an independent route to
//!   the same value.
//! * [`potential::potential_lower_bound`] evaluates a logarithmic potential
//!   cost bound along a path.

pub mod action;
pub mod duality;
pub mod lagrangian;
pub mod potential;

pub use action::{flux_action, induced_flux, path_action, ActionResult, QuadOpts};
pub use duality::{duality_check, entropy_grid_min, DualityReport};
pub use lagrangian::{
    dual_objective, lagrangian, lagrangian_from_log_rates, LagrangianResult, NewtonOpts,
};
pub use potential::potential_lower_bound;

/// Relative entropy `H(mu | lambda)` between nonnegative intensity vectors.
///
/// Conventions: a coordinate with `mu_r = 0` contributes `lambda_r`; a
/// coordinate with `mu_r > 0` and `lambda_r = 0` makes the whole sum `+inf`.
/// Negative entries in `mu` also yield `+inf` (they are outside the domain,
/// and `+inf` is the safe value for minimization).
pub fn entropy(mu: &[f64], lambda: &[f64]) -> f64 {
    assert_eq!(mu.len(), lambda.len(), "entropy: length mismatch");
    let mut h = 0.0;
    for (&m, &l) in mu.iter().zip(lambda) {
        if m < 0.0 {
            return f64::INFINITY;
        }
        if m == 0.0 {
            h += l;
        } else if l <= 0.0 {
            return f64::INFINITY;
        } else {
            h += l - m + m * (m / l).ln();
        }
    }
    h
}

/// Relative entropy with the reference intensities given in log form, so that
/// rates far below the smallest positive double still produce finite costs.
///
/// `log_lambda_r = -inf` encodes `lambda_r = 0`.
pub fn entropy_log(mu: &[f64], log_lambda: &[f64]) -> f64 {
    assert_eq!(mu.len(), log_lambda.len(), "entropy_log: length mismatch");
    let mut h = 0.0;
    for (&m, &ll) in mu.iter().zip(log_lambda) {
        if m < 0.0 {
            return f64::INFINITY;
        }
        if m == 0.0 {
            h += ll.exp();
        } else if ll == f64::NEG_INFINITY {
            return f64::INFINITY;
        } else {
            h += ll.exp() - m + m * (m.ln() - ll);
        }
    }
    h
}
