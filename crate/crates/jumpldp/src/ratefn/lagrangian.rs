//! Pointwise velocity cost by convex duality.
//!
//! For fixed rates `lambda` and jumps `gamma_r`, the cost of velocity `y` is
//!
//! ```text
//! l(y) = sup_theta f(theta),   f(theta) = theta . y - sum_r lambda_r (exp(theta . gamma_r) - 1)
//! ```
//!
//! `f` is smooth and concave with gradient `y - sum_r mu_r(theta) gamma_r`
//! where `mu_r(theta) = lambda_r exp(theta . gamma_r)`.  The solver:
//!
//! 1. decides feasibility exactly first: `l(y) < inf` iff `y` is a
//!    nonnegative combination of the jumps with positive rate, which a
//!    phase-1 simplex answers; an infeasible `y` comes back with a Farkas
//!    direction `theta` satisfying `theta . gamma_r <= 0 < theta . y`, along
//!    which `f` grows without bound;
//! 2. restricts `theta` to the span of the active jump directions
//!    (components orthogonal to every jump only add a linear term that
//!    feasibility already rules on), working in an orthonormal basis of that
//!    span;
//! 3. runs damped Newton ascent from `theta = 0` with an Armijo condition,
//!    falling back to steepest ascent with an expanding step search whenever
//!    the Hessian is numerically singular (which happens when all `mu_r`
//!    underflow, e.g. rates like `exp(-1/x)` near the boundary);
//! 4. stops on a small gradient, or on a 3-fold value plateau for suprema
//!    that are approached but not attained (boundary velocities).
//!
//! Rates enter in log form so that rates below the smallest positive double
//! still yield correct (large but finite) costs.

use crate::error::{Error, Result};
use crate::network::ReactionNetwork;
use crate::numeric::linalg::{axpy, cholesky_solve, dot, norm_inf, orthonormal_span};
use crate::numeric::simplex::{solve_eq_form, LpOutcome};

/// Exponent above which `exp` overflows to infinity; candidate points beyond
/// it evaluate to `-inf` and are rejected by the line searches.
const EXP_OVERFLOW: f64 = 709.0;

/// Armijo sufficient-increase fraction for the Newton backtracking search.
const ARMIJO_SLOPE: f64 = 1e-4;

/// Options for the dual ascent.
#[derive(Debug, Clone)]
pub struct NewtonOpts {
    /// Gradient tolerance; convergence requires
    /// `max_i |grad_i| <= tol * max(1, max_i |y_i|)`.
    pub tol: f64,
    /// Iteration cap; hitting it is reported as non-convergence.
    pub max_iters: usize,
}

impl Default for NewtonOpts {
    fn default() -> Self {
        NewtonOpts {
            tol: 1e-10,
            max_iters: 200,
        }
    }
}

/// Outcome of one pointwise cost evaluation.
#[derive(Debug, Clone)]
pub struct LagrangianResult {
    /// The cost `l(y)`; `+inf` when `y` is not reachable.
    pub value: f64,
    /// Feasible case: the dual maximizer, restricted to the span of the
    /// active jumps.  Infeasible case: a direction with
    /// `theta . gamma_r <= 0 < theta . y` along which the objective diverges.
    pub theta_star: Option<Vec<f64>>,
    /// Optimal jump intensities `mu_r = lambda_r exp(theta* . gamma_r)`,
    /// absent when infeasible.  Satisfies `sum_r mu_r gamma_r = y` up to the
    /// gradient tolerance.
    pub mu_star: Option<Vec<f64>>,
    pub feasible: bool,
    /// Ascent steps taken (0 when `theta = 0` is already optimal).
    pub newton_iters: usize,
}

/// The dual objective `f(theta)` in full state-space coordinates, with rates
/// given as logs.  Returns `-inf` when some exponent overflows.
pub fn dual_objective(
    jumps: &[Vec<f64>],
    log_lambda: &[f64],
    y: &[f64],
    theta: &[f64],
) -> f64 {
    let mut f = dot(theta, y);
    for (gamma, &ll) in jumps.iter().zip(log_lambda) {
        if ll == f64::NEG_INFINITY {
            continue;
        }
        let a = ll + dot(gamma, theta);
        if a > EXP_OVERFLOW {
            return f64::NEG_INFINITY;
        }
        f -= a.exp() - ll.exp();
    }
    f
}

/// Velocity cost at a network state: rates are evaluated at `x` and the dual
/// problem is solved for velocity `y`.
pub fn lagrangian(
    net: &ReactionNetwork,
    x: &[f64],
    y: &[f64],
    opts: &NewtonOpts,
) -> Result<LagrangianResult> {
    if x.len() != net.dim() || y.len() != net.dim() {
        return Err(Error::Invalid(format!(
            "lagrangian: state/velocity must have dimension {}",
            net.dim()
        )));
    }
    let log_lambda = net.log_macro_rates_checked(x)?;
    lagrangian_from_log_rates(net.jumps_f64(), &log_lambda, y, opts)
}

/// Velocity cost for explicit jump vectors and log rates.
pub fn lagrangian_from_log_rates(
    jumps: &[Vec<f64>],
    log_lambda: &[f64],
    y: &[f64],
    opts: &NewtonOpts,
) -> Result<LagrangianResult> {
    let d = y.len();
    if jumps.len() != log_lambda.len() {
        return Err(Error::Invalid(
            "lagrangian: one log rate per jump vector required".into(),
        ));
    }
    if jumps.iter().any(|g| g.len() != d) {
        return Err(Error::Invalid(
            "lagrangian: jump vectors must match the velocity dimension".into(),
        ));
    }
    if log_lambda.iter().any(|l| l.is_nan()) || log_lambda.iter().any(|l| *l == f64::INFINITY) {
        return Err(Error::Invalid(
            "lagrangian: log rates must be finite or -inf".into(),
        ));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("lagrangian: velocity must be finite".into()));
    }

    let active: Vec<usize> = (0..jumps.len())
        .filter(|&r| log_lambda[r] > f64::NEG_INFINITY)
        .collect();

    // Feasibility: does some mu >= 0, supported on the active reactions,
    // satisfy sum_r mu_r gamma_r = y?  Zero-jump columns cannot help and are
    // left out of the program.
    let lp_cols: Vec<usize> = active
        .iter()
        .copied()
        .filter(|&r| jumps[r].iter().any(|&g| g != 0.0))
        .collect();
    let a_mat: Vec<Vec<f64>> = (0..d)
        .map(|i| lp_cols.iter().map(|&r| jumps[r][i]).collect())
        .collect();
    match solve_eq_form(&a_mat, y, &vec![0.0; lp_cols.len()]) {
        LpOutcome::Optimal { .. } => {}
        LpOutcome::Infeasible { certificate } => {
            return Ok(LagrangianResult {
                value: f64::INFINITY,
                theta_star: Some(certificate),
                mu_star: None,
                feasible: false,
                newton_iters: 0,
            });
        }
        LpOutcome::Unbounded => {
            return Err(Error::Numeric(
                "lagrangian: feasibility program reported unbounded".into(),
            ));
        }
    }

    // Orthonormal basis of span{gamma_r : r active}; the ascent runs in these
    // coordinates.
    let active_jumps: Vec<Vec<f64>> = active.iter().map(|&r| jumps[r].clone()).collect();
    let basis = orthonormal_span(&active_jumps, 1e-12);
    let m = basis.len();

    let build_result = |c: &[f64], mu_active: &[f64], value: f64, iters: usize| {
        let mut theta = vec![0.0; d];
        for (ci, b) in c.iter().zip(&basis) {
            for (t, bi) in theta.iter_mut().zip(b) {
                *t += ci * bi;
            }
        }
        let mut mu = vec![0.0; jumps.len()];
        for (&r, &mr) in active.iter().zip(mu_active) {
            mu[r] = mr;
        }
        LagrangianResult {
            value,
            theta_star: Some(theta),
            mu_star: Some(mu),
            feasible: true,
            newton_iters: iters,
        }
    };

    if m == 0 {
        // Every active jump is zero: theta = 0 is optimal and each active
        // intensity stays at its rate.
        let mu_active: Vec<f64> = active.iter().map(|&r| log_lambda[r].exp()).collect();
        return Ok(build_result(&[], &mu_active, 0.0, 0));
    }

    let y_red: Vec<f64> = basis.iter().map(|b| dot(b, y)).collect();
    let gamma_red: Vec<Vec<f64>> = active
        .iter()
        .map(|&r| basis.iter().map(|b| dot(b, &jumps[r])).collect())
        .collect();
    let log_active: Vec<f64> = active.iter().map(|&r| log_lambda[r]).collect();

    let f_of = |c: &[f64]| -> f64 {
        let mut f = dot(c, &y_red);
        for (g, &ll) in gamma_red.iter().zip(&log_active) {
            let a = ll + dot(g, c);
            if a > EXP_OVERFLOW {
                return f64::NEG_INFINITY;
            }
            f -= a.exp() - ll.exp();
        }
        f
    };
    let mu_of = |c: &[f64]| -> Vec<f64> {
        gamma_red
            .iter()
            .zip(&log_active)
            .map(|(g, &ll)| (ll + dot(g, c)).exp())
            .collect()
    };

    let grad_tol = opts.tol * norm_inf(y).max(1.0);
    let mut c = vec![0.0; m];
    let mut f = f_of(&c);
    let mut iters = 0usize;
    let mut plateau = 0usize;

    loop {
        let mu_active = mu_of(&c);
        let mut g = y_red.clone();
        for (gr, &mr) in gamma_red.iter().zip(&mu_active) {
            for (gi, gri) in g.iter_mut().zip(gr) {
                *gi -= mr * gri;
            }
        }
        if norm_inf(&g) <= grad_tol {
            return Ok(build_result(&c, &mu_active, f, iters));
        }
        if plateau >= 3 {
            // The value has stalled at working precision while the gradient
            // is still visible: the supremum is approached along a ray
            // (velocity on the boundary of the reachable cone).
            return Ok(build_result(&c, &mu_active, f, iters));
        }
        if iters >= opts.max_iters {
            return Err(Error::NonConvergence(format!(
                "lagrangian: dual ascent did not converge in {} iterations \
                 (|grad| = {:.3e}, tol = {:.3e})",
                opts.max_iters,
                norm_inf(&g),
                grad_tol
            )));
        }
        iters += 1;

        let mut stepped = false;
        let mut f_new = f;

        // Newton direction from the (negated, positive semidefinite) Hessian
        // sum_r mu_r gamma_r gamma_r^T.
        let mut hess = vec![vec![0.0; m]; m];
        for (gr, &mr) in gamma_red.iter().zip(&mu_active) {
            for i in 0..m {
                for j in 0..m {
                    hess[i][j] += mr * gr[i] * gr[j];
                }
            }
        }
        if let Some(s) = cholesky_solve(&hess, &g, 1e-300) {
            let slope = dot(&g, &s);
            if slope > 0.0 && s.iter().all(|v| v.is_finite()) {
                let mut alpha = 1.0;
                for _ in 0..60 {
                    let cand = axpy(&c, alpha, &s);
                    let fc = f_of(&cand);
                    if fc.is_finite() && fc >= f + ARMIJO_SLOPE * alpha * slope {
                        c = cand;
                        f_new = fc;
                        stepped = true;
                        break;
                    }
                    alpha *= 0.5;
                }
            }
        }

        if !stepped {
            // Steepest ascent.  The initial step has unit length; while the
            // value keeps improving the step doubles, which crosses the long
            // flat stretches that occur when every mu_r underflows.
            let s = g.clone();
            let alpha0 = 1.0 / dot(&s, &s).sqrt().max(1e-300);
            let f1 = f_of(&axpy(&c, alpha0, &s));
            if f1 > f && f1.is_finite() {
                let mut best_a = alpha0;
                let mut best_f = f1;
                for _ in 0..200 {
                    let f2 = f_of(&axpy(&c, best_a * 2.0, &s));
                    if f2 > best_f && f2.is_finite() {
                        best_a *= 2.0;
                        best_f = f2;
                    } else {
                        break;
                    }
                }
                c = axpy(&c, best_a, &s);
                f_new = best_f;
                stepped = true;
            } else {
                let mut alpha = alpha0 * 0.5;
                for _ in 0..120 {
                    let cand = axpy(&c, alpha, &s);
                    let fc = f_of(&cand);
                    if fc > f && fc.is_finite() {
                        c = cand;
                        f_new = fc;
                        stepped = true;
                        break;
                    }
                    alpha *= 0.5;
                }
            }
        }

        if !stepped {
            // No tested step improves the value: rounding floor.
            plateau = 3;
        } else if (f_new - f).abs() <= 1e-15 * (1.0 + f.abs()) {
            plateau += 1;
            f = f_new;
        } else {
            plateau = 0;
            f = f_new;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::model::parse_model;
    use crate::ratefn::entropy_log;

    fn birth_net() -> ReactionNetwork {
        parse_model(
            r#"{
                "name": "birth",
                "species": ["A"],
                "reactions": [
                    {"in": {"A": 1}, "out": {"A": 2}, "rate": {"type": "mass_action", "k": 1.0}}
                ]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn one_dimensional_closed_form() {
        // Single jump +1 at rate lambda: l(y) = y ln(y/lambda) - y + lambda.
        let net = birth_net();
        let opts = NewtonOpts::default();
        for (x, y) in [(1.0, 2.0), (1.0, 0.5), (0.3, 1.7), (2.5, 0.01)] {
            let r = lagrangian(&net, &[x], &[y], &opts).unwrap();
            let lambda = x;
            let expect = y * (y / lambda).ln() - y + lambda;
            assert!(r.feasible);
            assert!(
                (r.value - expect).abs() <= 1e-9 * (1.0 + expect.abs()),
                "l({x}, {y}) = {}, want {expect}",
                r.value
            );
            let mu = r.mu_star.unwrap();
            assert!((mu[0] - y).abs() <= 1e-8 * (1.0 + y.abs()), "mu* = {}", mu[0]);
        }
    }

    #[test]
    fn zero_cost_exactly_at_the_drift() {
        let net = parse_model(
            r#"{
                "name": "dimer",
                "species": ["A", "B"],
                "reactions": [
                    {"in": {"A": 2}, "out": {"B": 1}, "rate": {"type": "mass_action", "k": 1.0}},
                    {"in": {"B": 1}, "out": {"A": 2}, "rate": {"type": "mass_action", "k": 0.7}}
                ]
            }"#,
        )
        .unwrap();
        let x = [0.8, 0.3];
        let drift = net.drift(&x).unwrap();
        let opts = NewtonOpts::default();
        let r = lagrangian(&net, &x, &drift, &opts).unwrap();
        assert!(r.feasible);
        assert!(r.value.abs() <= 1e-12, "l(x, drift) = {}", r.value);
        assert_eq!(r.newton_iters, 0, "theta = 0 is already optimal");

        let off = [drift[0] + 0.4, drift[1] - 0.2];
        let r2 = lagrangian(&net, &x, &off, &opts).unwrap();
        assert!(r2.value > 1e-3, "off-drift velocity must cost, got {}", r2.value);
    }

    #[test]
    fn optimizer_invariants_hold() {
        // Gamma mu* = y and value = H(mu* | lambda) within the stated slack.
        let net = parse_model(
            r#"{
                "name": "pair",
                "species": ["A", "B"],
                "reactions": [
                    {"in": {"A": 1}, "out": {"B": 1}, "rate": {"type": "mass_action", "k": 1.0}},
                    {"in": {"B": 1}, "out": {"A": 1}, "rate": {"type": "mass_action", "k": 1.0}},
                    {"in": {}, "out": {"A": 1, "B": 1}, "rate": {"type": "mass_action", "k": 0.5}}
                ]
            }"#,
        )
        .unwrap();
        let x = [0.6, 0.4];
        let log_lambda = net.log_macro_rates_checked(&x).unwrap();
        let opts = NewtonOpts::default();
        for y in [[0.2, 0.1], [0.5, 0.5], [-0.3, 0.4], [0.9, 1.4]] {
            let r = lagrangian(&net, &x, &y, &opts).unwrap();
            assert!(r.feasible, "y = {y:?} should be reachable");
            let mu = r.mu_star.clone().unwrap();
            let ynorm = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for i in 0..2 {
                let flow: f64 = (0..3).map(|r| mu[r] * net.jump_f64(r)[i]).sum();
                assert!(
                    (flow - y[i]).abs() <= 1e-8 * (1.0 + ynorm),
                    "balance residual {} in coordinate {i} for y = {y:?}",
                    flow - y[i]
                );
            }
            let h = entropy_log(&mu, &log_lambda);
            assert!(
                (r.value - h).abs() <= 1e-8 * (1.0 + r.value.abs()),
                "dual value {} vs entropy {h}",
                r.value
            );
        }
    }

    #[test]
    fn infeasible_velocity_gets_a_certificate() {
        // Only jump is +1, so negative velocities are unreachable.
        let net = birth_net();
        let r = lagrangian(&net, &[1.0], &[-1.0], &NewtonOpts::default()).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.value, f64::INFINITY);
        assert!(r.mu_star.is_none());
        let cert = r.theta_star.unwrap();
        assert!(cert[0] * 1.0 <= 1e-9, "cert . gamma <= 0");
        assert!(cert[0] * -1.0 > 0.0, "cert . y > 0");
    }

    #[test]
    fn boundary_velocity_plateaus_at_the_infimum() {
        // Velocity 0 with a single +1 jump: the supremum sum(lambda) is
        // approached as theta -> -inf but never attained.
        let net = birth_net();
        let r = lagrangian(&net, &[1.0], &[0.0], &NewtonOpts::default()).unwrap();
        assert!(r.feasible);
        assert!(
            (r.value - 1.0).abs() < 1e-6,
            "l(1, 0) should approach lambda = 1, got {}",
            r.value
        );
    }

    #[test]
    fn deep_underflow_rates_are_handled() {
        // lambda = exp(-1/x) at x = 1e-6 has log rate -1e6; the cost of
        // velocity 1 is y (ln y - log lambda) - y + lambda = 1e6 - 1.
        let net = parse_model(
            r#"{
                "name": "vanish",
                "species": ["A"],
                "reactions": [
                    {"in": {}, "out": {"A": 1}, "rate": {"type": "expr", "formula": "exp(-1 / x[A])"}}
                ]
            }"#,
        )
        .unwrap();
        let r = lagrangian(&net, &[1e-6], &[1.0], &NewtonOpts::default()).unwrap();
        assert!(r.feasible);
        let expect = 1e6 - 1.0;
        assert!(
            (r.value - expect).abs() <= 1e-9 * expect,
            "cost {} vs {expect}",
            r.value
        );
        let mu = r.mu_star.unwrap();
        assert!((mu[0] - 1.0).abs() <= 1e-7, "mu* = {}", mu[0]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let jumps = vec![vec![1.0, 0.0], vec![-1.0, 1.0], vec![0.0, -1.0]];
        let log_lambda = vec![0.2f64.ln(), 1.3f64.ln(), 0.8f64.ln()];
        let y = [0.4, -0.1];
        let theta = [0.3, -0.7];
        // Analytic gradient: y_i - sum_r mu_r gamma_ri.
        let mu: Vec<f64> = jumps
            .iter()
            .zip(&log_lambda)
            .map(|(g, ll)| (ll + g[0] * theta[0] + g[1] * theta[1]).exp())
            .collect();
        for i in 0..2 {
            let grad = y[i]
                - jumps
                    .iter()
                    .zip(&mu)
                    .map(|(g, m)| m * g[i])
                    .sum::<f64>();
            let h = 1e-6;
            let mut tp = theta.to_vec();
            let mut tm = theta.to_vec();
            tp[i] += h;
            tm[i] -= h;
            let fd = (dual_objective(&jumps, &log_lambda, &y, &tp)
                - dual_objective(&jumps, &log_lambda, &y, &tm))
                / (2.0 * h);
            assert!(
                (grad - fd).abs() <= 1e-6 * (1.0 + grad.abs()),
                "coordinate {i}: analytic {grad} vs fd {fd}"
            );
        }
    }

    #[test]
    fn off_span_velocity_component_is_infeasible() {
        // Jumps span only the first axis; any second component is unreachable.
        let jumps = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
        let log_lambda = vec![0.0, 0.0];
        let r = lagrangian_from_log_rates(&jumps, &log_lambda, &[0.3, 0.5], &NewtonOpts::default())
            .unwrap();
        assert!(!r.feasible);
        assert_eq!(r.value, f64::INFINITY);
    }
}
