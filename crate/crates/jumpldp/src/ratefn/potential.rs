//! Logarithmic potential lower bound on path costs.
//!
//! For a unit vector `n`, an anchor `x0` and a path `y` that keeps
//! `n . (y(t) - x0) > 0` on a window `[eps, T]`, the cost of the window is
//! bounded below by
//!
//! ```text
//! kappa [Phi(y(T)) - Phi(y(eps))]
//!     - sum_r int_eps^T lambda_r(y(t)) (exp(kappa gamma_r . grad Phi(y(t))) - 1) dt
//! ```
//!
//! with `Phi(x) = log(n . (x - x0))`, for any `kappa > 0`.  The bound follows
//! from evaluating the velocity cost's defining supremum at the single dual
//! point `theta = kappa grad Phi(y(t))` and integrating.  It is useful for
//! showing that paths approaching `x0` along `n` from outside pay at least a
//! logarithmically divergent price.

use crate::error::{Error, Result};
use crate::network::ReactionNetwork;
use crate::numeric::gauss::integrate;
use crate::numeric::linalg::{dot, sub};
use crate::path::MacroPath;

/// Evaluate the potential bound on the window `[eps, y.t_end()]`.
///
/// Errors when the window is empty or when `n . (y(t) - x0)` is not strictly
/// positive at a quadrature node (the potential is undefined there).
pub fn potential_lower_bound(
    net: &ReactionNetwork,
    y: &MacroPath,
    x0: &[f64],
    n: &[f64],
    kappa: f64,
    eps: f64,
) -> Result<f64> {
    if y.dim() != net.dim() || x0.len() != net.dim() || n.len() != net.dim() {
        return Err(Error::Invalid(format!(
            "potential_lower_bound: path, anchor and normal must have dimension {}",
            net.dim()
        )));
    }
    if !kappa.is_finite() || kappa <= 0.0 {
        return Err(Error::Invalid(
            "potential_lower_bound: kappa must be positive".into(),
        ));
    }
    let a = y.t_start().max(eps);
    let b = y.t_end();
    if !(a < b) {
        return Err(Error::Invalid(format!(
            "potential_lower_bound: empty window [{a}, {b}]"
        )));
    }
    let w = y.restrict(a, b)?;

    let phi_arg = |x: &[f64]| dot(n, &sub(x, x0));
    let s_start = phi_arg(&w.eval_segment(0, 0.0));
    let last = w.segment_count() - 1;
    let s_end = phi_arg(&w.eval_segment(last, w.segment_duration(last)));
    if s_start <= 0.0 || s_end <= 0.0 {
        return Err(Error::Invalid(
            "potential_lower_bound: n . (y(t) - x0) must stay positive".into(),
        ));
    }
    let boundary_term = kappa * (s_end.ln() - s_start.ln());

    let mut integral = 0.0;
    let mut first_err: Option<Error> = None;
    for seg in 0..w.segment_count() {
        let h = w.segment_duration(seg);
        integral += integrate(
            |u| {
                if first_err.is_some() {
                    return 0.0;
                }
                let x = w.eval_segment(seg, u);
                let s = phi_arg(&x);
                if s <= 0.0 {
                    first_err = Some(Error::Invalid(
                        "potential_lower_bound: n . (y(t) - x0) must stay positive".into(),
                    ));
                    return 0.0;
                }
                let rates = match net.macro_rates(&x) {
                    Ok(r) => r,
                    Err(e) => {
                        first_err = Some(e);
                        return 0.0;
                    }
                };
                let mut total = 0.0;
                for (r, &lam) in rates.iter().enumerate() {
                    if lam == 0.0 {
                        continue;
                    }
                    // theta . gamma_r with theta = kappa n / s.
                    let expo = kappa * dot(n, net.jump_f64(r)) / s;
                    total += lam * (expo.exp() - 1.0);
                }
                total
            },
            0.0,
            h,
            16,
        );
        if let Some(e) = first_err.take() {
            return Err(e);
        }
    }
    Ok(boundary_term - integral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::model::parse_model;
    use crate::ratefn::{path_action, QuadOpts};

    fn linear_birth() -> ReactionNetwork {
        parse_model(
            r#"{
                "name": "linear_birth",
                "species": ["A"],
                "reactions": [
                    {"in": {"A": 1}, "out": {"A": 2}, "rate": {"type": "mass_action", "k": 1.0}}
                ]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn formula_matches_a_direct_riemann_sum() {
        let net = linear_birth();
        let z = MacroPath::line(&[0.0], &[1.0], 0.0, 1.0).unwrap();
        let (kappa, eps) = (0.5, 0.2);
        let got = potential_lower_bound(&net, &z, &[0.0], &[1.0], kappa, eps).unwrap();
        // Phi = ln t along the path; integrand lambda (e^{kappa/t} - 1) = t (e^{kappa/t} - 1).
        let n = 200_000;
        let dt = (1.0 - eps) / n as f64;
        let mut integral = 0.0;
        for k in 0..n {
            let t = eps + (k as f64 + 0.5) * dt;
            integral += t * ((kappa / t).exp() - 1.0) * dt;
        }
        let expect = kappa * (1.0f64.ln() - eps.ln()) - integral;
        assert!(
            (got - expect).abs() < 1e-6 * (1.0 + expect.abs()),
            "bound {got} vs direct {expect}"
        );
    }

    #[test]
    fn bound_stays_below_the_action() {
        let net = linear_birth();
        let opts = QuadOpts::default();
        for slope in [0.7, 1.0, 1.6] {
            let z = MacroPath::line(&[0.1], &[slope], 0.0, 1.0).unwrap();
            let action = path_action(&net, &z, &opts).unwrap().value;
            for kappa in [0.1, 0.5, 1.0] {
                let b =
                    potential_lower_bound(&net, &z, &[0.0], &[1.0], kappa, 0.0).unwrap();
                assert!(
                    b <= action + 1e-9,
                    "slope {slope}, kappa {kappa}: bound {b} exceeds action {action}"
                );
            }
        }
    }

    #[test]
    fn nonpositive_potential_argument_is_rejected() {
        let net = linear_birth();
        let z = MacroPath::line(&[0.0], &[1.0], 0.0, 1.0).unwrap();
        // Anchor above the whole path: n . (y - x0) < 0 throughout.
        let e = potential_lower_bound(&net, &z, &[2.0], &[1.0], 0.5, 0.1).unwrap_err();
        assert!(e.to_string().contains("positive"), "got {e}");
    }
}
