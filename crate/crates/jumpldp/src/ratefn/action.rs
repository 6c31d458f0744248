//! Path and flux action integrals.
//!
//! For a piecewise linear path `z` the action is
//!
//! ```text
//! I(z) = int l(z(t), z'(t)) dt
//! ```
//!
//! integrated segment by segment with a fixed Gauss rule.  When some reaction
//! rate is close to zero at a segment endpoint the integrand can blow up
//! logarithmically (or worse) at that endpoint, so the quadrature switches to
//! dyadic refinement toward it; an integrand still growing at the depth cap
//! is reported through the `growing` flag (the true integral may be `+inf`).
//!
//! All quadrature nodes are placed by segment-local arithmetic (offsets from
//! the segment start computed from the duration only), so translating a path
//! in time reproduces the action bit for bit whenever the segment durations
//! are unchanged by the shift.
//!
//! The flux form replaces the velocity cost with the relative entropy of the
//! flux derivative: for a cumulative flux path `w` (one nondecreasing
//! coordinate per reaction) with state path `z(t) = z(0) + Gamma (w(t) - w(0))`,
//!
//! ```text
//! J(z, w) = int H(w'(t) | lambda(z(t))) dt
//! ```
//!
//! [`flux_action`] checks the compatibility relation `z' = Gamma w'` instead
//! of trusting it, and [`induced_flux`] builds the optimal flux for a given
//! state path on a dense grid, so that `J` of the result reproduces `I`.

use crate::error::{Error, Result};
use crate::network::ReactionNetwork;
use crate::numeric::gauss::{integrate_refined, normalize_points, Refined};
use crate::path::MacroPath;
use crate::ratefn::lagrangian::{lagrangian_from_log_rates, NewtonOpts};
use crate::ratefn::entropy_log;

/// Relative slack allowed between `z'` and `Gamma w'` on each flux segment.
const FLUX_MATCH_TOL: f64 = 1e-8;

/// Quadrature and solver options for action integrals.
#[derive(Debug, Clone)]
pub struct QuadOpts {
    /// Gauss points per panel (4, 8 or 16).
    pub points: usize,
    /// Refine toward a segment endpoint when some rate there is below this.
    pub refine_trigger: f64,
    /// Dyadic refinement depth.
    pub max_levels: usize,
    /// Options for the pointwise dual solves.
    pub newton: NewtonOpts,
}

impl Default for QuadOpts {
    fn default() -> Self {
        QuadOpts {
            points: 16,
            refine_trigger: 1e-3,
            max_levels: 12,
            newton: NewtonOpts::default(),
        }
    }
}

/// Outcome of an action integral.
#[derive(Debug, Clone)]
pub struct ActionResult {
    /// Total action; `+inf` when some quadrature node had an unreachable
    /// velocity.
    pub value: f64,
    /// Contribution of each (merged, for the flux form) segment.
    pub per_segment: Vec<f64>,
    /// True when refinement hit its depth cap with the integrand still
    /// growing; the reported value is then a lower bound of a possibly
    /// divergent integral.
    pub growing: bool,
    /// Time of the first quadrature node whose velocity was infeasible.
    pub infeasible_at: Option<f64>,
}

fn min_rate(net: &ReactionNetwork, x: &[f64]) -> Result<f64> {
    let rates = net.macro_rates(x)?;
    Ok(rates.iter().fold(f64::INFINITY, |m, r| m.min(*r)))
}

/// Integrate the velocity cost along a piecewise linear path.
pub fn path_action(net: &ReactionNetwork, z: &MacroPath, opts: &QuadOpts) -> Result<ActionResult> {
    if z.dim() != net.dim() {
        return Err(Error::Invalid(format!(
            "path_action: path dimension {} does not match the {} species",
            z.dim(),
            net.dim()
        )));
    }
    let points = normalize_points(opts.points);
    let mut per_segment = Vec::with_capacity(z.segment_count());
    let mut growing = false;
    let mut infeasible_at: Option<f64> = None;
    let mut first_err: Option<Error> = None;

    for seg in 0..z.segment_count() {
        let h = z.segment_duration(seg);
        let slope = z.slope(seg);
        let t0 = z.times()[seg];
        let toward_a = min_rate(net, &z.eval_segment(seg, 0.0))? < opts.refine_trigger;
        let toward_b = min_rate(net, &z.eval_segment(seg, h))? < opts.refine_trigger;

        let mut integrand = |u: f64| -> f64 {
            if first_err.is_some() {
                return 0.0;
            }
            let x = z.eval_segment(seg, u);
            let log_lambda = match net.log_macro_rates_checked(&x) {
                Ok(l) => l,
                Err(e) => {
                    first_err = Some(e);
                    return 0.0;
                }
            };
            match lagrangian_from_log_rates(net.jumps_f64(), &log_lambda, &slope, &opts.newton) {
                Ok(r) => {
                    if !r.feasible && infeasible_at.is_none() {
                        infeasible_at = Some(t0 + u);
                    }
                    r.value
                }
                Err(e) => {
                    first_err = Some(e);
                    0.0
                }
            }
        };

        let r: Refined = integrate_refined(
            &mut integrand,
            0.0,
            h,
            toward_a,
            toward_b,
            points,
            opts.max_levels,
        );
        if let Some(e) = first_err.take() {
            return Err(e);
        }
        growing |= r.growing;
        per_segment.push(r.value);
    }
    let value = per_segment.iter().sum();
    Ok(ActionResult {
        value,
        per_segment,
        growing,
        infeasible_at,
    })
}

/// Merge the breakpoint times of two paths over their common span.
fn merged_times(z: &MacroPath, w: &MacroPath) -> Result<Vec<f64>> {
    let span = (z.t_end() - z.t_start()).abs().max(1.0);
    if (z.t_start() - w.t_start()).abs() > 1e-9 * span
        || (z.t_end() - w.t_end()).abs() > 1e-9 * span
    {
        return Err(Error::Invalid(format!(
            "flux_action: time ranges differ ([{}, {}] vs [{}, {}])",
            z.t_start(),
            z.t_end(),
            w.t_start(),
            w.t_end()
        )));
    }
    let mut times: Vec<f64> = z.times().iter().chain(w.times()).copied().collect();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * span);
    Ok(times)
}

/// Integrate the flux entropy cost `H(w' | lambda(z))` for a flux path `w`
/// consistent with the state path `z`.
pub fn flux_action(
    net: &ReactionNetwork,
    z: &MacroPath,
    w: &MacroPath,
    opts: &QuadOpts,
) -> Result<ActionResult> {
    if z.dim() != net.dim() {
        return Err(Error::Invalid(format!(
            "flux_action: state path dimension {} does not match the {} species",
            z.dim(),
            net.dim()
        )));
    }
    if w.dim() != net.n_reactions() {
        return Err(Error::Invalid(format!(
            "flux_action: flux path dimension {} does not match the {} reactions",
            w.dim(),
            net.n_reactions()
        )));
    }
    let times = merged_times(z, w)?;
    let points = normalize_points(opts.points);
    let mut per_segment = Vec::new();
    let mut growing = false;
    let mut infeasible_at: Option<f64> = None;
    let mut first_err: Option<Error> = None;

    for k in 0..times.len() - 1 {
        let (a, b) = (times[k], times[k + 1]);
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        let zseg = z.locate_segment(mid);
        let wseg = w.locate_segment(mid);
        let zdot = z.slope(zseg);
        let mut wdot = w.slope(wseg);
        let scale = 1.0 + wdot.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (r, v) in wdot.iter_mut().enumerate() {
            if *v < 0.0 {
                if *v < -1e-9 * scale {
                    return Err(Error::Invalid(format!(
                        "flux_action: flux coordinate {r} decreases at rate {v} near t = {mid}"
                    )));
                }
                *v = 0.0;
            }
        }
        // z' must equal Gamma w' on the segment.
        let tol = FLUX_MATCH_TOL
            * (1.0
                + zdot.iter().fold(0.0f64, |m, v| m.max(v.abs()))
                + wdot.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        for i in 0..net.dim() {
            let flow: f64 = (0..net.n_reactions())
                .map(|r| wdot[r] * net.jump_f64(r)[i])
                .sum();
            if (flow - zdot[i]).abs() > tol {
                return Err(Error::Invalid(format!(
                    "flux_action: state and flux derivatives disagree in coordinate {i} \
                     near t = {mid} (|z' - Gamma w'| = {:.3e})",
                    (flow - zdot[i]).abs()
                )));
            }
        }

        // Offsets within the z segment, kept segment-local.
        let z_off = a - z.times()[zseg];
        let toward_a = min_rate(net, &z.eval_segment(zseg, z_off))? < opts.refine_trigger;
        let toward_b = min_rate(net, &z.eval_segment(zseg, z_off + (b - a)))? < opts.refine_trigger;

        let mut integrand = |u: f64| -> f64 {
            if first_err.is_some() {
                return 0.0;
            }
            let x = z.eval_segment(zseg, z_off + u);
            let log_lambda = match net.log_macro_rates_checked(&x) {
                Ok(l) => l,
                Err(e) => {
                    first_err = Some(e);
                    return 0.0;
                }
            };
            let h = entropy_log(&wdot, &log_lambda);
            if h == f64::INFINITY && infeasible_at.is_none() {
                infeasible_at = Some(a + u);
            }
            h
        };
        let r = integrate_refined(
            &mut integrand,
            0.0,
            b - a,
            toward_a,
            toward_b,
            points,
            opts.max_levels,
        );
        if let Some(e) = first_err.take() {
            return Err(e);
        }
        growing |= r.growing;
        per_segment.push(r.value);
    }
    let value = per_segment.iter().sum();
    Ok(ActionResult {
        value,
        per_segment,
        growing,
        infeasible_at,
    })
}

/// Build the optimal cumulative flux for a state path on a dense grid.
///
/// Each path segment is cut into `ceil(duration * per_unit)` pieces; on each
/// piece the optimal intensities `mu*` at the midpoint state drive the flux,
/// so the returned pair `(z_dense, w)` satisfies `z_dense' = Gamma w'`
/// exactly and `flux_action(z_dense, w)` reproduces `path_action(z)` up to
/// `O(1 / per_unit^2)`.
pub fn induced_flux(
    net: &ReactionNetwork,
    z: &MacroPath,
    per_unit: f64,
    opts: &QuadOpts,
) -> Result<(MacroPath, MacroPath)> {
    if z.dim() != net.dim() {
        return Err(Error::Invalid(format!(
            "induced_flux: path dimension {} does not match the {} species",
            z.dim(),
            net.dim()
        )));
    }
    if !(per_unit > 0.0) {
        return Err(Error::Invalid(
            "induced_flux: subdivision density must be positive".into(),
        ));
    }
    let nr = net.n_reactions();
    let mut times = vec![z.t_start()];
    let mut zpts = vec![z.eval_segment(0, 0.0)];
    let mut wpts = vec![vec![0.0; nr]];

    for seg in 0..z.segment_count() {
        let h = z.segment_duration(seg);
        let slope = z.slope(seg);
        let t0 = z.times()[seg];
        let n = (h * per_unit).ceil().max(1.0) as usize;
        let du = h / n as f64;
        for k in 0..n {
            let mid = (k as f64 + 0.5) * du;
            let x = z.eval_segment(seg, mid);
            let log_lambda = net.log_macro_rates_checked(&x)?;
            let sol = lagrangian_from_log_rates(net.jumps_f64(), &log_lambda, &slope, &opts.newton)?;
            let mu = sol.mu_star.ok_or_else(|| {
                Error::Invalid(format!(
                    "induced_flux: velocity is unreachable at t = {}",
                    t0 + mid
                ))
            })?;
            let last_w = wpts.last().unwrap().clone();
            let last_z = zpts.last().unwrap().clone();
            let w_next: Vec<f64> = last_w.iter().zip(&mu).map(|(w, m)| w + m * du).collect();
            let z_next: Vec<f64> = (0..net.dim())
                .map(|i| {
                    last_z[i]
                        + du * (0..nr).map(|r| mu[r] * net.jump_f64(r)[i]).sum::<f64>()
                })
                .collect();
            times.push(t0 + (k as f64 + 1.0) * du);
            wpts.push(w_next);
            zpts.push(z_next);
        }
    }
    let zd = MacroPath::new(times.clone(), zpts)?;
    let w = MacroPath::new(times, wpts)?;
    Ok((zd, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::model::parse_model;

    fn constant_birth() -> ReactionNetwork {
        parse_model(
            r#"{
                "name": "const_birth",
                "species": ["A"],
                "reactions": [
                    {"in": {}, "out": {"A": 1}, "rate": {"type": "mass_action", "k": 1.0}}
                ]
            }"#,
        )
        .unwrap()
    }

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
    fn drift_paths_cost_nothing() {
        // Unit rate, unit slope: the path follows the fluid limit.
        let net = constant_birth();
        let z = MacroPath::line(&[0.2], &[1.0], 0.0, 1.0).unwrap();
        let r = path_action(&net, &z, &QuadOpts::default()).unwrap();
        assert!(r.value.abs() < 1e-12, "drift action = {}", r.value);
        assert!(!r.growing);
        assert!(r.infeasible_at.is_none());
    }

    #[test]
    fn constant_rate_closed_form() {
        // lambda = 1, slope 2 on [0, 1]: l = 2 ln 2 - 1 per unit time.
        let net = constant_birth();
        let z = MacroPath::line(&[0.0], &[2.0], 0.0, 1.0).unwrap();
        let r = path_action(&net, &z, &QuadOpts::default()).unwrap();
        let expect = 2.0 * 2.0f64.ln() - 1.0;
        assert!(
            (r.value - expect).abs() < 1e-12,
            "action {} vs {expect}",
            r.value
        );
    }

    #[test]
    fn integrable_boundary_singularity() {
        // lambda(x) = x along z(t) = t: the integrand ln(1/t) - 1 + t has an
        // integrable log singularity at t = 0 and integral 1/2 on [0, 1].
        let net = linear_birth();
        let z = MacroPath::line(&[0.0], &[1.0], 0.0, 1.0).unwrap();
        let r = path_action(&net, &z, &QuadOpts::default()).unwrap();
        assert!(!r.growing, "log singularity is integrable");
        assert!(
            (r.value - 0.5).abs() < 1e-6,
            "action {} vs 1/2",
            r.value
        );
    }

    #[test]
    fn divergent_singularity_reports_growth() {
        // lambda(x) = exp(-1/x) along z(t) = t: the integrand behaves like
        // 1/t near zero, which diverges.
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
        let z = MacroPath::line(&[0.0], &[1.0], 0.0, 0.3).unwrap();
        let r = path_action(&net, &z, &QuadOpts::default()).unwrap();
        assert!(r.growing, "1/t tail must be flagged");
        assert!(r.value > 7.0, "truncated tail is large, got {}", r.value);
    }

    #[test]
    fn infeasible_velocity_gives_infinite_action() {
        // Only +1 jumps exist, so a decreasing path is unreachable.
        let net = constant_birth();
        let z = MacroPath::line(&[1.0], &[-1.0], 0.0, 1.0).unwrap();
        let r = path_action(&net, &z, &QuadOpts::default()).unwrap();
        assert_eq!(r.value, f64::INFINITY);
        let t = r.infeasible_at.expect("infeasible node must be recorded");
        assert!((0.0..=1.0).contains(&t));
    }

    #[test]
    fn action_is_invariant_under_dyadic_time_shifts() {
        let net = linear_birth();
        let z = MacroPath::new(
            vec![0.0, 0.5, 1.0],
            vec![vec![0.25], vec![0.75], vec![1.5]],
        )
        .unwrap();
        let shifted = z.translate(4.0);
        let a = path_action(&net, &z, &QuadOpts::default()).unwrap();
        let b = path_action(&net, &shifted, &QuadOpts::default()).unwrap();
        assert_eq!(a.value, b.value, "segment-local nodes shift exactly");
    }

    #[test]
    fn flux_action_matches_entropy_of_declared_flux() {
        // Two opposing unit-rate reactions; constant flux derivative (2, 1)
        // moves the state at speed 1 and costs H((2,1) | (1,1)) per unit time.
        let net = parse_model(
            r#"{
                "name": "pm",
                "species": ["A"],
                "reactions": [
                    {"in": {}, "out": {"A": 1}, "rate": {"type": "mass_action", "k": 1.0}},
                    {"in": {"A": 1}, "out": {}, "rate": {"type": "expr", "formula": "1"}}
                ]
            }"#,
        )
        .unwrap();
        let z = MacroPath::line(&[0.5], &[1.0], 0.0, 1.0).unwrap();
        let w = MacroPath::new(vec![0.0, 1.0], vec![vec![0.0, 0.0], vec![2.0, 1.0]]).unwrap();
        let r = flux_action(&net, &z, &w, &QuadOpts::default()).unwrap();
        let expect = crate::ratefn::entropy(&[2.0, 1.0], &[1.0, 1.0]);
        assert!(
            (r.value - expect).abs() < 1e-12,
            "flux action {} vs {expect}",
            r.value
        );
    }

    #[test]
    fn inconsistent_flux_is_rejected() {
        let net = constant_birth();
        let z = MacroPath::line(&[0.0], &[1.0], 0.0, 1.0).unwrap();
        // Declared flux moves mass twice as fast as the state path.
        let w = MacroPath::new(vec![0.0, 1.0], vec![vec![0.0], vec![2.0]]).unwrap();
        let e = flux_action(&net, &z, &w, &QuadOpts::default()).unwrap_err();
        assert!(e.to_string().contains("disagree"), "got {e}");
    }

    #[test]
    fn decreasing_flux_is_rejected() {
        let net = constant_birth();
        let z = MacroPath::line(&[1.0], &[0.0], 0.0, 1.0).unwrap();
        let w = MacroPath::new(vec![0.0, 1.0], vec![vec![1.0], vec![0.0]]).unwrap();
        let e = flux_action(&net, &z, &w, &QuadOpts::default()).unwrap_err();
        assert!(e.to_string().contains("decreases"), "got {e}");
    }

    #[test]
    fn induced_flux_reproduces_the_path_action() {
        // Interior path for a reversible pair: the optimal flux splits the
        // velocity across both reactions and its entropy cost equals the
        // velocity cost.
        let net = parse_model(
            r#"{
                "name": "flip",
                "species": ["A", "B"],
                "reactions": [
                    {"in": {"A": 1}, "out": {"B": 1}, "rate": {"type": "mass_action", "k": 1.0}},
                    {"in": {"B": 1}, "out": {"A": 1}, "rate": {"type": "mass_action", "k": 1.0}}
                ]
            }"#,
        )
        .unwrap();
        let z = MacroPath::new(
            vec![0.0, 0.5, 1.0],
            vec![vec![0.7, 0.3], vec![0.5, 0.5], vec![0.6, 0.4]],
        )
        .unwrap();
        let opts = QuadOpts::default();
        let i = path_action(&net, &z, &opts).unwrap();
        let (zd, w) = induced_flux(&net, &z, 2000.0, &opts).unwrap();
        let j = flux_action(&net, &zd, &w, &opts).unwrap();
        assert!(
            (i.value - j.value).abs() < 1e-6,
            "I = {} vs J = {}",
            i.value,
            j.value
        );
    }
}
