//! The boundary-escape shift: perturb a path away from degenerate
//! boundaries so that its cost can be controlled.
//!
//! Given a segmentation of the path over the cover, a small linear excursion
//! is inserted at the start of every span whose region touches the boundary:
//! the path pauses its own motion and moves along the region's escape
//! direction `w` for a duration that grows geometrically with the span index
//! (length `beta^k * t_delta` at span `k`, `beta = 3 / kappa_dblprime`).
//! Interior spans insert nothing. After all insertions the path is truncated
//! back to the original horizon.
//!
//! The sizes are chosen from the target distance `delta`:
//!
//! ```text
//! xi      = min(1, (kappa_dblprime / 3)^(J+1) / 3, eps)     J = span count
//! t_delta = (1/6) * xi * min(delta, omega_inv(delta))
//! ```
//!
//! where `omega_inv` is the inverse modulus of continuity of the path. The
//! derived tolerances `delta_prime = kappa_minus * t_delta / 3` and
//! `delta_dblprime = kappa_dblprime * t_delta` satisfy
//! `delta_dblprime < delta_prime <= delta / 3`.
//!
//! `verify_breakup` then certifies the three geometric properties the
//! construction is designed for: the shifted path stays within `2 delta / 3`
//! of the original, it clears every boundary facet by `kappa_minus * t_delta`
//! from time `t_delta` on, and each inserted excursion decomposes as
//! `beta^k * t_delta * w` with `w` in the escape cone of its region.

use crate::error::{Error, Result};
use crate::numeric::linalg::sub;
use crate::path::MacroPath;
use crate::pathlab::cover::Cover;
use crate::pathlab::segment::segment_path;

/// Absolute slack for the geometric certificates.
const CHECK_SLACK: f64 = 1e-9;

/// One span of the shift construction.
#[derive(Debug, Clone)]
pub struct ShiftSpan {
    /// Region id assigned to the span.
    pub region: usize,
    /// Span of the original path, in original time.
    pub t_in: f64,
    pub t_out: f64,
    /// Inserted excursion duration (0 for interior regions).
    pub shift_len: f64,
    /// Escape direction used for the excursion.
    pub w: Vec<f64>,
    /// Cumulative spatial offset in effect after this span's excursion.
    pub offset: Vec<f64>,
    /// Time on the shifted clock at which this span's excursion begins.
    pub shifted_start: f64,
}

/// Sizes and bookkeeping of one shift construction.
#[derive(Debug, Clone)]
pub struct ShiftPlan {
    pub delta: f64,
    pub xi: f64,
    pub beta: f64,
    pub t_delta: f64,
    pub delta_prime: f64,
    pub delta_dblprime: f64,
    pub spans: Vec<ShiftSpan>,
    /// Nominal cumulative shift times: entry k is `t_delta * sum of beta^l
    /// for l < k`, built by the exact recurrence, for k = 0..=J.
    pub cum_shifts: Vec<f64>,
    /// Actually inserted time (interior spans insert nothing).
    pub total_inserted: f64,
    /// Whether the built path had to be truncated back to the horizon.
    pub truncated: bool,
}

impl ShiftPlan {
    /// Transition times of the underlying segmentation (J + 1 values).
    pub fn transition_times(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = self.spans.iter().map(|s| s.t_in).collect();
        if let Some(last) = self.spans.last() {
            ts.push(last.t_out);
        }
        ts
    }

    pub fn region_ids(&self) -> Vec<usize> {
        self.spans.iter().map(|s| s.region).collect()
    }
}

/// Build the shifted path for a target distance `delta`.
///
/// Fails when the shifted path leaves the union of the regions (checked at
/// the breakpoints and segment midpoints of the built path); the error
/// reports the first failing time so the caller can retry with a smaller
/// `delta`.
pub fn build_shifted_path(
    z: &MacroPath,
    cover: &Cover,
    delta: f64,
) -> Result<(ShiftPlan, MacroPath)> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Invalid(format!("delta must be positive, got {delta}")));
    }
    let spans = segment_path(cover, z)?;
    let j_count = spans.len();
    let kdd = cover.kappa_dblprime;
    let xi = 1.0f64
        .min((kdd / 3.0).powi(j_count as i32 + 1) / 3.0)
        .min(cover.eps);
    let t_delta = xi / 6.0 * delta.min(z.modulus_inverse(delta));
    let beta = 3.0 / kdd;
    let delta_prime = cover.kappa_minus() * t_delta / 3.0;
    let delta_dblprime = kdd * t_delta;
    debug_assert!(delta_dblprime < delta_prime && delta_prime <= delta / 3.0);

    // Nominal cumulative shift times by the exact recurrence.
    let mut cum_shifts = Vec::with_capacity(j_count + 1);
    cum_shifts.push(0.0);
    for k in 0..j_count {
        cum_shifts.push(cum_shifts[k] + beta.powi(k as i32) * t_delta);
    }

    let dim = z.dim();
    let mut times: Vec<f64> = vec![z.t_start()];
    let mut points: Vec<Vec<f64>> = vec![z.points()[0].clone()];
    let mut inserted = 0.0f64; // actual inserted time so far
    let mut offset = vec![0.0f64; dim]; // actual spatial offset so far
    let mut shift_spans = Vec::with_capacity(j_count);
    for (k, span) in spans.iter().enumerate() {
        let region = cover.region(span.region);
        let boundary = !region.boundary.is_empty();
        let shift_len = if boundary {
            beta.powi(k as i32) * t_delta
        } else {
            0.0
        };
        let shifted_start = span.t_in + inserted;
        if boundary {
            // Pause the original motion and move along w; the previous
            // breakpoint is the excursion start, so appending the end point
            // creates the excursion segment.
            inserted += shift_len;
            for (o, wi) in offset.iter_mut().zip(&region.w) {
                *o += shift_len * wi;
            }
            let start = z.eval(span.t_in);
            times.push(span.t_in + inserted);
            points.push(start.iter().zip(&offset).map(|(x, o)| x + o).collect());
        }
        shift_spans.push(ShiftSpan {
            region: span.region,
            t_in: span.t_in,
            t_out: span.t_out,
            shift_len,
            w: region.w.clone(),
            offset: offset.clone(),
            shifted_start,
        });
        // Original breakpoints strictly inside the span, then the span end.
        for (t, p) in z.times().iter().zip(z.points()) {
            if *t > span.t_in && *t < span.t_out {
                times.push(t + inserted);
                points.push(p.iter().zip(&offset).map(|(x, o)| x + o).collect());
            }
        }
        let end = z.eval(span.t_out);
        times.push(span.t_out + inserted);
        points.push(end.iter().zip(&offset).map(|(x, o)| x + o).collect());
    }
    let extended = MacroPath::new(times, points)?;

    // The excursions must not leave the covered set; sampled at breakpoints
    // and segment midpoints (regions are convex, segments are short).
    for i in 0..extended.segment_count() {
        let h = extended.segment_duration(i);
        for u in [0.0, 0.5 * h, h] {
            let x = extended.eval_segment(i, u);
            if cover.locate(&x).is_none() {
                let t = extended.times()[i] + u;
                return Err(Error::Cover(format!(
                    "shifted path leaves the covered set at time {t} (point {x:?}); \
                     reduce delta"
                )));
            }
        }
    }

    let truncated = inserted > 0.0;
    let shifted = if truncated {
        extended.restrict(z.t_start(), z.t_end())?
    } else {
        extended
    };
    let plan = ShiftPlan {
        delta,
        xi,
        beta,
        t_delta,
        delta_prime,
        delta_dblprime,
        spans: shift_spans,
        cum_shifts,
        total_inserted: inserted,
        truncated,
    };
    Ok((plan, shifted))
}

/// Geometric certificate for one shift construction.
#[derive(Debug, Clone)]
pub struct BreakupReport {
    /// Uniform distance between the original and the shifted path.
    pub sup_distance: f64,
    /// Required strict bound `2 delta / 3`.
    pub sup_bound: f64,
    pub sup_ok: bool,
    /// Smallest signed distance of the shifted path to any boundary facet
    /// over times `>= t_delta` (infinite when the cover has none).
    pub min_clearance: f64,
    /// Required clearance `kappa_minus * t_delta`.
    pub clearance_threshold: f64,
    pub clearance_ok: bool,
    /// First time at which the clearance requirement fails, if any.
    pub first_violation: Option<f64>,
    /// Largest deviation of an excursion direction from its region's escape
    /// vector, over inserted excursions (0 when there are none).
    pub cone_max_deviation: f64,
    /// Required bound `kappa_dblprime / 2` on that deviation.
    pub cone_bound: f64,
    pub cone_ok: bool,
    pub truncated: bool,
    pub passed: bool,
}

/// Check the three guarantees of the shift construction on a built path.
///
/// * sup-distance: `sup |z - shifted| < 2 delta / 3`;
/// * clearance: from `t_delta` on, the shifted path keeps a signed distance
///   of at least `kappa_minus * t_delta` to every boundary facet half-space
///   (exact for piecewise-linear paths: evaluated at breakpoints plus the
///   window endpoints);
/// * cone decomposition: every inserted excursion, measured on the built
///   path as `shifted(excursion end) - z(span start)` net of earlier
///   offsets, points within `kappa_dblprime / 2` of its region's escape
///   direction after normalizing by the excursion length.
pub fn verify_breakup(
    z: &MacroPath,
    shifted: &MacroPath,
    plan: &ShiftPlan,
    cover: &Cover,
) -> Result<BreakupReport> {
    let sup = z.sup_distance(shifted)?;
    let sup_bound = 2.0 * plan.delta / 3.0;
    let sup_ok = sup < sup_bound;

    // Clearance over [t_delta, T]: the distance to a half-space is affine
    // along each path segment, so the minimum over the window is attained
    // at a breakpoint or a window endpoint.
    let t_lo = plan.t_delta.max(shifted.t_start());
    let t_hi = shifted.t_end();
    let threshold = cover.kappa_minus() * plan.t_delta;
    let mut min_clearance = f64::INFINITY;
    let mut first_violation = None;
    let mut eval_times: Vec<f64> = vec![t_lo];
    eval_times.extend(shifted.times().iter().copied().filter(|&t| t > t_lo && t < t_hi));
    eval_times.push(t_hi);
    for t in eval_times {
        let x = shifted.eval(t);
        let mut worst = f64::INFINITY;
        for region in cover.regions() {
            for &i in &region.boundary {
                worst = worst.min(region.facet_distance(i, &x));
            }
        }
        if worst < min_clearance {
            min_clearance = worst;
        }
        if worst < threshold - CHECK_SLACK && first_violation.is_none() {
            first_violation = Some(t);
        }
    }
    let clearance_ok = first_violation.is_none();

    // Cone decomposition of the inserted excursions.
    let mut cone_max_deviation = 0.0f64;
    let mut prev_offset = vec![0.0f64; z.dim()];
    for span in &plan.spans {
        if span.shift_len > 0.0 {
            let end_time = span.shifted_start + span.shift_len;
            // Truncation can cut the final excursion; fall back to the
            // construction offsets there.
            let u = if end_time <= shifted.t_end() {
                sub(&shifted.eval(end_time), &z.eval(span.t_in))
            } else {
                span.offset.clone()
            };
            let dev: f64 = u
                .iter()
                .zip(&prev_offset)
                .zip(&span.w)
                .map(|((ui, oi), wi)| {
                    let dir = (ui - oi) / span.shift_len;
                    (dir - wi) * (dir - wi)
                })
                .sum::<f64>()
                .sqrt();
            cone_max_deviation = cone_max_deviation.max(dev);
        }
        prev_offset = span.offset.clone();
    }
    let cone_bound = cover.kappa_dblprime / 2.0;
    let cone_ok = cone_max_deviation <= cone_bound + CHECK_SLACK;

    Ok(BreakupReport {
        sup_distance: sup,
        sup_bound,
        sup_ok,
        min_clearance,
        clearance_threshold: threshold,
        clearance_ok,
        first_violation,
        cone_max_deviation,
        cone_bound,
        cone_ok,
        truncated: plan.truncated,
        passed: sup_ok && clearance_ok && cone_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::model::parse_model;
    use crate::network::ReactionNetwork;

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

    fn interval_cover(net: &ReactionNetwork) -> Cover {
        Cover::parse(
            r#"{
                "regions": [
                    {
                        "halfspaces": [{"a": [-1.0], "b": 0.0}, {"a": [1.0], "b": 0.5}],
                        "boundary": [0],
                        "w": [1.0],
                        "kappa": 0.9,
                        "escape": [0]
                    },
                    {
                        "halfspaces": [{"a": [-1.0], "b": -0.25}, {"a": [1.0], "b": 2.0}],
                        "boundary": [],
                        "w": [0.0],
                        "kappa": 0.5,
                        "escape": []
                    }
                ],
                "eps": 0.5, "eps_prime": 0.3, "eps_dblprime": 0.25, "kappa_dblprime": 0.25
            }"#,
            net,
        )
        .unwrap()
    }

    #[test]
    fn constant_boundary_path_gets_a_linear_ramp() {
        let net = birth_net();
        let cover = interval_cover(&net);
        let z = MacroPath::constant(&[0.0], 0.0, 1.0).unwrap();
        let delta = 0.1;
        let (plan, shifted) = build_shifted_path(&z, &cover, delta).unwrap();
        // One span in region 0; constant path has omega_inv = T = 1.
        assert_eq!(plan.region_ids(), vec![0]);
        let kdd: f64 = 0.25;
        let xi = ((kdd / 3.0).powi(2) / 3.0).min(0.5).min(1.0);
        let t_delta = xi / 6.0 * delta.min(1.0);
        assert!((plan.t_delta - t_delta).abs() < 1e-15);
        // Ramp up at speed 1 until t_delta, then constant at t_delta.
        assert!((shifted.eval(plan.t_delta)[0] - plan.t_delta).abs() < 1e-15);
        assert!((shifted.eval(0.5 * plan.t_delta)[0] - 0.5 * plan.t_delta).abs() < 1e-15);
        assert!((shifted.eval(1.0)[0] - plan.t_delta).abs() < 1e-15);
        assert!(plan.truncated);

        let report = verify_breakup(&z, &shifted, &plan, &cover).unwrap();
        assert!(report.passed, "{report:?}");
        assert!((report.sup_distance - plan.t_delta).abs() < 1e-15);
        // The ramp reaches clearance t_delta at time t_delta and keeps it.
        assert!((report.min_clearance - plan.t_delta).abs() < 1e-15);
        assert!(report.cone_max_deviation == 0.0);
    }

    #[test]
    fn interior_paths_are_returned_bit_identical() {
        let net = birth_net();
        let cover = interval_cover(&net);
        let z = MacroPath::new(vec![0.0, 1.0], vec![vec![0.3], vec![1.5]]).unwrap();
        let (plan, shifted) = build_shifted_path(&z, &cover, 0.05).unwrap();
        assert_eq!(plan.total_inserted, 0.0);
        assert!(!plan.truncated);
        assert_eq!(shifted.times(), z.times());
        assert_eq!(shifted.points(), z.points());
        let report = verify_breakup(&z, &shifted, &plan, &cover).unwrap();
        assert!(report.passed, "{report:?}");
        assert_eq!(report.sup_distance, 0.0);
    }

    #[test]
    fn second_excursion_is_beta_times_longer() {
        let net = birth_net();
        let cover = interval_cover(&net);
        // Starts at the boundary of region 0, exits to region 1, comes back:
        // spans 0 and 2 are in region 0, and only those insert excursions.
        let z = MacroPath::new(
            vec![0.0, 1.0, 2.0],
            vec![vec![0.0], vec![1.0], vec![0.1]],
        )
        .unwrap();
        let (plan, shifted) = build_shifted_path(&z, &cover, 0.1).unwrap();
        let lens: Vec<f64> = plan.spans.iter().map(|s| s.shift_len).collect();
        assert_eq!(lens.len(), 3);
        assert_eq!(lens[1], 0.0, "interior span inserts nothing");
        assert!((lens[2] / lens[0] - plan.beta * plan.beta).abs() < 1e-12);
        assert_eq!(plan.beta, 12.0);
        let report = verify_breakup(&z, &shifted, &plan, &cover).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn nominal_shift_arithmetic_is_exact() {
        let net = birth_net();
        let cover = interval_cover(&net);
        let z = MacroPath::new(
            vec![0.0, 1.0, 2.0],
            vec![vec![0.0], vec![1.0], vec![0.1]],
        )
        .unwrap();
        let (plan, _) = build_shifted_path(&z, &cover, 0.1).unwrap();
        assert_eq!(plan.cum_shifts.len(), plan.spans.len() + 1);
        for k in 0..plan.spans.len() {
            let step = plan.beta.powi(k as i32) * plan.t_delta;
            assert_eq!(plan.cum_shifts[k + 1], plan.cum_shifts[k] + step);
            // Geometric partial sums stay below half the next term times
            // the cone parameter, which is what the cone slack relies on.
            let partial: f64 = (0..=k)
                .map(|l| plan.beta.powi(l as i32) * plan.t_delta)
                .sum();
            let next = plan.beta.powi(k as i32 + 1) * plan.t_delta;
            assert!(partial <= cover.kappa_dblprime / 2.0 * next * (1.0 + 1e-12));
        }
    }

    #[test]
    fn size_invariants_hold() {
        let net = birth_net();
        let cover = interval_cover(&net);
        let z = MacroPath::new(vec![0.0, 2.0], vec![vec![0.0], vec![0.4]]).unwrap();
        for delta in [1e-1, 1e-2, 1e-3] {
            let (plan, shifted) = build_shifted_path(&z, &cover, delta).unwrap();
            assert!(plan.delta_dblprime < plan.delta_prime);
            assert!(plan.delta_prime <= delta / 3.0);
            let report = verify_breakup(&z, &shifted, &plan, &cover).unwrap();
            assert!(report.passed, "delta={delta}: {report:?}");
        }
    }

    #[test]
    fn leaving_the_cover_is_reported() {
        let net = birth_net();
        // A cover whose single region is the point {0}: the excursion has
        // nowhere to go, so the membership check must fail and report a
        // time.
        let tight = Cover::parse(
            r#"{
                "regions": [
                    {
                        "halfspaces": [{"a": [-1.0], "b": 0.0}, {"a": [1.0], "b": 0.0}],
                        "boundary": [0],
                        "w": [1.0],
                        "kappa": 0.9,
                        "escape": [0]
                    }
                ],
                "eps": 0.5, "eps_prime": 0.3, "eps_dblprime": 0.25, "kappa_dblprime": 0.25
            }"#,
            &net,
        )
        .unwrap();
        let z = MacroPath::constant(&[0.0], 0.0, 1.0).unwrap();
        let err = build_shifted_path(&z, &tight, 0.1).unwrap_err();
        assert!(matches!(err, Error::Cover(_)), "got {err:?}");
        assert!(err.to_string().contains("time"), "got {err}");
    }
}
