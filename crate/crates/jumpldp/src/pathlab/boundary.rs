//! Boundary-rate auditors: how fast rates vanish toward a region's
//! boundary, which reactions are frozen there, and whether the remaining
//! jump directions can move a boundary point back into the region.

use crate::error::{Error, Result};
use crate::network::ReactionNetwork;
use crate::numeric::linalg::norm2;
use crate::numeric::stats::fit_slope;
use crate::pathlab::cover::CoverRegion;
use crate::pathlab::sampling::stable_extremum;

/// log rate with domain checking (NaN resolved through the plain value).
fn log_rate_checked(net: &ReactionNetwork, r: usize, x: &[f64]) -> Result<f64> {
    let l = net.log_macro_rate(r, x);
    if !l.is_nan() {
        return Ok(l);
    }
    Ok(net.macro_rate(r, x)?.ln())
}

/// Extremum of `log lambda_r` over the boundary slab at distances
/// `[lo_dist, hi_dist]`, sampled per boundary facet with the doubling
/// ladder and combined across facets. Returns the value and samples used.
fn slab_log_rate_extremum(
    net: &ReactionNetwork,
    region: &CoverRegion,
    r: usize,
    lo_dist: f64,
    hi_dist: f64,
    maximize: bool,
) -> Result<(f64, u64)> {
    let d = region.dim();
    let (lo, hi) = region.bbox()?;
    let mut combined = if maximize {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    };
    let mut used = 0u64;
    for &facet in &region.boundary {
        let h = &region.halfspaces[facet];
        let anorm = norm2(&h.a);
        let out = stable_extremum(
            &mut |i| {
                // Same normal-remap scheme as `sample_near_facet`, inlined
                // so rejected indices stay cheap inside the ladder. The
                // first two indices probe the slab's edge distances exactly:
                // a monotone rate attains its slab extremum at an edge, and
                // quasirandom targets alone approach the edges too slowly
                // for the doubling ladder's stability test.
                let pt = crate::numeric::sample::halton_point(d + 1, i + 1);
                let mut x: Vec<f64> =
                    (0..d).map(|k| lo[k] + (hi[k] - lo[k]) * pt[k]).collect();
                let target = match i {
                    0 => lo_dist,
                    1 => hi_dist,
                    _ => lo_dist + (hi_dist - lo_dist) * pt[d],
                };
                let shift = region.facet_distance(facet, &x) - target;
                for (xi, ai) in x.iter_mut().zip(&h.a) {
                    *xi += shift * ai / anorm;
                }
                if !region.contains(&x, crate::pathlab::cover::CONTAIN_TOL) {
                    return Ok(None);
                }
                let bd = region.boundary_distance(&x);
                if bd < lo_dist * (1.0 - 1e-9) || bd > hi_dist * (1.0 + 1e-9) {
                    return Ok(None);
                }
                match log_rate_checked(net, r, &x) {
                    Ok(l) => Ok(Some(l)),
                    Err(_) => Ok(None),
                }
            },
            maximize,
        )?;
        if let Some((v, n)) = out {
            combined = if maximize {
                combined.max(v)
            } else {
                combined.min(v)
            };
            used += n;
        }
    }
    if used == 0 {
        return Err(Error::Cover(format!(
            "region {}: no slab samples at distances [{lo_dist}, {hi_dist}]",
            region.id
        )));
    }
    Ok((combined, used))
}

/// One rung of a decay ladder.
#[derive(Debug, Clone)]
pub struct DecayRung {
    pub rho: f64,
    /// inf of log lambda over the shell at boundary distance [rho, 2 rho].
    pub inf_log_rate: f64,
    pub samples: u64,
}

/// Verdict for one candidate exponent.
#[derive(Debug, Clone)]
pub struct DecayExponentResult {
    pub alpha: f64,
    /// rho^alpha * inf log lambda per rung.
    pub values: Vec<f64>,
    /// The scaled values plausibly tend to zero along the ladder.
    pub holds: bool,
}

/// How fast a rate's log decays toward the boundary.
#[derive(Debug, Clone)]
pub struct DecayReport {
    pub reaction: usize,
    pub rungs: Vec<DecayRung>,
    pub exponents: Vec<DecayExponentResult>,
    /// Least-squares slope estimate of the decay order: the exponent a with
    /// |inf log lambda| ~ rho^(-a).
    pub fitted_alpha: f64,
    /// Some shell had the rate identically zero (log = -inf).
    pub hit_minus_infinity: bool,
}

/// Measure the decay of `log lambda_r` toward the region's boundary.
///
/// For each `rho` in the (decreasing) ladder, the infimum of `log lambda_r`
/// over the sampled shell at boundary distance `[rho, 2 rho]` is recorded.
/// For each candidate exponent `alpha`, the scaled values
/// `rho^alpha * inf log lambda_r` are reported together with a verdict on
/// whether they plausibly vanish: the last value is small (below 0.2 in
/// magnitude), the last three magnitudes do not increase, and the last
/// magnitude is below the first. The fitted exponent is the slope of
/// `log |inf log lambda|` against `-log rho`.
pub fn decay_exponent(
    net: &ReactionNetwork,
    r: usize,
    region: &CoverRegion,
    rho_ladder: &[f64],
    alphas: &[f64],
) -> Result<DecayReport> {
    if region.boundary.is_empty() {
        return Err(Error::Invalid(format!(
            "region {} has no boundary facets",
            region.id
        )));
    }
    if rho_ladder.len() < 3 || rho_ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Invalid(
            "decay ladder must be strictly decreasing with >= 3 rungs".into(),
        ));
    }
    if r >= net.n_reactions() {
        return Err(Error::Invalid(format!("reaction {r} out of range")));
    }
    let mut rungs = Vec::with_capacity(rho_ladder.len());
    let mut hit_minus_infinity = false;
    for &rho in rho_ladder {
        let (inf, samples) = slab_log_rate_extremum(net, region, r, rho, 2.0 * rho, false)?;
        if inf == f64::NEG_INFINITY {
            hit_minus_infinity = true;
        }
        rungs.push(DecayRung {
            rho,
            inf_log_rate: inf,
            samples,
        });
    }

    let mut exponents = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let values: Vec<f64> = rungs
            .iter()
            .map(|rung| rung.rho.powf(alpha) * rung.inf_log_rate)
            .collect();
        let mags: Vec<f64> = values.iter().map(|v| v.abs()).collect();
        let n = mags.len();
        let holds = mags.iter().all(|m| m.is_finite())
            && mags[n - 1] < 0.2
            && mags[n - 2] <= mags[n - 3] + 1e-12
            && mags[n - 1] <= mags[n - 2] + 1e-12
            && mags[n - 1] < mags[0];
        exponents.push(DecayExponentResult {
            alpha,
            values,
            holds,
        });
    }

    // |inf log lambda| ~ C rho^(-a): fit log magnitude against log rho and
    // negate the slope.
    let mut xs = Vec::with_capacity(rungs.len());
    let mut ys = Vec::with_capacity(rungs.len());
    for rung in &rungs {
        if rung.inf_log_rate.is_finite() && rung.inf_log_rate != 0.0 {
            xs.push(rung.rho.ln());
            ys.push(rung.inf_log_rate.abs().ln());
        }
    }
    let fitted_alpha = if xs.len() >= 2 {
        -fit_slope(&xs, &ys)
    } else {
        f64::NAN
    };

    Ok(DecayReport {
        reaction: r,
        rungs,
        exponents,
        fitted_alpha,
        hit_minus_infinity,
    })
}

/// Per-reaction boundary-freeze classification.
#[derive(Debug, Clone)]
pub struct FastSetReport {
    /// Rungs per reaction: (rho, rho * sup log lambda over distance < rho).
    pub rungs: Vec<Vec<(f64, f64)>>,
    /// Reactions whose scaled sup stays below the threshold on the last
    /// three rungs.
    pub fast: Vec<bool>,
    /// Mean of the last three scaled values per reaction (the limit
    /// estimate; meaningful for fast reactions).
    pub limits: Vec<f64>,
    pub samples: Vec<u64>,
}

impl FastSetReport {
    pub fn fast_indices(&self) -> Vec<usize> {
        self.fast
            .iter()
            .enumerate()
            .filter_map(|(r, &f)| f.then_some(r))
            .collect()
    }
}

/// Threshold on `rho * sup log lambda` below which a reaction counts as
/// frozen at the boundary.
pub const FAST_THRESHOLD: f64 = -1e-3;

/// Classify which reactions freeze exponentially fast at the boundary.
///
/// A reaction is fast when `rho * sup log lambda_r` over the boundary slab
/// of width `rho` stays below [`FAST_THRESHOLD`] on the ladder's last three
/// rungs. A rate identically zero near the boundary gives `-inf` scaled
/// values and classifies fast.
pub fn fast_set(
    net: &ReactionNetwork,
    region: &CoverRegion,
    rho_ladder: &[f64],
) -> Result<FastSetReport> {
    if region.boundary.is_empty() {
        return Err(Error::Invalid(format!(
            "region {} has no boundary facets",
            region.id
        )));
    }
    if rho_ladder.len() < 3 || rho_ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Invalid(
            "freeze ladder must be strictly decreasing with >= 3 rungs".into(),
        ));
    }
    let mut rungs = Vec::with_capacity(net.n_reactions());
    let mut fast = Vec::with_capacity(net.n_reactions());
    let mut limits = Vec::with_capacity(net.n_reactions());
    let mut samples = Vec::with_capacity(net.n_reactions());
    for r in 0..net.n_reactions() {
        let mut rs = Vec::with_capacity(rho_ladder.len());
        let mut used = 0u64;
        for &rho in rho_ladder {
            let (sup, n) = slab_log_rate_extremum(net, region, r, 0.0, rho, true)?;
            rs.push((rho, rho * sup));
            used += n;
        }
        let n = rs.len();
        let last3 = &rs[n - 3..];
        fast.push(last3.iter().all(|&(_, v)| v < FAST_THRESHOLD));
        limits.push(last3.iter().map(|&(_, v)| v).sum::<f64>() / 3.0);
        samples.push(used);
        rungs.push(rs);
    }
    Ok(FastSetReport {
        rungs,
        fast,
        limits,
        samples,
    })
}

/// Obstruction verdict at one active facet.
#[derive(Debug, Clone)]
pub struct FacetConeCheck {
    pub facet: usize,
    /// Largest inward component of a slow jump direction along the facet's
    /// inward normal (`-inf` when the slow set is empty).
    pub best_inward: f64,
    pub best_reaction: Option<usize>,
    pub obstructed: bool,
}

/// Whether the slow jump directions can move a boundary point inward.
#[derive(Debug, Clone)]
pub struct ConeReport {
    pub x: Vec<f64>,
    /// Reactions not classified fast (and with a nonzero jump).
    pub slow: Vec<usize>,
    pub facets: Vec<FacetConeCheck>,
    /// Obstructed at every active facet.
    pub obstructed: bool,
}

/// Decide whether the slow reactions obstruct escape from a boundary point.
///
/// At each facet active at `x`, the largest inward-normal component over
/// nonnegative combinations of slow jump vectors is attained at a single
/// jump (the objective is linear, the normalized combinations form a
/// simplex whose vertices are the jumps), so the check reduces to a max
/// over the slow set. A facet obstructs when that max is negative beyond
/// slack (even tangent moves count as escape); with several active facets
/// the point is obstructed when every facet obstructs.
pub fn cone_obstruction(
    net: &ReactionNetwork,
    region: &CoverRegion,
    x: &[f64],
    fast: &[usize],
) -> Result<ConeReport> {
    if x.len() != region.dim() {
        return Err(Error::Invalid(
            "point must match the region dimension".into(),
        ));
    }
    let active: Vec<usize> = region
        .halfspaces
        .iter()
        .enumerate()
        .filter_map(|(i, h)| {
            let gap = (h.b - crate::numeric::linalg::dot(&h.a, x)).abs();
            (gap <= 1e-9 * norm2(&h.a) * (1.0 + h.b.abs())).then_some(i)
        })
        .collect();
    if active.is_empty() {
        return Err(Error::Invalid(format!(
            "point {x:?} is not on any facet of region {}",
            region.id
        )));
    }
    let slow: Vec<usize> = (0..net.n_reactions())
        .filter(|r| !fast.contains(r) && !net.is_uniformizing(*r))
        .collect();
    let mut facets = Vec::with_capacity(active.len());
    for &i in &active {
        let h = &region.halfspaces[i];
        let anorm = norm2(&h.a);
        let mut best_inward = f64::NEG_INFINITY;
        let mut best_reaction = None;
        for &r in &slow {
            let inward: f64 = h
                .a
                .iter()
                .zip(net.jump_f64(r))
                .map(|(ai, gi)| -ai * gi / anorm)
                .sum();
            if inward > best_inward {
                best_inward = inward;
                best_reaction = Some(r);
            }
        }
        facets.push(FacetConeCheck {
            facet: i,
            best_inward,
            best_reaction,
            obstructed: !(best_inward >= -1e-9),
        });
    }
    let obstructed = facets.iter().all(|f| f.obstructed);
    Ok(ConeReport {
        x: x.to_vec(),
        slow,
        facets,
        obstructed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::model::parse_model;
    use crate::pathlab::cover::Cover;

    fn linear_and_frozen_net() -> ReactionNetwork {
        parse_model(
            r#"{
                "name": "pair",
                "species": ["A"],
                "reactions": [
                    {"in": {"A": 1}, "out": {"A": 2}, "rate": {"type": "mass_action", "k": 1.0}},
                    {"in": {}, "out": {"A": 1}, "rate": {"type": "expr", "formula": "exp(-2 / x[A])"}}
                ]
            }"#,
        )
        .unwrap()
    }

    fn unit_region(net: &ReactionNetwork) -> CoverRegion {
        Cover::parse(
            r#"{
                "regions": [
                    {
                        "halfspaces": [{"a": [-1.0], "b": 0.0}, {"a": [1.0], "b": 0.5}],
                        "boundary": [0],
                        "w": [1.0],
                        "kappa": 0.9,
                        "escape": [0]
                    }
                ],
                "eps": 0.5, "eps_prime": 0.3, "eps_dblprime": 0.25, "kappa_dblprime": 0.25
            }"#,
            net,
        )
        .unwrap()
        .region(0)
        .clone()
    }

    // Deep enough that rho^0.25 |log rho| drops below the smallness
    // threshold for the linear rate and rho |log rho| clears the freeze
    // threshold on the last three rungs.
    fn rho_ladder() -> Vec<f64> {
        (4..=30).map(|k| f64::powi(2.0, -k)).collect()
    }

    #[test]
    fn linear_rate_has_vanishing_decay_exponent() {
        let net = linear_and_frozen_net();
        let region = unit_region(&net);
        let report =
            decay_exponent(&net, 0, &region, &rho_ladder(), &[0.25, 0.5, 0.9]).unwrap();
        // inf log lambda over the shell [rho, 2 rho] is log rho.
        for rung in &report.rungs {
            assert!(
                (rung.inf_log_rate - rung.rho.ln()).abs() < 0.05,
                "{rung:?}"
            );
        }
        for e in &report.exponents {
            assert!(e.holds, "alpha={} should hold: {:?}", e.alpha, e.values);
        }
        // |log rho| grows slower than any power: fitted exponent near 0.
        assert!(report.fitted_alpha < 0.3, "{}", report.fitted_alpha);
        assert!(!report.hit_minus_infinity);
    }

    #[test]
    fn frozen_rate_fails_every_exponent_below_one() {
        let net = linear_and_frozen_net();
        let region = unit_region(&net);
        let report =
            decay_exponent(&net, 1, &region, &rho_ladder(), &[0.25, 0.5, 0.9]).unwrap();
        // inf log lambda over [rho, 2 rho] is -2 / rho at the shell's inner
        // edge.
        for rung in &report.rungs {
            assert!(
                (rung.inf_log_rate * rung.rho + 2.0).abs() < 0.2,
                "{rung:?}"
            );
        }
        for e in &report.exponents {
            assert!(!e.holds, "alpha={} must fail: {:?}", e.alpha, e.values);
        }
        assert!((report.fitted_alpha - 1.0).abs() < 0.1, "{}", report.fitted_alpha);
    }

    #[test]
    fn freeze_classification_separates_the_two_rates() {
        let net = linear_and_frozen_net();
        let region = unit_region(&net);
        let report = fast_set(&net, &region, &rho_ladder()).unwrap();
        assert!(!report.fast[0], "mass action does not freeze: {report:?}");
        assert!(report.fast[1], "exponential rate freezes: {report:?}");
        assert_eq!(report.fast_indices(), vec![1]);
        // rho * sup log lambda = rho * (-2 / rho) = -2 on the slab edge.
        assert!(
            (report.limits[1] + 2.0).abs() < 0.1,
            "limit {}",
            report.limits[1]
        );
    }

    #[test]
    fn decay_and_freeze_agree() {
        // A reaction classified fast never satisfies the vanishing-decay
        // condition for exponents below one on the same ladder.
        let net = linear_and_frozen_net();
        let region = unit_region(&net);
        let freeze = fast_set(&net, &region, &rho_ladder()).unwrap();
        for r in freeze.fast_indices() {
            let decay =
                decay_exponent(&net, r, &region, &rho_ladder(), &[0.25, 0.5, 0.9]).unwrap();
            for e in &decay.exponents {
                assert!(!e.holds, "fast reaction {r} cannot satisfy alpha={}", e.alpha);
            }
        }
    }

    #[test]
    fn zero_rate_classifies_fast() {
        let net = parse_model(
            r#"{
                "name": "dead",
                "species": ["A"],
                "reactions": [
                    {"in": {"A": 1}, "out": {"A": 2}, "rate": {"type": "mass_action", "k": 0.0}}
                ]
            }"#,
        )
        .unwrap();
        let region = unit_region(&net);
        // A short ladder: the dead rate never stabilizes, so every rung
        // runs the sampler to its cap.
        let ladder = [0.25, 0.125, 0.0625];
        let report = fast_set(&net, &region, &ladder).unwrap();
        assert!(report.fast[0]);
        assert_eq!(report.limits[0], f64::NEG_INFINITY);
    }

    #[test]
    fn inward_jump_is_never_obstructed() {
        let net = linear_and_frozen_net();
        let region = unit_region(&net);
        // Both reactions jump +1, inward at the lower facet.
        let report = cone_obstruction(&net, &region, &[0.0], &[]).unwrap();
        assert!(!report.obstructed);
        assert_eq!(report.facets.len(), 1);
        assert!(report.facets[0].best_inward > 0.0);

        // With every reaction fast, the slow set is empty: obstructed.
        let report = cone_obstruction(&net, &region, &[0.0], &[0, 1]).unwrap();
        assert!(report.slow.is_empty());
        assert!(report.obstructed);
    }

    #[test]
    fn tangent_moves_count_as_escape() {
        let net = parse_model(
            r#"{
                "name": "planar",
                "species": ["X1", "X2"],
                "reactions": [
                    {"in": {}, "out": {"X1": 1}, "rate": {"type": "mass_action", "k": 1.0}}
                ]
            }"#,
        )
        .unwrap();
        let region = Cover::parse(
            r#"{
                "regions": [
                    {
                        "halfspaces": [
                            {"a": [-1.0, 0.0], "b": 0.0}, {"a": [1.0, 0.0], "b": 0.9},
                            {"a": [0.0, -1.0], "b": 0.0}, {"a": [0.0, 1.0], "b": 0.9}
                        ],
                        "boundary": [2],
                        "w": [1.0, 0.0],
                        "kappa": 0.5,
                        "escape": [0]
                    }
                ],
                "eps": 0.3, "eps_prime": 0.2, "eps_dblprime": 0.1, "kappa_dblprime": 0.15
            }"#,
            &net,
        )
        .unwrap()
        .region(0)
        .clone();
        // At the origin two facets are active; the jump (1, 0) is tangent
        // to the lower facet and inward at the left facet: not obstructed.
        let report = cone_obstruction(&net, &region, &[0.0, 0.0], &[]).unwrap();
        assert_eq!(report.facets.len(), 2);
        assert!(!report.obstructed);

        // Interior points have no active facet.
        assert!(cone_obstruction(&net, &region, &[0.4, 0.4], &[]).is_err());
    }

    #[test]
    fn planted_inward_jumps_are_never_obstructed() {
        // Random boxes with a planted inward jump at a chosen facet: the
        // verdict must always be "not obstructed" at that facet's points.
        let net = parse_model(
            r#"{
                "name": "plant",
                "species": ["X1", "X2"],
                "reactions": [
                    {"in": {}, "out": {"X1": 1, "X2": 2}, "rate": {"type": "mass_action", "k": 1.0}},
                    {"in": {"X1": 1}, "out": {}, "rate": {"type": "mass_action", "k": 1.0}}
                ]
            }"#,
        )
        .unwrap();
        for seed in 0..20u64 {
            let u = crate::numeric::sample::halton_point(4, seed + 1);
            let wx = 0.2 + u[0];
            let wy = 0.2 + u[1];
            let region = CoverRegion {
                id: 0,
                halfspaces: vec![
                    crate::pathlab::cover::Halfspace {
                        a: vec![0.0, -1.0],
                        b: 0.0,
                    },
                    crate::pathlab::cover::Halfspace {
                        a: vec![0.0, 1.0],
                        b: wy,
                    },
                    crate::pathlab::cover::Halfspace {
                        a: vec![-1.0, 0.0],
                        b: 0.0,
                    },
                    crate::pathlab::cover::Halfspace {
                        a: vec![1.0, 0.0],
                        b: wx,
                    },
                ],
                boundary: vec![0],
                w: vec![0.0, 1.0],
                kappa: 0.5,
                escape: vec![0],
                alpha: 2.0,
            };
            // Points on the lower facet; reaction 0 jumps (1, 2), inward.
            let x = vec![u[2] * wx, 0.0];
            let report = cone_obstruction(&net, &region, &x, &[]).unwrap();
            let lower = report.facets.iter().find(|f| f.facet == 0).unwrap();
            assert!(lower.best_inward > 0.0, "seed {seed}: {report:?}");
            assert!(!lower.obstructed);
            assert!(!report.obstructed);
        }
    }
}
