//! Escape diagnostics for boundary regions: the action cost of moving off
//! a degenerate boundary along the escape direction, an audit of the rate
//! conditions an escape sequence must satisfy, and a computable lower bound
//! on the scaled log-probability of the microscopic escape event.

use crate::error::{Error, Result};
use crate::network::audit::audit_aleph;
use crate::network::{ReactionNetwork, ScaledState};
use crate::numeric::gauss::integrate_refined;
use crate::numeric::linalg::{dot, norm2};
use crate::numeric::sample::halton_point;
use crate::path::MacroPath;
use crate::pathlab::cover::{sample_region, Cover, CoverRegion, CONTAIN_TOL};
use crate::pathlab::sampling::stable_extremum;
use crate::ratefn::{path_action, ActionResult, QuadOpts};

/// Action of the straight path `t -> x0 + t w` on `[0, t_delta]`.
///
/// Boundary escape is affordable exactly when this cost vanishes as
/// `t_delta` does; a cost that grows as the window shrinks certifies an
/// unescapable boundary.
pub fn escape_cost(
    net: &ReactionNetwork,
    x0: &[f64],
    w: &[f64],
    t_delta: f64,
    opts: &QuadOpts,
) -> Result<ActionResult> {
    if !(t_delta > 0.0 && t_delta.is_finite()) {
        return Err(Error::Invalid(format!(
            "escape window must be positive, got {t_delta}"
        )));
    }
    let line = MacroPath::line(x0, w, 0.0, t_delta)?;
    path_action(net, &line, opts)
}

/// log rate with domain checking (NaN resolved through the plain value).
fn log_rate_checked(net: &ReactionNetwork, r: usize, x: &[f64]) -> Result<f64> {
    let l = net.log_macro_rate(r, x);
    if !l.is_nan() {
        return Ok(l);
    }
    Ok(net.macro_rate(r, x)?.ln())
}

/// Orthogonal projection of `x` onto the hyperplane of facet `i`.
fn project_to_facet(region: &CoverRegion, i: usize, x: &[f64]) -> Vec<f64> {
    let h = &region.halfspaces[i];
    let n = norm2(&h.a);
    let dist = (h.b - dot(&h.a, x)) / n;
    x.iter()
        .zip(&h.a)
        .map(|(xi, ai)| xi + dist * ai / n)
        .collect()
}

/// Region samples enriched with their projections onto the boundary facets
/// (kept when the projection stays in the region). Rate degeneracies live
/// on the boundary itself, so audits must evaluate there, not only at
/// interior sample points.
fn boundary_enriched_samples(
    region: &CoverRegion,
    count: usize,
) -> Result<Vec<Vec<f64>>> {
    let base = sample_region(region, count, 1)?;
    let mut out = base.clone();
    for &facet in &region.boundary {
        for x in &base {
            let p = project_to_facet(region, facet, x);
            if region.contains(&p, CONTAIN_TOL) {
                out.push(p);
            }
        }
    }
    Ok(out)
}

/// One volume rung of the prefix-rate check: the scaled log rates
/// `(1/v) |log Lambda^v|` along the escape sequence's prefix states.
#[derive(Debug, Clone)]
pub struct PrefixRateRung {
    pub v: u64,
    /// One value per escape step, in sequence order.
    pub values: Vec<f64>,
    pub max: f64,
    /// Some prefix rate was exactly zero (its value is infinite).
    pub hit_zero: bool,
}

/// Ladder of `int_0^rho |log lambda_r|` along the escape direction, with
/// the supremum taken over the audit's candidate points.
#[derive(Debug, Clone)]
pub struct EscapeIntegralLadder {
    pub reaction: usize,
    /// (rho, supremum of the integral) per rung, largest rho first.
    pub rungs: Vec<(f64, f64)>,
    /// Number of candidate points the supremum ranged over.
    pub points: usize,
    /// Integral evaluations skipped because the ray left the rate domain.
    pub skipped: usize,
    /// Quadrature flagged a non-integrable singularity somewhere.
    pub divergent: bool,
    pub vanishing: bool,
}

#[derive(Debug, Clone)]
pub struct MonotonicityWitness {
    pub reaction: usize,
    pub x: Vec<f64>,
    pub w: Vec<f64>,
    pub t: f64,
    /// Size of the decrease that broke monotonicity.
    pub drop: f64,
}

/// Monotonicity of small rates along cone directions: wherever a rate is
/// below the activation threshold, it must not decrease along rays near the
/// escape direction.
#[derive(Debug, Clone)]
pub struct MonotonicityCheck {
    /// Candidate points sampled (region plus boundary projections).
    pub points: usize,
    /// (point, reaction) pairs with a rate below the threshold.
    pub qualifying: usize,
    /// Direction scans performed.
    pub scans: usize,
    pub violations: usize,
    pub first_violation: Option<MonotonicityWitness>,
    pub passed: bool,
}

/// Audit of the three rate conditions behind an escape sequence.
#[derive(Debug, Clone)]
pub struct EscapeAudit {
    pub region: usize,
    /// Prefix-rate rungs over the volume ladder.
    pub prefix_rungs: Vec<PrefixRateRung>,
    /// The per-rung maxima vanish along the ladder.
    pub prefix_vanishing: bool,
    /// Integrability ladders, one per escape reaction.
    pub integral_ladders: Vec<EscapeIntegralLadder>,
    pub integrals_vanishing: bool,
    pub monotonicity: MonotonicityCheck,
    pub passed: bool,
}

/// Values vanish along a ladder: finite, nonincreasing within rounding
/// slack, and the last below half the first.
fn vanishing(values: &[f64]) -> bool {
    if values.len() < 2 || values.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let nonincreasing = values
        .windows(2)
        .all(|w| w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()));
    nonincreasing && *values.last().unwrap() < 0.5 * values[0] + 1e-12
}

/// Audit the rate conditions behind a region's escape sequence.
///
/// Three checks, all report-based:
///
/// * prefix rates: along the volume ladder, with matching start counts, the
///   scaled log rates `(1/v) |log Lambda^v|` at the sequence's prefix
///   states must vanish;
/// * integrability: for each escape reaction, `int_0^rho |log lambda|`
///   along the escape direction must vanish as `rho` descends from `eps`
///   through three halvings, uniformly over sampled region points, their
///   boundary projections, and the prefix states;
/// * monotonicity: at sampled points where a rate is below `eps_dblprime`,
///   the rate must be nondecreasing along rays within `kappa_dblprime` of
///   the escape direction, over the window `(0, eps)`.
pub fn escape_sequence_audit(
    net: &ReactionNetwork,
    cover: &Cover,
    region_id: usize,
    v_ladder: &[u64],
    x0_ladder: &[Vec<i64>],
) -> Result<EscapeAudit> {
    if region_id >= cover.regions().len() {
        return Err(Error::Invalid(format!("region {region_id} out of range")));
    }
    let region = cover.region(region_id);
    if region.escape.is_empty() {
        return Err(Error::Invalid(format!(
            "region {region_id} has no escape sequence to audit"
        )));
    }
    if v_ladder.len() != x0_ladder.len() || v_ladder.len() < 2 {
        return Err(Error::Invalid(
            "the audit needs matching volume and start-count ladders (>= 2 rungs)".into(),
        ));
    }
    let dim = net.dim();
    if x0_ladder.iter().any(|c| c.len() != dim) {
        return Err(Error::Invalid(
            "start counts must match the model dimension".into(),
        ));
    }

    // Prefix rates over the volume ladder.
    let mut prefix_rungs = Vec::with_capacity(v_ladder.len());
    let mut prefix_points: Vec<Vec<f64>> = Vec::new();
    for (&v, counts0) in v_ladder.iter().zip(x0_ladder) {
        if v == 0 {
            return Err(Error::Invalid("volumes must be positive".into()));
        }
        let mut counts = counts0.clone();
        let mut values = Vec::with_capacity(region.escape.len());
        let mut hit_zero = false;
        for &r in &region.escape {
            let state = ScaledState {
                v,
                counts: counts.clone(),
            };
            prefix_points.push(state.concentrations());
            // Log-domain evaluation: plain micro rates underflow to zero
            // once (1/v) log Lambda is moderately negative.
            let mut l = net.log_micro_rate(r, &state);
            if l.is_nan() {
                l = net.micro_rate(r, &state)?.ln();
            }
            if l == f64::NEG_INFINITY {
                hit_zero = true;
                values.push(f64::INFINITY);
            } else {
                values.push(l.abs() / v as f64);
            }
            for (c, g) in counts.iter_mut().zip(net.jump(r)) {
                *c += g;
            }
        }
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prefix_rungs.push(PrefixRateRung {
            v,
            values,
            max,
            hit_zero,
        });
    }
    let prefix_maxima: Vec<f64> = prefix_rungs.iter().map(|r| r.max).collect();
    let prefix_vanishing = vanishing(&prefix_maxima);

    // Integrability of |log lambda| along the escape direction.
    let mut candidates = boundary_enriched_samples(region, 128)?;
    candidates.extend(prefix_points.iter().cloned());
    let rho_ladder: Vec<f64> = (0..4).map(|k| cover.eps / f64::powi(2.0, k)).collect();
    let mut integral_ladders = Vec::with_capacity(region.escape.len());
    for &r in &region.escape {
        let mut rungs = Vec::with_capacity(rho_ladder.len());
        let mut divergent = false;
        let mut skipped = 0usize;
        for &rho in &rho_ladder {
            let mut sup = f64::NEG_INFINITY;
            for x in &candidates {
                let mut bad: Option<Error> = None;
                let mut f = |s: f64| {
                    let y: Vec<f64> = x
                        .iter()
                        .zip(&region.w)
                        .map(|(xi, wi)| xi + s * wi)
                        .collect();
                    match log_rate_checked(net, r, &y) {
                        Ok(l) => l.abs(),
                        Err(e) => {
                            if bad.is_none() {
                                bad = Some(e);
                            }
                            0.0
                        }
                    }
                };
                let refined = integrate_refined(&mut f, 0.0, rho, true, false, 16, 12);
                if bad.is_some() {
                    skipped += 1;
                    continue;
                }
                if refined.growing {
                    divergent = true;
                    sup = f64::INFINITY;
                } else {
                    sup = sup.max(refined.value);
                }
            }
            rungs.push((rho, sup));
        }
        let values: Vec<f64> = rungs.iter().map(|&(_, s)| s).collect();
        integral_ladders.push(EscapeIntegralLadder {
            reaction: r,
            rungs,
            points: candidates.len(),
            skipped,
            divergent,
            vanishing: !divergent && vanishing(&values),
        });
    }
    let integrals_vanishing = integral_ladders.iter().all(|l| l.vanishing);

    // Monotonicity of sub-threshold rates along cone directions.
    let mono_points = boundary_enriched_samples(region, 256)?;
    let mut directions: Vec<Vec<f64>> = vec![region.w.clone()];
    for m in 0..8u64 {
        let u = halton_point(dim, m + 1);
        let mut y: Vec<f64> = u.iter().map(|&ui| 2.0 * ui - 1.0).collect();
        let n = norm2(&y).max(1.0);
        for yi in &mut y {
            *yi *= 0.9 * cover.kappa_dblprime / n;
        }
        directions.push(region.w.iter().zip(&y).map(|(wi, yi)| wi + yi).collect());
    }
    let t_grid: Vec<f64> = (1..=24).map(|i| cover.eps * i as f64 / 24.0).collect();
    let mut qualifying = 0usize;
    let mut scans = 0usize;
    let mut violations = 0usize;
    let mut first_violation = None;
    for x in &mono_points {
        for r in 0..net.n_reactions() {
            let lam0 = match net.macro_rate(r, x) {
                Ok(l) => l,
                Err(_) => continue,
            };
            if lam0 >= cover.eps_dblprime {
                continue;
            }
            qualifying += 1;
            for w in &directions {
                scans += 1;
                let mut prev = lam0;
                for &t in &t_grid {
                    let y: Vec<f64> =
                        x.iter().zip(w).map(|(xi, wi)| xi + t * wi).collect();
                    let lam = match net.macro_rate(r, &y) {
                        Ok(l) => l,
                        Err(_) => break,
                    };
                    if lam < prev - 1e-12 * (1.0 + prev.abs()) {
                        violations += 1;
                        if first_violation.is_none() {
                            first_violation = Some(MonotonicityWitness {
                                reaction: r,
                                x: x.clone(),
                                w: w.clone(),
                                t,
                                drop: prev - lam,
                            });
                        }
                        break;
                    }
                    prev = lam;
                }
            }
        }
    }
    let monotonicity = MonotonicityCheck {
        points: mono_points.len(),
        qualifying,
        scans,
        violations,
        first_violation,
        passed: violations == 0,
    };

    let passed = prefix_vanishing && integrals_vanishing && monotonicity.passed;
    Ok(EscapeAudit {
        region: region_id,
        prefix_rungs,
        prefix_vanishing,
        integral_ladders,
        integrals_vanishing,
        monotonicity,
        passed,
    })
}

/// Lower bound on the scaled log-probability of the escape event: the jump
/// process holds near the boundary point, fires the escape sequence at the
/// prescribed pace for a window of length `t_delta`, and ends displaced by
/// `t_delta` along the escape direction.
#[derive(Debug, Clone)]
pub struct EscapeEventBound {
    /// The bound itself (on the `(1/v) log P` scale); `-inf` when a log-rate
    /// integral diverges.
    pub value: f64,
    /// Holding-cost term from the Poisson pace of the sequence.
    pub holding_term: f64,
    /// One log-rate integral per escape reaction.
    pub integral_terms: Vec<f64>,
    /// Correction from the micro-to-macro rate ratio bound.
    pub aleph_term: f64,
    /// Uniformizing rate bound: sup of the total rate over the ball of
    /// radius `2 t_delta` around the start, intersected with the region,
    /// and floored at 1.
    pub lambda_bar: f64,
    /// Samples used for the rate bound.
    pub lambda_bar_samples: u64,
    /// Micro-to-macro rate ratio lower bound used (1 when unavailable).
    pub aleph: f64,
    /// Some log-rate integral failed to converge.
    pub diverged: bool,
}

/// Evaluate the escape-event bound at a boundary point.
///
/// `t_delta` must be small enough that the sequence pace is meaningful:
/// below `alpha / n` (one sequence sweep fits the window) and below
/// `eps_dblprime / L` where `L` is a sampled Lipschitz estimate of the
/// rates over the region (so rates stay in their activation window).
pub fn escape_event_bound(
    net: &ReactionNetwork,
    cover: &Cover,
    region_id: usize,
    x0: &[f64],
    t_delta: f64,
    v: u64,
    opts: &QuadOpts,
) -> Result<EscapeEventBound> {
    if region_id >= cover.regions().len() {
        return Err(Error::Invalid(format!("region {region_id} out of range")));
    }
    let region = cover.region(region_id);
    if region.escape.is_empty() {
        return Err(Error::Invalid(format!(
            "region {region_id} has no escape sequence"
        )));
    }
    if x0.len() != net.dim() {
        return Err(Error::Invalid(
            "start point must match the model dimension".into(),
        ));
    }
    if !(t_delta > 0.0 && t_delta.is_finite()) {
        return Err(Error::Invalid(format!(
            "escape window must be positive, got {t_delta}"
        )));
    }
    let n = region.escape.len() as f64;
    let alpha = region.alpha;

    // Sampled Lipschitz estimate of the rates over the region, with a
    // safety factor; probes that leave the rate domain are skipped.
    let lip_points = sample_region(region, 64, 1)?;
    let mut lip = 0.0f64;
    for x in &lip_points {
        for r in 0..net.n_reactions() {
            let mut grad2 = 0.0f64;
            for i in 0..net.dim() {
                let h = 1e-6 * (1.0 + x[i].abs());
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                if let (Ok(fp), Ok(fm)) = (net.macro_rate(r, &xp), net.macro_rate(r, &xm)) {
                    let g = (fp - fm) / (2.0 * h);
                    grad2 += g * g;
                }
            }
            lip = lip.max(grad2.sqrt());
        }
    }
    let lip = 1.5 * lip;
    let window_cap = if lip > 0.0 {
        (alpha / n).min(cover.eps_dblprime / lip)
    } else {
        alpha / n
    };
    if t_delta >= window_cap {
        return Err(Error::Invalid(format!(
            "escape window {t_delta} is not below the pace cap {window_cap} \
             (sequence length {n}, alpha {alpha}, Lipschitz estimate {lip})"
        )));
    }

    // Uniformizing rate bound: sup of the total rate over the ball of
    // radius 2 t_delta around the start point, intersected with the
    // region, floored at 1. The escape trajectory lives inside the region,
    // and rates have no physical meaning outside it (an expression such as
    // exp(-1/x) explodes for x < 0). Index 0 probes the center; points
    // outside the ball, the region, or the rate domain are rejected.
    let dim = net.dim();
    let ball = stable_extremum(
        &mut |i| {
            let y: Vec<f64> = if i == 0 {
                x0.to_vec()
            } else {
                let u = halton_point(dim, i);
                let y: Vec<f64> = x0
                    .iter()
                    .zip(&u)
                    .map(|(xi, ui)| xi + 2.0 * t_delta * (2.0 * ui - 1.0))
                    .collect();
                let d2: f64 = y.iter().zip(x0).map(|(a, b)| (a - b) * (a - b)).sum();
                if d2.sqrt() > 2.0 * t_delta || !region.contains(&y, 1e-9) {
                    return Ok(None);
                }
                y
            };
            match net.macro_rates(&y) {
                Ok(rates) => Ok(Some(rates.iter().sum())),
                Err(_) => Ok(None),
            }
        },
        true,
    )?;
    let (total_sup, lambda_bar_samples) = ball.unwrap_or((0.0, 0));
    let lambda_bar = total_sup.max(1.0);

    // Micro-to-macro ratio bound over the region's bounding box.
    let (lo, hi) = region.bbox()?;
    let aleph_report = audit_aleph(net, &lo, &hi, 5, v)?;
    let aleph = if aleph_report.min_ratio.is_finite() {
        aleph_report.min_ratio
    } else {
        1.0
    };

    let pace = n / alpha;
    let holding_term = -t_delta * (pace * (pace / lambda_bar).ln() - pace + lambda_bar);
    let aleph_term = t_delta * pace * aleph.ln();

    let mut integral_terms = Vec::with_capacity(region.escape.len());
    let mut diverged = false;
    for &r in &region.escape {
        let mut bad: Option<Error> = None;
        let mut f = |s: f64| {
            let y: Vec<f64> = x0
                .iter()
                .zip(&region.w)
                .map(|(xi, wi)| xi + s * alpha * wi)
                .collect();
            match log_rate_checked(net, r, &y) {
                Ok(l) => l,
                Err(e) => {
                    if bad.is_none() {
                        bad = Some(e);
                    }
                    0.0
                }
            }
        };
        let refined = integrate_refined(
            &mut f,
            0.0,
            t_delta / alpha,
            true,
            false,
            opts.points,
            opts.max_levels,
        );
        if let Some(e) = bad {
            return Err(e);
        }
        if refined.growing {
            diverged = true;
        }
        integral_terms.push(refined.value);
    }
    let value = if diverged {
        f64::NEG_INFINITY
    } else {
        holding_term + integral_terms.iter().sum::<f64>() + aleph_term
    };
    Ok(EscapeEventBound {
        value,
        holding_term,
        integral_terms,
        aleph_term,
        lambda_bar,
        lambda_bar_samples,
        aleph,
        diverged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::model::parse_model;

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

    fn frozen_net() -> ReactionNetwork {
        parse_model(
            r#"{
                "name": "frozen",
                "species": ["A"],
                "reactions": [
                    {"in": {}, "out": {"A": 1}, "rate": {"type": "expr", "formula": "exp(-1 / x[A])"}}
                ]
            }"#,
        )
        .unwrap()
    }

    fn unit_cover(net: &ReactionNetwork) -> Cover {
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
    }

    #[test]
    fn linear_rate_escape_cost_decreases() {
        let net = birth_net();
        let opts = QuadOpts::default();
        let mut last = f64::INFINITY;
        for t_delta in [1e-1, 1e-2, 1e-3, 1e-4] {
            let res = escape_cost(&net, &[0.0], &[1.0], t_delta, &opts).unwrap();
            assert!(res.value.is_finite(), "cost at {t_delta}: {res:?}");
            assert!(res.value < last, "not decreasing at {t_delta}");
            last = res.value;
        }
        assert!(last < 1e-2, "final cost {last}");
    }

    #[test]
    fn exponentially_frozen_escape_cost_grows() {
        let net = frozen_net();
        let opts = QuadOpts::default();
        let mut last = 0.0f64;
        for t_delta in [1e-1, 1e-2, 1e-3] {
            let res = escape_cost(&net, &[0.0], &[1.0], t_delta, &opts).unwrap();
            assert!(res.value > last, "not increasing at {t_delta}");
            last = res.value;
        }
        assert!(last > 10.0, "final cost {last}");
    }

    #[test]
    fn audit_passes_for_a_linear_rate() {
        let net = birth_net();
        let cover = unit_cover(&net);
        let vs = [16u64, 64, 256, 1024];
        let x0s: Vec<Vec<i64>> = vs.iter().map(|_| vec![1]).collect();
        let audit = escape_sequence_audit(&net, &cover, 0, &vs, &x0s).unwrap();
        assert!(audit.prefix_vanishing, "{:?}", audit.prefix_rungs);
        assert!(audit.integrals_vanishing, "{:?}", audit.integral_ladders);
        assert!(audit.monotonicity.passed, "{:?}", audit.monotonicity);
        assert!(audit.passed);
        // Prefix values are (1/v) log v at one particle.
        for rung in &audit.prefix_rungs {
            let expect = (rung.v as f64).ln() / rung.v as f64;
            assert!((rung.max - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn audit_fails_for_an_exponentially_frozen_rate() {
        let net = frozen_net();
        let cover = unit_cover(&net);
        let vs = [16u64, 64, 256, 1024];
        let x0s: Vec<Vec<i64>> = vs.iter().map(|_| vec![1]).collect();
        let audit = escape_sequence_audit(&net, &cover, 0, &vs, &x0s).unwrap();
        // Lambda = exp(-v) at one particle, so (1/v)|log Lambda| = 1.
        for rung in &audit.prefix_rungs {
            assert!((rung.max - 1.0).abs() < 1e-12, "{rung:?}");
        }
        assert!(!audit.prefix_vanishing);
        assert!(audit.integral_ladders[0].divergent);
        assert!(!audit.integrals_vanishing);
        assert!(audit.monotonicity.passed, "rate increases along +w");
        assert!(!audit.passed);
    }

    #[test]
    fn monotonicity_violation_is_witnessed() {
        // A rate that peaks inside the region and falls back: decreasing
        // along +w beyond the peak, detected wherever the rate starts
        // below the threshold.
        let net = parse_model(
            r#"{
                "name": "bump",
                "species": ["A"],
                "reactions": [
                    {"in": {}, "out": {"A": 1},
                     "rate": {"type": "expr", "formula": "x[A] * (0.6 - x[A])"}}
                ]
            }"#,
        )
        .unwrap();
        let cover = unit_cover(&net);
        let vs = [16u64, 64];
        let x0s = vec![vec![1], vec![1]];
        let audit = escape_sequence_audit(&net, &cover, 0, &vs, &x0s).unwrap();
        assert!(!audit.monotonicity.passed);
        assert!(audit.monotonicity.first_violation.is_some());
        assert!(!audit.passed);
    }

    #[test]
    fn event_bound_is_finite_and_vanishes_with_the_window() {
        let net = birth_net();
        let cover = unit_cover(&net);
        let opts = QuadOpts::default();
        let mut prev = f64::NEG_INFINITY;
        for t_delta in [1e-2, 1e-3, 1e-4] {
            let bound =
                escape_event_bound(&net, &cover, 0, &[0.0], t_delta, 100, &opts).unwrap();
            assert!(bound.value.is_finite());
            assert!(bound.value < 0.0, "a log-probability bound: {bound:?}");
            assert!(bound.value > prev, "shrinking windows cost less");
            prev = bound.value;
        }
        assert!(prev > -1e-2, "bound near zero for tiny windows, got {prev}");
    }

    #[test]
    fn event_bound_diverges_for_frozen_rates() {
        let net = frozen_net();
        let cover = unit_cover(&net);
        let opts = QuadOpts::default();
        let bound = escape_event_bound(&net, &cover, 0, &[0.0], 1e-3, 100, &opts).unwrap();
        assert!(bound.diverged);
        assert_eq!(bound.value, f64::NEG_INFINITY);
    }

    #[test]
    fn event_bound_rejects_oversized_windows() {
        let net = birth_net();
        let cover = unit_cover(&net);
        let opts = QuadOpts::default();
        // alpha / n = 1, Lipschitz of lambda(x) = x is 1, so the cap is
        // about eps_dblprime / 1.5 = 0.1667; a window of 2 must fail.
        let err = escape_event_bound(&net, &cover, 0, &[0.0], 2.0, 100, &opts).unwrap_err();
        assert!(matches!(err, Error::Invalid(_)), "got {err:?}");
    }
}
