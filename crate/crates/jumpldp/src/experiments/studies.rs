//! End-to-end studies over volume and resolution ladders.
//!
//! Four studies:
//! * [`ldp_marginal_study`]: probability of a marginal event per volume,
//!   by exact transients or Monte Carlo, with the scaled log and a
//!   Richardson-extrapolated limit (the error is O(1/v), so one
//!   extrapolation order suffices).
//! * [`minimize_endpoint_action`]: minimize the discretized action over
//!   piecewise-linear paths on a uniform time grid with both endpoints
//!   pinned, refining the grid coarse-to-fine and flagging ladders whose
//!   minimum keeps climbing (the continuum infimum is then likely
//!   infinite, as happens for paths forced to leave a point where all
//!   rates vanish).
//! * [`divergence_probe`]: action of a path restricted to `[t_eps, T]`
//!   where it first moves `eps` away from its start, fitted against
//!   `log(1/eps)`; a slope on the order of the model's freeze constant
//!   indicates a divergent full-window action.
//! * [`escape_event_study`]: Monte Carlo frequency of the boundary escape
//!   event (the escape pattern repeated `floor((v/alpha) t_delta)` times,
//!   landing near `x0 + t_delta w`), compared per rung against the
//!   analytic lower bound.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactdist::{count_threshold, TruncatedChain};
use crate::experiments::result::StudyResult;
use crate::network::ReactionNetwork;
use crate::numeric::linalg::dot;
use crate::numeric::rng::RngStream;
use crate::numeric::stats::{fit_slope, richardson1, wilson_interval, Z95};
use crate::path::MacroPath;
use crate::pathlab::cover::Cover;
use crate::pathlab::escape::escape_event_bound;
use crate::ratefn::{lagrangian, path_action, NewtonOpts, QuadOpts};
use crate::simulator::ssa_simulate;

/// Mix a per-rung tag into a Monte Carlo seed so that rungs of one study
/// draw from disjoint substream families regardless of ladder order.
fn rung_seed(seed: u64, tag: u64) -> u64 {
    seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn scaled_log(p: f64, v: u64) -> f64 {
    if p > 0.0 {
        p.ln() / v as f64
    } else {
        f64::NEG_INFINITY
    }
}

/// The event `{x_coord >= delta}` on the concentration scale, evaluated on
/// integer counts with the threshold snapping of [`count_threshold`].
pub fn threshold_event(coord: usize, delta: f64) -> impl Fn(&[i64], u64) -> bool + Sync + Copy {
    move |counts: &[i64], v: u64| counts[coord] >= count_threshold(v, delta)
}

/// How each rung probability of [`ldp_marginal_study`] is computed.
#[derive(Debug, Clone)]
pub enum MarginalMode {
    /// Uniformization on a breadth-first truncation of the chain; the sink
    /// mass widens the reported upper bound.
    Exact { max_states: usize, tol: f64 },
    /// Empirical frequency over independent trajectories; the bracket is
    /// the 95% Wilson interval.
    Mc { trials: u64, seed: u64 },
}

/// Probability ladder for a marginal event at time `t`.
///
/// Rows are `(v, p, p_low, p_high, scaled_log)` with
/// `scaled_log = (1/v) log p` (`-inf` for an empty rung). When the last
/// two rungs are positive, the summary carries `limit`, the first-order
/// Richardson extrapolation in `1/v` of the scaled log. The verdict
/// `all_rungs_positive` flags rungs with zero observed probability.
pub fn ldp_marginal_study(
    net: &ReactionNetwork,
    x0_rule: &(dyn Fn(u64) -> Vec<i64> + Sync),
    event: &(dyn Fn(&[i64], u64) -> bool + Sync),
    t: f64,
    v_ladder: &[u64],
    mode: &MarginalMode,
) -> Result<StudyResult> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Invalid(format!(
            "marginal study time must be positive, got {t}"
        )));
    }
    if v_ladder.is_empty() {
        return Err(Error::Invalid("volume ladder is empty".into()));
    }
    if v_ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid(
            "volume ladder must be strictly increasing".into(),
        ));
    }
    match mode {
        MarginalMode::Exact { max_states, tol } => {
            if *max_states == 0 || !(*tol > 0.0 && *tol < 1.0) {
                return Err(Error::Invalid(
                    "exact mode needs a positive state cap and tol in (0,1)".into(),
                ));
            }
        }
        MarginalMode::Mc { trials, .. } => {
            if *trials == 0 {
                return Err(Error::Invalid("mc mode needs at least one trial".into()));
            }
        }
    }

    let rungs: Result<Vec<[f64; 5]>> = v_ladder
        .par_iter()
        .map(|&v| {
            let x0 = x0_rule(v);
            match mode {
                MarginalMode::Exact { max_states, tol } => {
                    let chain = TruncatedChain::build(net, v, &x0, *max_states)?;
                    let dist = chain.transient_distribution(t, *tol)?;
                    let (lo, hi) = dist.event_probability(|s| event(s, v));
                    Ok([v as f64, lo, lo, hi, scaled_log(lo, v)])
                }
                MarginalMode::Mc { trials, seed } => {
                    let hits = (0..*trials)
                        .into_par_iter()
                        .map(|i| {
                            let mut stream = RngStream::substream(rung_seed(*seed, v), i);
                            let path = ssa_simulate(net, v, &x0, t, &mut stream)?;
                            Ok(u64::from(event(&path.final_counts(net), v)))
                        })
                        .sum::<Result<u64>>()?;
                    let freq = hits as f64 / *trials as f64;
                    let (wl, wh) = wilson_interval(hits, *trials, Z95);
                    Ok([v as f64, freq, wl, wh, scaled_log(freq, v)])
                }
            }
        })
        .collect();
    let rungs = rungs?;

    let mut out = StudyResult::new("ldp_marginal", &["v", "p", "p_low", "p_high", "scaled_log"]);
    out.param("t", t);
    out.param(
        "mode",
        match mode {
            MarginalMode::Exact { .. } => "exact",
            MarginalMode::Mc { .. } => "mc",
        },
    );
    match mode {
        MarginalMode::Exact { max_states, tol } => {
            out.param("max_states", max_states);
            out.param("tol", tol);
        }
        MarginalMode::Mc { trials, seed } => {
            out.param("trials", trials);
            out.param("seed", seed);
        }
    }
    for row in &rungs {
        out.push_row(row.to_vec());
    }
    out.set_verdict("all_rungs_positive", rungs.iter().all(|r| r[1] > 0.0));
    let last = rungs.last().unwrap();
    out.set_summary("last_scaled_log", last[4]);
    if rungs.len() >= 2 {
        let a = &rungs[rungs.len() - 2];
        let b = last;
        if a[4].is_finite() && b[4].is_finite() {
            out.set_summary("limit", richardson1(a[0], a[4], b[0], b[4]));
        }
    }
    Ok(out)
}

/// Options for the endpoint-pinned minimization.
#[derive(Debug, Clone)]
pub struct MinimizeOpts {
    /// Gradient iterations allowed per grid level.
    pub max_iters: usize,
    /// Stop a level once the gradient sup-norm falls below this.
    pub grad_tol: f64,
    /// Pointwise dual solver options.
    pub newton: NewtonOpts,
}

impl Default for MinimizeOpts {
    fn default() -> Self {
        MinimizeOpts {
            max_iters: 4000,
            grad_tol: 1e-7,
            newton: NewtonOpts::default(),
        }
    }
}

/// Per-doubling growth of the level minima (relative to `1 + |value|`)
/// above which the refinement ladder is reported divergent.
pub const DIVERGENCE_GROWTH: f64 = 0.02;

#[derive(Debug, Clone)]
pub struct MinimizeReport {
    /// Minimizer on the finest grid.
    pub path: MacroPath,
    /// Minimized discrete action on the finest grid.
    pub value: f64,
    /// Grid sizes of the coarse-to-fine ladder; the last equals the
    /// requested grid.
    pub level_grids: Vec<usize>,
    /// Minimized value per level.
    pub level_values: Vec<f64>,
    /// Gradient iterations summed over levels.
    pub iterations: usize,
    /// The finest level met the gradient tolerance or stalled at floating
    /// point resolution (as opposed to hitting the iteration cap).
    pub converged: bool,
    /// The level minima keep climbing under refinement at a rate of at
    /// least [`DIVERGENCE_GROWTH`] per doubling: the continuum infimum
    /// shows no sign of being finite.
    pub divergent: bool,
}

/// Minimize the discretized action over piecewise-linear paths from `x0`
/// to `target` on `[0, t_end]` with a uniform `grid_n`-segment grid.
///
/// The discrete action is the midpoint rule per segment,
/// `sum_i h * l(midpoint_i, slope_i)`. Interior breakpoints move by
/// projected gradient descent with spectral step lengths: steps follow
/// finite differences along an orthonormal basis of the span of the jump
/// vectors (moves off that span have infinite cost), points clamp to the
/// nonnegative orthant, and a nonmonotone backtracking line search
/// safeguards each step. Levels run coarse to fine from an 8-segment
/// grid, each warm-started by interpolating the previous minimizer, which
/// both conditions the search and yields the refinement ladder used for
/// the divergence flag.
pub fn minimize_endpoint_action(
    net: &ReactionNetwork,
    x0: &[f64],
    target: &[f64],
    t_end: f64,
    grid_n: usize,
    opts: &MinimizeOpts,
) -> Result<MinimizeReport> {
    let dim = net.dim();
    if x0.len() != dim || target.len() != dim {
        return Err(Error::Invalid(format!(
            "endpoints must have dimension {dim}"
        )));
    }
    if x0.iter().chain(target).any(|c| !c.is_finite() || *c < 0.0) {
        return Err(Error::Invalid(
            "endpoints must be finite and nonnegative".into(),
        ));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Invalid(format!(
            "horizon must be positive, got {t_end}"
        )));
    }
    if grid_n < 8 {
        return Err(Error::Invalid(format!(
            "grid must have at least 8 segments, got {grid_n}"
        )));
    }
    if opts.max_iters == 0 {
        return Err(Error::Invalid("iteration cap must be positive".into()));
    }

    // Orthonormal basis of the span of the jump vectors; breakpoint moves
    // outside it cost +inf, so the search never probes them.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for g in net.jumps_f64() {
        let mut r = g.clone();
        for q in &basis {
            let c = dot(&r, q);
            for (ri, qi) in r.iter_mut().zip(q) {
                *ri -= c * qi;
            }
        }
        let norm = dot(&r, &r).sqrt();
        if norm > 1e-10 * (1.0 + dot(g, g).sqrt()) {
            for ri in r.iter_mut() {
                *ri /= norm;
            }
            basis.push(r);
        }
    }
    if basis.is_empty() {
        return Err(Error::Invalid(
            "all jump vectors are zero; no path can move".into(),
        ));
    }
    // The chord x0 -> target must itself lie in the span, otherwise no
    // finite-cost path connects the endpoints.
    {
        let mut r: Vec<f64> = target.iter().zip(x0).map(|(t, x)| t - x).collect();
        let scale = dot(&r, &r).sqrt();
        for q in &basis {
            let c = dot(&r, q);
            for (ri, qi) in r.iter_mut().zip(q) {
                *ri -= c * qi;
            }
        }
        if dot(&r, &r).sqrt() > 1e-9 * (1.0 + scale) {
            return Err(Error::Invalid(
                "target is not reachable: the chord leaves the span of the jump vectors".into(),
            ));
        }
    }

    let seg_cost = |a: &[f64], b: &[f64], h: f64| -> f64 {
        let mid: Vec<f64> = a.iter().zip(b).map(|(ai, bi)| 0.5 * (ai + bi)).collect();
        let slope: Vec<f64> = b.iter().zip(a).map(|(bi, ai)| (bi - ai) / h).collect();
        match lagrangian(net, &mid, &slope, &opts.newton) {
            Ok(res) => h * res.value,
            Err(_) => f64::INFINITY,
        }
    };

    let mut grids: Vec<usize> = Vec::new();
    let mut g = 8usize;
    while g < grid_n {
        grids.push(g);
        g *= 2;
    }
    grids.push(grid_n);

    let mut level_values: Vec<f64> = Vec::new();
    let mut iterations = 0usize;
    let mut converged = false;

    // Current breakpoints, refined level to level.
    let mut pts: Vec<Vec<f64>> = Vec::new();
    for (level, &n) in grids.iter().enumerate() {
        let h = t_end / n as f64;
        pts = if level == 0 {
            (0..=n)
                .map(|i| {
                    let s = i as f64 / n as f64;
                    x0.iter()
                        .zip(target)
                        .map(|(a, b)| (a + s * (b - a)).max(0.0))
                        .collect()
                })
                .collect()
        } else {
            // Piecewise-linear interpolation of the coarser minimizer onto
            // the finer uniform grid.
            let m = grids[level - 1];
            (0..=n)
                .map(|i| {
                    let s = i as f64 * m as f64 / n as f64;
                    let j = (s.floor() as usize).min(m - 1);
                    let u = s - j as f64;
                    pts[j]
                        .iter()
                        .zip(&pts[j + 1])
                        .map(|(a, b)| (a + u * (b - a)).max(0.0))
                        .collect()
                })
                .collect()
        };

        let total = |pts: &[Vec<f64>]| -> f64 {
            (0..n).map(|i| seg_cost(&pts[i], &pts[i + 1], h)).sum()
        };
        // Directional derivatives along the span basis at each interior
        // breakpoint; only the two adjacent segments change.
        let grad = |pts: &[Vec<f64>]| -> Vec<Vec<f64>> {
            (1..n)
                .into_par_iter()
                .map(|k| {
                    let scale = 1.0 + pts[k].iter().fold(0.0f64, |m, c| m.max(c.abs()));
                    let e = 1e-6 * scale;
                    basis
                        .iter()
                        .map(|q| {
                            let shift = |sgn: f64| -> Vec<f64> {
                                pts[k]
                                    .iter()
                                    .zip(q)
                                    .map(|(c, qi)| c + sgn * e * qi)
                                    .collect()
                            };
                            let cost_at = |p: &[f64]| -> f64 {
                                seg_cost(&pts[k - 1], p, h) + seg_cost(p, &pts[k + 1], h)
                            };
                            let plus = shift(1.0);
                            let minus = shift(-1.0);
                            let minus_ok = minus.iter().all(|c| *c >= 0.0);
                            let cp = cost_at(&plus);
                            if minus_ok {
                                let cm = cost_at(&minus);
                                if cp.is_finite() && cm.is_finite() {
                                    return (cp - cm) / (2.0 * e);
                                }
                            }
                            let c0 = cost_at(&pts[k]);
                            if cp.is_finite() && c0.is_finite() {
                                (cp - c0) / e
                            } else {
                                0.0
                            }
                        })
                        .collect()
                })
                .collect()
        };
        let step_to = |pts: &[Vec<f64>], g: &[Vec<f64>], step: f64| -> Vec<Vec<f64>> {
            let mut out = pts.to_vec();
            for k in 1..n {
                for (j, q) in basis.iter().enumerate() {
                    for (c, qi) in out[k].iter_mut().zip(q) {
                        *c -= step * g[k - 1][j] * qi;
                    }
                }
                for c in out[k].iter_mut() {
                    *c = c.max(0.0);
                }
            }
            out
        };

        let mut f = total(&pts);
        if !f.is_finite() {
            return Err(Error::Invalid(
                "initial path has infinite cost; choose endpoints inside the rate domain".into(),
            ));
        }
        let mut gr = grad(&pts);
        let g_inf = |g: &[Vec<f64>]| {
            g.iter()
                .flatten()
                .fold(0.0f64, |m, x| m.max(x.abs()))
        };
        let g_dot = |a: &[Vec<f64>], b: &[Vec<f64>]| -> f64 {
            a.iter()
                .flatten()
                .zip(b.iter().flatten())
                .map(|(x, y)| x * y)
                .sum()
        };
        let mut step = 1.0 / g_inf(&gr).max(1e-6);
        let mut f_hist = vec![f];
        let mut stalls = 0usize;
        let mut level_converged = false;
        for _ in 0..opts.max_iters {
            iterations += 1;
            let pg = g_inf(&gr);
            if pg <= opts.grad_tol {
                level_converged = true;
                break;
            }
            let f_ref = f_hist.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
            let g2 = g_dot(&gr, &gr);
            let mut trial_step = step.clamp(1e-14, 1e12);
            let mut accepted = None;
            for _ in 0..48 {
                let cand = step_to(&pts, &gr, trial_step);
                let fc = total(&cand);
                if fc <= f_ref - 1e-4 * trial_step * g2 {
                    accepted = Some((cand, fc));
                    break;
                }
                trial_step *= 0.5;
            }
            let Some((cand, fc)) = accepted else {
                // No acceptable step at any length: the iterate is at
                // floating point resolution of a local minimum.
                level_converged = true;
                break;
            };
            let g_new = grad(&cand);
            // Spectral (Barzilai-Borwein) step from the accepted move.
            let s: Vec<Vec<f64>> = (1..n)
                .map(|k| {
                    basis
                        .iter()
                        .map(|q| {
                            cand[k]
                                .iter()
                                .zip(&pts[k])
                                .zip(q)
                                .map(|((cnew, cold), qi)| (cnew - cold) * qi)
                                .sum()
                        })
                        .collect()
                })
                .collect();
            let y: Vec<Vec<f64>> = g_new
                .iter()
                .zip(&gr)
                .map(|(a, b)| a.iter().zip(b).map(|(x, z)| x - z).collect())
                .collect();
            let sy = g_dot(&s, &y);
            let ss = g_dot(&s, &s);
            step = if sy > 1e-300 {
                (ss / sy).clamp(1e-12, 1e10)
            } else {
                (trial_step * 2.0).clamp(1e-12, 1e10)
            };
            if (f - fc).abs() <= 1e-13 * (1.0 + f.abs()) {
                stalls += 1;
                if stalls >= 5 {
                    level_converged = true;
                    pts = cand;
                    f = fc;
                    break;
                }
            } else {
                stalls = 0;
            }
            pts = cand;
            f = fc;
            gr = g_new;
            f_hist.push(f);
            if f_hist.len() > 8 {
                f_hist.remove(0);
            }
        }
        level_values.push(f);
        if level + 1 == grids.len() {
            converged = level_converged;
        }
    }

    let n = *grids.last().unwrap();
    let times: Vec<f64> = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();
    let path = MacroPath::new(times, pts)?;
    let value = *level_values.last().unwrap();

    // Divergence: both of the last two refinements raised the minimum by
    // at least DIVERGENCE_GROWTH per doubling (growth normalized by the
    // log of the grid ratio, so the final non-doubling step counts fairly).
    let mut divergent = false;
    if level_values.len() >= 3 {
        let l = level_values.len();
        divergent = (l - 2..l).all(|i| {
            let ratio = grids[i] as f64 / grids[i - 1] as f64;
            let growth = (level_values[i] - level_values[i - 1]) / ratio.ln() * std::f64::consts::LN_2;
            growth > DIVERGENCE_GROWTH * (1.0 + level_values[i - 1].abs())
        });
    }

    Ok(MinimizeReport {
        path,
        value,
        level_grids: grids,
        level_values,
        iterations,
        converged,
        divergent,
    })
}

/// Action of `z` restricted to `[t_eps, T]` for each `eps` of a
/// descending ladder, where `t_eps` is the first time `z` moves `eps`
/// away from `z(0)`.
///
/// Rows are `(eps, t_eps, action)`. The summary carries the fitted
/// `slope` of action against `log(1/eps)`, the decision `threshold
/// = 0.5 * k_scale`, and `divergent` (1 when the slope reaches the
/// threshold: the action grows like a multiple of `log(1/eps)`, so the
/// full-window action is infinite). `k_scale` calibrates the threshold
/// to the model's freeze constant; pass 1 for rates vanishing like the
/// coordinate itself.
pub fn divergence_probe(
    net: &ReactionNetwork,
    z: &MacroPath,
    eps_ladder: &[f64],
    k_scale: f64,
    quad: &QuadOpts,
) -> Result<StudyResult> {
    if z.dim() != net.dim() {
        return Err(Error::Invalid(format!(
            "path dimension {} does not match the model dimension {}",
            z.dim(),
            net.dim()
        )));
    }
    if eps_ladder.len() < 2 {
        return Err(Error::Invalid(
            "divergence probe needs at least two eps rungs".into(),
        ));
    }
    if eps_ladder
        .windows(2)
        .any(|w| !(w[0] > w[1] && w[1] > 0.0))
    {
        return Err(Error::Invalid(
            "eps ladder must be strictly decreasing and positive".into(),
        ));
    }
    if !(k_scale > 0.0 && k_scale.is_finite()) {
        return Err(Error::Invalid(format!(
            "freeze scale must be positive, got {k_scale}"
        )));
    }
    let start = z.eval(z.t_start());
    let dist_at = |t: f64| -> f64 {
        let p = z.eval(t);
        p.iter()
            .zip(&start)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };

    let rows: Result<Vec<[f64; 3]>> = eps_ladder
        .par_iter()
        .map(|&eps| {
            // First time the displacement reaches eps: scan breakpoints for
            // the first segment whose far end is at distance >= eps, then
            // bisect inside it (displacement is continuous).
            let times = z.times();
            let mut bracket = None;
            for i in 0..z.segment_count() {
                if dist_at(times[i + 1]) >= eps {
                    bracket = Some((times[i], times[i + 1]));
                    break;
                }
            }
            let Some((mut lo, mut hi)) = bracket else {
                return Err(Error::Invalid(format!(
                    "path never moves {eps} away from its start; it does not enter the interior"
                )));
            };
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if dist_at(mid) >= eps {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let t_eps = hi;
            if !(t_eps < z.t_end()) {
                return Err(Error::Invalid(format!(
                    "displacement {eps} is reached only at the horizon"
                )));
            }
            let action = path_action(net, &z.restrict(t_eps, z.t_end())?, quad)?;
            Ok([eps, t_eps, action.value])
        })
        .collect();
    let rows = rows?;

    let mut out = StudyResult::new("divergence_probe", &["eps", "t_eps", "action"]);
    out.param("k_scale", k_scale);
    out.param("t_end", z.t_end());
    for row in &rows {
        out.push_row(row.to_vec());
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for row in &rows {
        if row[2].is_finite() {
            xs.push((1.0 / row[0]).ln());
            ys.push(row[2]);
        }
    }
    out.set_verdict("fit_has_enough_rungs", xs.len() >= 2);
    let slope = if xs.len() >= 2 {
        fit_slope(&xs, &ys)
    } else {
        f64::INFINITY
    };
    let threshold = 0.5 * k_scale;
    out.set_summary("slope", slope);
    out.set_summary("threshold", threshold);
    out.set_summary("divergent", f64::from(u8::from(slope >= threshold)));
    Ok(out)
}

/// Monte Carlo frequency of the boundary escape event per volume,
/// compared against the analytic lower bound.
///
/// The event at volume `v`: the first `n_plus * L` jumps follow the
/// region's escape pattern cyclically, where `L` is the pattern length
/// and `n_plus = floor((v/alpha) t_delta)`, and the state at `t_delta`
/// lands within `delta/4` of `x0/v + t_delta w` (a ball wide enough to
/// absorb the floor's rounding once `v >= 8 alpha / delta`). The window
/// is `t_delta = delta/6`, inside the bound's pace cap for the built-in
/// covers. Rows are `(v, n_plus, hits, freq, scaled_log, bound)`; the
/// verdict `observed_at_least_bound` checks `(1/v) log freq >= bound` on
/// every rung with hits, and `zero_hit_rungs` counts empty rungs (the
/// expected outcome at large `v` for a lower bound on a vanishing
/// probability).
pub fn escape_event_study(
    net: &ReactionNetwork,
    cover: &Cover,
    region_id: usize,
    x0_rule: &(dyn Fn(u64) -> Vec<i64> + Sync),
    v_ladder: &[u64],
    delta: f64,
    trials: u64,
    seed: u64,
    quad: &QuadOpts,
) -> Result<StudyResult> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Invalid(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if v_ladder.is_empty() {
        return Err(Error::Invalid("volume ladder is empty".into()));
    }
    if trials == 0 {
        return Err(Error::Invalid("need at least one trial".into()));
    }
    if region_id >= cover.regions().len() {
        return Err(Error::Invalid(format!("region {region_id} out of range")));
    }
    let region = cover.region(region_id);
    if region.escape.is_empty() {
        return Err(Error::Invalid(format!(
            "region {region_id} has no escape sequence"
        )));
    }
    let t_delta = delta / 6.0;
    let radius = delta / 4.0;
    let pattern = &region.escape;
    let alpha = region.alpha;

    let rows: Result<Vec<[f64; 6]>> = v_ladder
        .par_iter()
        .map(|&v| {
            if v == 0 {
                return Err(Error::Invalid("volume must be positive".into()));
            }
            let x0 = x0_rule(v);
            if x0.len() != net.dim() {
                return Err(Error::Invalid(
                    "start rule dimension does not match the model".into(),
                ));
            }
            let x0_conc: Vec<f64> = x0.iter().map(|&c| c as f64 / v as f64).collect();
            let center: Vec<f64> = x0_conc
                .iter()
                .zip(&region.w)
                .map(|(x, w)| x + t_delta * w)
                .collect();
            let n_plus = ((v as f64 / alpha) * t_delta).floor() as u64;
            let need = n_plus as usize * pattern.len();
            let hits = (0..trials)
                .into_par_iter()
                .map(|i| {
                    let mut stream = RngStream::substream(rung_seed(seed, v), i);
                    let path = ssa_simulate(net, v, &x0, t_delta, &mut stream)?;
                    if path.n_jumps() < need {
                        return Ok(0u64);
                    }
                    let patterned = path.reactions[..need]
                        .iter()
                        .enumerate()
                        .all(|(j, &r)| r == pattern[j % pattern.len()]);
                    if !patterned {
                        return Ok(0u64);
                    }
                    let end = path.final_counts(net);
                    let d2: f64 = end
                        .iter()
                        .zip(&center)
                        .map(|(&c, m)| {
                            let x = c as f64 / v as f64;
                            (x - m) * (x - m)
                        })
                        .sum();
                    Ok(u64::from(d2.sqrt() <= radius))
                })
                .sum::<Result<u64>>()?;
            let freq = hits as f64 / trials as f64;
            let bound = escape_event_bound(net, cover, region_id, &x0_conc, t_delta, v, quad)?;
            Ok([
                v as f64,
                n_plus as f64,
                hits as f64,
                freq,
                scaled_log(freq, v),
                bound.value,
            ])
        })
        .collect();
    let rows = rows?;

    let mut out = StudyResult::new(
        "escape_event",
        &["v", "n_plus", "hits", "freq", "scaled_log", "bound"],
    );
    out.param("region", region_id);
    out.param("delta", delta);
    out.param("t_delta", t_delta);
    out.param("radius", radius);
    out.param("trials", trials);
    out.param("seed", seed);
    let mut zero_rungs = 0u64;
    let mut respected = true;
    for row in &rows {
        if row[2] == 0.0 {
            zero_rungs += 1;
        } else if row[4] < row[5] {
            respected = false;
        }
        out.push_row(row.to_vec());
    }
    out.set_summary("zero_hit_rungs", zero_rungs as f64);
    out.set_verdict("observed_at_least_bound", respected);
    Ok(out)
}
