//! Exact stochastic simulation of the microscopic jump process, flux
//! augmentation, reachable sets, and Monte Carlo tube probabilities.
//!
//! The direct method: at state `counts` the total jump rate is
//! `v * sum_r Lambda^v_r`, the holding time is exponential with that rate,
//! and the firing reaction is drawn proportionally to the individual rates.
//! States with zero total rate are absorbing. A hard cap on the number of
//! jumps guards against explosive models.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::{ReactionNetwork, ScaledState};
use crate::numeric::rng::RngStream;
use crate::numeric::stats::{median, wilson_interval, Z95};
use crate::numeric::fmt_float;
use crate::path::MacroPath;

/// Explosion guard: one trajectory may take at most this many jumps.
pub const JUMP_CAP: usize = 10_000_000;

/// One realized trajectory: initial counts plus the jump times and fired
/// reactions. States along the way are replayed from the jump vectors
/// rather than stored, which keeps long trajectories small.
#[derive(Debug, Clone)]
pub struct JumpPath {
    pub v: u64,
    pub x0: Vec<i64>,
    pub times: Vec<f64>,
    pub reactions: Vec<usize>,
    pub t_end: f64,
}

impl JumpPath {
    pub fn n_jumps(&self) -> usize {
        self.times.len()
    }

    /// Visit every constant interval `[t_lo, t_hi]` with its state.
    pub fn walk(&self, net: &ReactionNetwork, mut visit: impl FnMut(f64, f64, &[i64])) {
        let mut counts = self.x0.clone();
        let mut t_lo = 0.0;
        for (k, &t) in self.times.iter().enumerate() {
            visit(t_lo, t, &counts);
            for (c, &j) in counts.iter_mut().zip(net.jump(self.reactions[k])) {
                *c += j;
            }
            t_lo = t;
        }
        visit(t_lo, self.t_end, &counts);
    }

    pub fn final_counts(&self, net: &ReactionNetwork) -> Vec<i64> {
        let mut counts = self.x0.clone();
        for &r in &self.reactions {
            for (c, &j) in counts.iter_mut().zip(net.jump(r)) {
                *c += j;
            }
        }
        counts
    }

    /// State (counts) at time t, right-continuous in t.
    pub fn counts_at(&self, net: &ReactionNetwork, t: f64) -> Vec<i64> {
        let mut counts = self.x0.clone();
        for (k, &tk) in self.times.iter().enumerate() {
            if tk > t {
                break;
            }
            for (c, &j) in counts.iter_mut().zip(net.jump(self.reactions[k])) {
                *c += j;
            }
        }
        counts
    }

    /// Uniform distance to a macroscopic path over [0, t_end].
    ///
    /// Between jumps the state is constant and the reference is piecewise
    /// linear, so the distance is convex on each piece; it suffices to check
    /// interval endpoints and the reference path's breakpoints.
    pub fn sup_distance_to(&self, net: &ReactionNetwork, z: &MacroPath) -> f64 {
        let vf = self.v as f64;
        let mut best = 0.0f64;
        let bps = z.times();
        self.walk(net, |t_lo, t_hi, counts| {
            let x: Vec<f64> = counts.iter().map(|&c| c as f64 / vf).collect();
            let mut check = |t: f64| {
                let zt = z.eval(t);
                let d2: f64 = x.iter().zip(&zt).map(|(a, b)| (a - b) * (a - b)).sum();
                best = best.max(d2.sqrt());
            };
            check(t_lo);
            check(t_hi);
            for &bp in bps {
                if bp > t_lo && bp < t_hi {
                    check(bp);
                }
            }
        });
        best
    }

    /// Trajectory CSV `t,reaction,x_1..x_d`, with an optional cumulative
    /// flux block `w_1..w_R` (firings of each reaction divided by v). The
    /// first and last rows carry an empty reaction field.
    pub fn to_csv(&self, net: &ReactionNetwork, with_flux: bool) -> String {
        let d = net.dim();
        let nr = net.n_reactions();
        let vf = self.v as f64;
        let mut out = String::from("t,reaction");
        for k in 1..=d {
            out.push_str(&format!(",x_{k}"));
        }
        if with_flux {
            for k in 1..=nr {
                out.push_str(&format!(",w_{k}"));
            }
        }
        out.push('\n');
        let mut counts = self.x0.clone();
        let mut fired = vec![0u64; nr];
        let push_row = |t: f64, reaction: Option<usize>, counts: &[i64], fired: &[u64]| {
            let mut row = fmt_float(t);
            row.push(',');
            if let Some(r) = reaction {
                row.push_str(&r.to_string());
            }
            for &c in counts {
                row.push(',');
                row.push_str(&fmt_float(c as f64 / vf));
            }
            if with_flux {
                for &n in fired {
                    row.push(',');
                    row.push_str(&fmt_float(n as f64 / vf));
                }
            }
            row.push('\n');
            row
        };
        out.push_str(&push_row(0.0, None, &counts, &fired));
        for (k, &t) in self.times.iter().enumerate() {
            let r = self.reactions[k];
            for (c, &j) in counts.iter_mut().zip(net.jump(r)) {
                *c += j;
            }
            fired[r] += 1;
            out.push_str(&push_row(t, Some(r), &counts, &fired));
        }
        out.push_str(&push_row(self.t_end, None, &counts, &fired));
        out
    }
}

/// Simulate one trajectory from integer counts `x0` over `[0, t_max]`.
pub fn ssa_simulate(
    net: &ReactionNetwork,
    v: u64,
    x0: &[i64],
    t_max: f64,
    stream: &mut RngStream,
) -> Result<JumpPath> {
    if v == 0 {
        return Err(Error::Invalid("volume must be positive".into()));
    }
    if x0.len() != net.dim() {
        return Err(Error::Invalid(format!(
            "initial counts have dimension {}, model has {}",
            x0.len(),
            net.dim()
        )));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::Invalid(format!("horizon must be positive, got {t_max}")));
    }
    let nr = net.n_reactions();
    let mut state = ScaledState {
        v,
        counts: x0.to_vec(),
    };
    let mut rates = vec![0.0f64; nr];
    let mut t = 0.0f64;
    let mut times = Vec::new();
    let mut reactions = Vec::new();
    loop {
        if times.len() >= JUMP_CAP {
            return Err(Error::JumpCapExceeded {
                jumps: times.len(),
                t,
            });
        }
        let mut total = 0.0;
        for r in 0..nr {
            rates[r] = net.micro_rate(r, &state)?;
            total += rates[r];
        }
        if total <= 0.0 {
            break; // absorbing state
        }
        t += stream.exponential(v as f64 * total);
        if t >= t_max {
            break;
        }
        let u = stream.uniform() * total;
        let mut acc = 0.0;
        let mut fired = None;
        for (r, &rate) in rates.iter().enumerate() {
            acc += rate;
            if u < acc {
                fired = Some(r);
                break;
            }
        }
        // u == total can slip past every bucket by rounding; take the last
        // reaction that actually has positive rate.
        let fired = fired.unwrap_or_else(|| {
            (0..nr)
                .rev()
                .find(|&r| rates[r] > 0.0)
                .expect("total > 0 implies a positive rate")
        });
        for (c, &j) in state.counts.iter_mut().zip(net.jump(fired)) {
            *c += j;
        }
        times.push(t);
        reactions.push(fired);
    }
    Ok(JumpPath {
        v,
        x0: x0.to_vec(),
        times,
        reactions,
        t_end: t_max,
    })
}

/// Monte Carlo estimate of the tube probability
/// P( sup_{t <= T} |X^v(t) - z(t)| < delta ).
#[derive(Debug, Clone)]
pub struct TubeEstimate {
    pub trials: u64,
    pub hits: u64,
    pub p_hat: f64,
    /// 95% Wilson interval for the hit probability.
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// No trial hit the tube; `p_hat = 0` is then only an upper-bound claim.
    pub zero_hits: bool,
}

pub fn tube_probability_mc(
    net: &ReactionNetwork,
    v: u64,
    x0: &[i64],
    z: &MacroPath,
    delta: f64,
    trials: u64,
    seed: u64,
) -> Result<TubeEstimate> {
    if delta <= 0.0 {
        return Err(Error::Invalid("tube radius must be positive".into()));
    }
    if z.t_start().abs() > 1e-12 {
        return Err(Error::Invalid(
            "tube reference path must start at time zero".into(),
        ));
    }
    if trials == 0 {
        return Err(Error::Invalid("need at least one trial".into()));
    }
    let t_max = z.t_end();
    let results: Result<Vec<bool>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut stream = RngStream::substream(seed, i);
            let path = ssa_simulate(net, v, x0, t_max, &mut stream)?;
            Ok(path.sup_distance_to(net, z) < delta)
        })
        .collect();
    let hits = results?.iter().filter(|&&h| h).count() as u64;
    let (lo, hi) = wilson_interval(hits, trials, Z95);
    Ok(TubeEstimate {
        trials,
        hits,
        p_hat: hits as f64 / trials as f64,
        wilson_low: lo,
        wilson_high: hi,
        zero_hits: hits == 0,
    })
}

/// Sup-norm gap between simulated paths and the fluid limit.
#[derive(Debug, Clone)]
pub struct FluidGapSummary {
    pub gaps: Vec<f64>,
    pub median_gap: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn fluid_gap(
    net: &ReactionNetwork,
    v: u64,
    x0: &[i64],
    t_max: f64,
    fluid_steps: usize,
    blow_up: f64,
    trials: u64,
    seed: u64,
) -> Result<FluidGapSummary> {
    let x0_conc: Vec<f64> = x0.iter().map(|&c| c as f64 / v as f64).collect();
    let fluid = crate::network::fluid::fluid_limit(net, &x0_conc, t_max, fluid_steps, blow_up)?;
    let gaps: Result<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut stream = RngStream::substream(seed, i);
            let path = ssa_simulate(net, v, x0, t_max, &mut stream)?;
            Ok(path.sup_distance_to(net, &fluid))
        })
        .collect();
    let gaps = gaps?;
    let median_gap = median(&gaps);
    Ok(FluidGapSummary { gaps, median_gap })
}

/// All lattice states reachable from `x0` through reactions with positive
/// microscopic rate, restricted to concentrations inside the box [lo, hi].
/// Deterministic order (lexicographic in counts); errors out beyond `cap`
/// states.
pub fn reachable_set(
    net: &ReactionNetwork,
    v: u64,
    x0: &[i64],
    lo: &[f64],
    hi: &[f64],
    cap: usize,
) -> Result<Vec<Vec<i64>>> {
    use std::collections::{BTreeSet, VecDeque};
    if lo.len() != net.dim() || hi.len() != net.dim() || x0.len() != net.dim() {
        return Err(Error::Invalid("reachable_set arguments must match model dimension".into()));
    }
    let scale = lo
        .iter()
        .chain(hi.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-9 * (1.0 + scale);
    let vf = v as f64;
    let in_box = |counts: &[i64]| {
        counts
            .iter()
            .zip(lo.iter().zip(hi))
            .all(|(&c, (&l, &h))| {
                let x = c as f64 / vf;
                x >= l - tol && x <= h + tol
            })
    };
    let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut queue: VecDeque<Vec<i64>> = VecDeque::new();
    if in_box(x0) {
        seen.insert(x0.to_vec());
        queue.push_back(x0.to_vec());
    }
    while let Some(counts) = queue.pop_front() {
        let state = ScaledState {
            v,
            counts: counts.clone(),
        };
        for r in 0..net.n_reactions() {
            if net.is_uniformizing(r) {
                continue;
            }
            if net.micro_rate(r, &state)? <= 0.0 {
                continue;
            }
            let next: Vec<i64> = counts
                .iter()
                .zip(net.jump(r))
                .map(|(&c, &j)| c + j)
                .collect();
            if in_box(&next) && !seen.contains(&next) {
                if seen.len() >= cap {
                    return Err(Error::Numeric(format!(
                        "reachable set exceeded the cap of {cap} states"
                    )));
                }
                seen.insert(next.clone());
                queue.push_back(next);
            }
        }
    }
    Ok(seen.into_iter().collect())
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

    fn birth(k: f64) -> ReactionNetwork {
        ReactionNetwork::new(
            "birth".into(),
            vec!["A".into()],
            vec![mass(vec![0], vec![1], k)],
        )
        .unwrap()
    }

    #[test]
    fn same_seed_reproduces_the_trajectory() {
        let net = birth(2.0);
        let mut s1 = RngStream::substream(7, 0);
        let mut s2 = RngStream::substream(7, 0);
        let p1 = ssa_simulate(&net, 50, &[0], 1.0, &mut s1).unwrap();
        let p2 = ssa_simulate(&net, 50, &[0], 1.0, &mut s2).unwrap();
        assert_eq!(p1.times, p2.times);
        assert_eq!(p1.reactions, p2.reactions);
    }

    #[test]
    fn pure_birth_count_matches_poisson_moments() {
        // N(T) ~ Poisson(v k T). Mean test at five sigma.
        let net = birth(2.0);
        let (v, t) = (50u64, 1.0);
        let lam = 100.0;
        let trials = 400;
        let mut total = 0.0;
        for i in 0..trials {
            let mut s = RngStream::substream(11, i);
            let p = ssa_simulate(&net, v, &[0], t, &mut s).unwrap();
            total += p.n_jumps() as f64;
        }
        let mean = total / trials as f64;
        let sigma = (lam / trials as f64).sqrt();
        assert!(
            (mean - lam).abs() < 5.0 * sigma,
            "mean {mean} vs {lam} (sigma {sigma})"
        );
    }

    #[test]
    fn zero_rate_state_is_absorbing() {
        // A -> B from zero copies of A: no jumps at all.
        let net = ReactionNetwork::new(
            "decay".into(),
            vec!["A".into(), "B".into()],
            vec![mass(vec![1, 0], vec![0, 1], 1.0)],
        )
        .unwrap();
        let mut s = RngStream::new(1);
        let p = ssa_simulate(&net, 10, &[0, 0], 5.0, &mut s).unwrap();
        assert_eq!(p.n_jumps(), 0);
        let mut intervals = 0;
        p.walk(&net, |lo, hi, counts| {
            intervals += 1;
            assert_eq!((lo, hi), (0.0, 5.0));
            assert_eq!(counts, &[0, 0]);
        });
        assert_eq!(intervals, 1);
    }

    #[test]
    fn explosion_hits_the_jump_cap() {
        let net = birth(1e6);
        let mut s = RngStream::new(3);
        let err = ssa_simulate(&net, 1000, &[0], 100.0, &mut s).unwrap_err();
        assert!(matches!(err, Error::JumpCapExceeded { .. }), "{err}");
    }

    #[test]
    fn sup_distance_to_constant_path_tracks_farthest_state() {
        let net = birth(1.0);
        let mut s = RngStream::new(5);
        let v = 20u64;
        let p = ssa_simulate(&net, v, &[0], 2.0, &mut s).unwrap();
        let z = MacroPath::constant(&[0.0], 0.0, 2.0).unwrap();
        let want = p.final_counts(&net)[0] as f64 / v as f64;
        let got = p.sup_distance_to(&net, &z);
        assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
    }

    #[test]
    fn trajectory_csv_shape_and_flux() {
        let net = birth(2.0);
        let mut s = RngStream::new(9);
        let p = ssa_simulate(&net, 10, &[0], 1.0, &mut s).unwrap();
        let csv = p.to_csv(&net, true);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,reaction,x_1,w_1");
        assert_eq!(lines.len(), p.n_jumps() + 3);
        assert!(lines[1].starts_with("0.0000000000000000e0,,"));
        let last = lines.last().unwrap();
        assert!(last.starts_with("1.0000000000000000e0,,"));
        // Flux of the only reaction equals the final concentration here.
        let fields: Vec<&str> = last.split(',').collect();
        assert_eq!(fields[2], fields[3]);
    }

    #[test]
    fn tube_hit_rates_at_extreme_radii() {
        let net = birth(1.0);
        let z = MacroPath::line(&[0.0], &[1.0], 0.0, 1.0).unwrap();
        let wide = tube_probability_mc(&net, 30, &[0], &z, 50.0, 40, 13).unwrap();
        assert_eq!(wide.hits, 40);
        assert!(!wide.zero_hits);
        let narrow = tube_probability_mc(&net, 30, &[0], &z, 1e-9, 40, 13).unwrap();
        assert_eq!(narrow.hits, 0);
        assert!(narrow.zero_hits);
        assert_eq!(narrow.wilson_low, 0.0);
        assert!(narrow.wilson_high > 0.0);
    }

    #[test]
    fn reachable_set_of_the_dimer_chain() {
        // 2A -> B from 4 copies of A: (4,0) -> (2,1) -> (0,2).
        let net = ReactionNetwork::new(
            "dimer".into(),
            vec!["A".into(), "B".into()],
            vec![mass(vec![2, 0], vec![0, 1], 1.0)],
        )
        .unwrap();
        let states = reachable_set(&net, 4, &[4, 0], &[0.0, 0.0], &[2.0, 2.0], 100).unwrap();
        assert_eq!(states, vec![vec![0, 2], vec![2, 1], vec![4, 0]]);
    }

    #[test]
    fn fluid_gap_shrinks_with_volume() {
        // A <-> B: the gap scales like 1/sqrt(v), so two decades of volume
        // must shrink the median.
        let net = ReactionNetwork::new(
            "exchange".into(),
            vec!["A".into(), "B".into()],
            vec![
                mass(vec![1, 0], vec![0, 1], 1.0),
                mass(vec![0, 1], vec![1, 0], 1.0),
            ],
        )
        .unwrap();
        let small = fluid_gap(&net, 20, &[20, 0], 2.0, 400, 1e12, 21, 17).unwrap();
        let big = fluid_gap(&net, 2000, &[2000, 0], 2.0, 400, 1e12, 21, 17).unwrap();
        assert!(
            big.median_gap < small.median_gap,
            "median gaps: v=20 -> {}, v=2000 -> {}",
            small.median_gap,
            big.median_gap
        );
    }
}
