//! Exact transient distributions of the truncated microscopic chain.
//!
//! The chain is enumerated breadth-first from the initial state up to a
//! state cap; every transition that would leave the enumerated set is
//! redirected to an absorbing sink. Uniformization then gives the
//! distribution at time t:
//!
//! ```text
//! p(t) = sum_k Poisson(qt)[k] * p0 P^k,   P = I + Q/q,
//! ```
//!
//! with q at least the largest exit rate. Poisson weights are generated
//! incrementally in log space, and the series stops once the remaining tail
//! is below the requested tolerance (the spent mass beyond index K is at
//! most `w_{K+1} / (1 - qt/(K+2))` once `K + 2 > qt`).
//!
//! Event probabilities over the truncated chain are brackets: the mass that
//! reached the sink could have been anywhere, so
//! `lower = P(event, never truncated)` and `upper = lower + sink mass`.

use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::network::{ReactionNetwork, ScaledState};

/// Hard cap on uniformization terms; reached only when t * q is so large
/// that the transient computation is impractical.
pub const TERM_CAP: usize = 2_000_000;

#[derive(Debug, Clone)]
pub struct TruncatedChain {
    v: u64,
    states: Vec<Vec<i64>>,
    /// Per state: uniformized edges (target, probability mass rate / q),
    /// with `None` as the sink target.
    rows: Vec<Vec<(Option<usize>, f64)>>,
    row_totals: Vec<f64>,
    /// True when at least one transition was redirected to the sink.
    truncated: bool,
}

/// Distribution of the truncated chain at a fixed time.
#[derive(Debug, Clone)]
pub struct Distribution {
    pub v: u64,
    pub states: Vec<Vec<i64>>,
    pub probs: Vec<f64>,
    /// Mass absorbed by the truncation sink.
    pub sink: f64,
}

impl TruncatedChain {
    /// Enumerate up to `max_states` states reachable from x0 (breadth
    /// first, reactions in index order, so indices are deterministic).
    pub fn build(
        net: &ReactionNetwork,
        v: u64,
        x0: &[i64],
        max_states: usize,
    ) -> Result<TruncatedChain> {
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
        if max_states == 0 {
            return Err(Error::Invalid("state cap must be positive".into()));
        }
        let mut index: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
        let mut states: Vec<Vec<i64>> = Vec::new();
        let mut queue: VecDeque<usize> = VecDeque::new();
        index.insert(x0.to_vec(), 0);
        states.push(x0.to_vec());
        queue.push_back(0);
        // First pass: enumerate states.
        while let Some(i) = queue.pop_front() {
            let state = ScaledState {
                v,
                counts: states[i].clone(),
            };
            for r in 0..net.n_reactions() {
                if net.is_uniformizing(r) {
                    continue;
                }
                if net.micro_rate(r, &state)? <= 0.0 {
                    continue;
                }
                let next: Vec<i64> = states[i]
                    .iter()
                    .zip(net.jump(r))
                    .map(|(&c, &j)| c + j)
                    .collect();
                if !index.contains_key(&next) && states.len() < max_states {
                    index.insert(next.clone(), states.len());
                    states.push(next);
                    queue.push_back(states.len() - 1);
                }
            }
        }
        // Second pass: record transition rates v * Lambda^v_r.
        let mut rows = Vec::with_capacity(states.len());
        let mut row_totals = Vec::with_capacity(states.len());
        let mut truncated = false;
        for counts in &states {
            let state = ScaledState {
                v,
                counts: counts.clone(),
            };
            let mut row = Vec::new();
            let mut total = 0.0;
            for r in 0..net.n_reactions() {
                let rate = v as f64 * net.micro_rate(r, &state)?;
                if rate <= 0.0 || net.is_uniformizing(r) {
                    continue;
                }
                let next: Vec<i64> = counts
                    .iter()
                    .zip(net.jump(r))
                    .map(|(&c, &j)| c + j)
                    .collect();
                let target = index.get(&next).copied();
                if target.is_none() {
                    truncated = true;
                }
                row.push((target, rate));
                total += rate;
            }
            rows.push(row);
            row_totals.push(total);
        }
        Ok(TruncatedChain {
            v,
            states,
            rows,
            row_totals,
            truncated,
        })
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Vec<i64>] {
        &self.states
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// Distribution at time t, accurate to `tol` total variation on top of
    /// the truncation bracket.
    pub fn transient_distribution(&self, t: f64, tol: f64) -> Result<Distribution> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Invalid(format!("time must be finite and >= 0, got {t}")));
        }
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::Invalid(format!("tolerance must be in (0,1), got {tol}")));
        }
        let n = self.states.len();
        let q = self.row_totals.iter().fold(0.0f64, |m, &r| m.max(r));
        let qt = q * t;
        let ln_qt = qt.ln();
        let ln_tol = tol.ln();
        // Uniformized rows: stay probability and scaled edges.
        let stay: Vec<f64> = self.row_totals.iter().map(|&r| 1.0 - r / q).collect();
        // p has one extra slot for the sink.
        let mut p = vec![0.0f64; n + 1];
        p[0] = 1.0;
        let mut dist = vec![0.0f64; n + 1];
        let mut lw = -qt; // log Poisson weight, k = 0
        let mut next = vec![0.0f64; n + 1];
        let mut k = 0usize;
        loop {
            let w = lw.exp();
            if w > 0.0 {
                for (d, &pi) in dist.iter_mut().zip(&p) {
                    *d += w * pi;
                }
            }
            // Tail bound: stop once sum_{j > k} w_j <= tol.
            let lw_next = lw + ln_qt - ((k + 1) as f64).ln();
            if (k + 2) as f64 > qt {
                let log_geom = (1.0 - qt / (k + 2) as f64).ln();
                if lw_next - log_geom < ln_tol {
                    break;
                }
            }
            if k >= TERM_CAP {
                return Err(Error::Numeric(format!(
                    "uniformization needs more than {TERM_CAP} terms (t * q = {qt}); \
                     reduce the horizon or the volume"
                )));
            }
            // One uniformized step: next = p P.
            for v in next.iter_mut() {
                *v = 0.0;
            }
            next[n] = p[n]; // sink is absorbing
            for i in 0..n {
                let pi = p[i];
                if pi == 0.0 {
                    continue;
                }
                next[i] += pi * stay[i];
                for &(tgt, rate) in &self.rows[i] {
                    match tgt {
                        Some(j) => next[j] += pi * (rate / q),
                        None => next[n] += pi * (rate / q),
                    }
                }
            }
            std::mem::swap(&mut p, &mut next);
            lw = lw_next;
            k += 1;
        }
        let sink = dist[n];
        dist.truncate(n);
        Ok(Distribution {
            v: self.v,
            states: self.states.clone(),
            probs: dist,
            sink,
        })
    }
}

impl Distribution {
    /// Bracket for P(event): the sink mass may or may not satisfy the
    /// event, so it widens the upper bound only.
    pub fn event_probability(&self, event: impl Fn(&[i64]) -> bool) -> (f64, f64) {
        let lower: f64 = self
            .states
            .iter()
            .zip(&self.probs)
            .filter(|(s, _)| event(s))
            .map(|(_, &p)| p)
            .sum();
        (lower, lower + self.sink)
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum::<f64>() + self.sink
    }
}

/// Smallest count n with n / v >= delta, snapping near-integer v * delta
/// (within 1e-9) to the integer to keep thresholds stable under rounding.
pub fn count_threshold(v: u64, delta: f64) -> i64 {
    let w = v as f64 * delta;
    let r = w.round();
    if (w - r).abs() < 1e-9 {
        r as i64
    } else {
        w.ceil() as i64
    }
}

/// Tail of the pure birth process with per-individual rate 1 started from
/// one individual: P(N(t) >= k) = (1 - e^{-t})^{k-1} for k >= 1.
pub fn yule_tail(t: f64, k: u64) -> f64 {
    if k <= 1 {
        return 1.0;
    }
    (1.0 - (-t).exp()).powi((k - 1) as i32)
}
