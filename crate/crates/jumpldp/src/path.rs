//! Piecewise-linear paths in R^d.
//!
//! A `MacroPath` is a continuous path given by breakpoints at strictly
//! increasing times with linear interpolation between them. These paths are
//! the common currency of the crate: action functionals integrate over
//! their segments, the boundary-shift construction rebuilds them segment by
//! segment, and simulators compare against them in the uniform norm.
//!
//! Evaluation inside a segment works in segment-local coordinates: a point
//! is `p_i + (u / h) * (p_{i+1} - p_i)` where `u = t - t_i` and
//! `h = t_{i+1} - t_i`. Downstream integrators that only ever pass `u`
//! values derived from `h` therefore produce bit-identical results for two
//! paths whose segment durations and breakpoint values agree exactly, even
//! when their absolute time grids differ.

use crate::error::{Error, Result};
use crate::numeric::{fmt_float, parse_float};

#[derive(Debug, Clone, PartialEq)]
pub struct MacroPath {
    times: Vec<f64>,
    points: Vec<Vec<f64>>,
    dim: usize,
}

impl MacroPath {
    /// Build a path from breakpoints. Consecutive entries with exactly equal
    /// times are collapsed when their points agree and rejected otherwise;
    /// times must be nondecreasing and all values finite.
    pub fn new(times: Vec<f64>, points: Vec<Vec<f64>>) -> Result<MacroPath> {
        if times.len() != points.len() {
            return Err(Error::Invalid(format!(
                "path has {} times but {} points",
                times.len(),
                points.len()
            )));
        }
        if times.is_empty() {
            return Err(Error::Invalid("path has no breakpoints".into()));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::Invalid("path points must have dimension >= 1".into()));
        }
        let mut ts: Vec<f64> = Vec::with_capacity(times.len());
        let mut ps: Vec<Vec<f64>> = Vec::with_capacity(points.len());
        for (t, p) in times.into_iter().zip(points) {
            if !t.is_finite() || p.iter().any(|v| !v.is_finite()) {
                return Err(Error::Invalid("path breakpoints must be finite".into()));
            }
            if p.len() != dim {
                return Err(Error::Invalid(format!(
                    "path point has dimension {} but the first point has {}",
                    p.len(),
                    dim
                )));
            }
            if let Some(&prev_t) = ts.last() {
                if t < prev_t {
                    return Err(Error::Invalid(format!(
                        "path times must be nondecreasing ({t} after {prev_t})"
                    )));
                }
                if t == prev_t {
                    if ps.last().unwrap() == &p {
                        continue;
                    }
                    return Err(Error::Invalid(format!(
                        "two breakpoints at time {t} with different points"
                    )));
                }
            }
            ts.push(t);
            ps.push(p);
        }
        if ts.len() < 2 {
            return Err(Error::Invalid(
                "path needs at least two distinct breakpoint times".into(),
            ));
        }
        Ok(MacroPath {
            times: ts,
            points: ps,
            dim,
        })
    }

    /// Straight line t -> x0 + (t - t0) * w on [t0, t1].
    pub fn line(x0: &[f64], w: &[f64], t0: f64, t1: f64) -> Result<MacroPath> {
        if x0.len() != w.len() {
            return Err(Error::Invalid(
                "line start and direction have different dimensions".into(),
            ));
        }
        let h = t1 - t0;
        let end: Vec<f64> = x0.iter().zip(w).map(|(x, w)| x + h * w).collect();
        MacroPath::new(vec![t0, t1], vec![x0.to_vec(), end])
    }

    pub fn constant(x: &[f64], t0: f64, t1: f64) -> Result<MacroPath> {
        MacroPath::new(vec![t0, t1], vec![x.to_vec(), x.to_vec()])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn segment_count(&self) -> usize {
        self.times.len() - 1
    }

    /// Index of the segment containing t; interior breakpoints resolve to
    /// the segment starting there (both segments agree by continuity).
    pub fn locate_segment(&self, t: f64) -> usize {
        let n = self.times.len();
        if t <= self.times[0] {
            return 0;
        }
        if t >= self.times[n - 1] {
            return n - 2;
        }
        let le = self.times.partition_point(|&x| x <= t);
        (le - 1).min(n - 2)
    }

    pub fn segment_duration(&self, i: usize) -> f64 {
        self.times[i + 1] - self.times[i]
    }

    /// Constant velocity on segment i.
    pub fn slope(&self, i: usize) -> Vec<f64> {
        let h = self.segment_duration(i);
        self.points[i]
            .iter()
            .zip(&self.points[i + 1])
            .map(|(a, b)| (b - a) / h)
            .collect()
    }

    /// Point at local offset u in [0, h] within segment i.
    pub fn eval_segment(&self, i: usize, u: f64) -> Vec<f64> {
        let h = self.segment_duration(i);
        let s = u / h;
        self.points[i]
            .iter()
            .zip(&self.points[i + 1])
            .map(|(a, b)| a + s * (b - a))
            .collect()
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let span = self.t_end() - self.t_start();
        let tol = 1e-9 * (1.0 + span + self.t_start().abs());
        assert!(
            t >= self.t_start() - tol && t <= self.t_end() + tol,
            "eval at t={t} outside path domain [{}, {}]",
            self.t_start(),
            self.t_end()
        );
        let t = t.clamp(self.t_start(), self.t_end());
        let i = self.locate_segment(t);
        self.eval_segment(i, t - self.times[i])
    }

    /// Same path on shifted clock times.
    pub fn translate(&self, s: f64) -> MacroPath {
        MacroPath {
            times: self.times.iter().map(|t| t + s).collect(),
            points: self.points.clone(),
            dim: self.dim,
        }
    }

    /// Subpath on [a, b], keeping interior breakpoints and evaluating the
    /// endpoints. The restricted path keeps absolute times (starts at a).
    pub fn restrict(&self, a: f64, b: f64) -> Result<MacroPath> {
        let span = self.t_end() - self.t_start();
        let tol = 1e-9 * (1.0 + span);
        if a < self.t_start() - tol || b > self.t_end() + tol || b <= a {
            return Err(Error::Invalid(format!(
                "restriction [{a}, {b}] is not a positive-length subinterval of [{}, {}]",
                self.t_start(),
                self.t_end()
            )));
        }
        let a = a.clamp(self.t_start(), self.t_end());
        let b = b.clamp(self.t_start(), self.t_end());
        let mut times = vec![a];
        let mut points = vec![self.eval(a)];
        for (t, p) in self.times.iter().zip(&self.points) {
            if *t > a && *t < b {
                times.push(*t);
                points.push(p.clone());
            }
        }
        times.push(b);
        points.push(self.eval(b));
        MacroPath::new(times, points)
    }

    /// Uniform distance sup_t |self(t) - other(t)|_2 over the common domain.
    /// Domains must agree to within a small tolerance.
    pub fn sup_distance(&self, other: &MacroPath) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::Invalid(
                "sup_distance requires equal dimensions".into(),
            ));
        }
        let tol = 1e-9 * (1.0 + (self.t_end() - self.t_start()).abs());
        if (self.t_start() - other.t_start()).abs() > tol
            || (self.t_end() - other.t_end()).abs() > tol
        {
            return Err(Error::Invalid(format!(
                "sup_distance domains differ: [{}, {}] vs [{}, {}]",
                self.t_start(),
                self.t_end(),
                other.t_start(),
                other.t_end()
            )));
        }
        // The difference is piecewise linear on the merged breakpoint grid
        // and |.|_2 of a linear function is convex, so the supremum is
        // attained at a merged breakpoint.
        let lo = self.t_start().max(other.t_start());
        let hi = self.t_end().min(other.t_end());
        let mut grid: Vec<f64> = self
            .times
            .iter()
            .chain(other.times.iter())
            .map(|&t| t.clamp(lo, hi))
            .collect();
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        grid.dedup();
        let mut best = 0.0f64;
        for t in grid {
            let a = self.eval(t);
            let b = other.eval(t);
            let d2: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
            best = best.max(d2.sqrt());
        }
        Ok(best)
    }

    /// Modulus of continuity w(h) = sup { |z(s) - z(t)|_2 : |s - t| <= h }.
    ///
    /// For a piecewise-linear path the displacement is affine in (s, t) on
    /// each segment pair, so the supremum over the band |s - t| <= h is
    /// attained at a vertex: either two breakpoints, or a breakpoint paired
    /// with the point exactly h away.
    pub fn modulus(&self, h: f64) -> f64 {
        assert!(h >= 0.0, "modulus needs h >= 0");
        let mut best = 0.0f64;
        let n = self.times.len();
        let dist = |a: &[f64], b: &[f64]| -> f64 {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt()
        };
        for i in 0..n {
            for j in (i + 1)..n {
                if self.times[j] - self.times[i] <= h {
                    best = best.max(dist(&self.points[i], &self.points[j]));
                } else {
                    break;
                }
            }
            let fwd = self.times[i] + h;
            if fwd <= self.t_end() {
                best = best.max(dist(&self.points[i], &self.eval(fwd)));
            }
            let back = self.times[i] - h;
            if back >= self.t_start() {
                best = best.max(dist(&self.points[i], &self.eval(back)));
            }
        }
        best
    }

    /// Largest window h with modulus(h) <= delta, found by bisection
    /// (the modulus is nondecreasing and continuous in h). Returns the full
    /// domain length when the whole path oscillates less than delta.
    pub fn modulus_inverse(&self, delta: f64) -> f64 {
        assert!(delta > 0.0, "modulus_inverse needs delta > 0");
        let span = self.t_end() - self.t_start();
        if self.modulus(span) <= delta {
            return span;
        }
        let mut lo = 0.0f64;
        let mut hi = span;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.modulus(mid) <= delta {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * span {
                break;
            }
        }
        lo
    }

    /// CSV with header `t,x_1,..,x_d`, one row per breakpoint, full float
    /// precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for k in 1..=self.dim {
            out.push_str(&format!(",x_{k}"));
        }
        out.push('\n');
        for (t, p) in self.times.iter().zip(&self.points) {
            out.push_str(&fmt_float(*t));
            for v in p {
                out.push(',');
                out.push_str(&fmt_float(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<MacroPath> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::PathFormat("empty path file".into()))?;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.len() < 2 || cols[0] != "t" {
            return Err(Error::PathFormat(format!(
                "expected header t,x_1,..,x_d, found {header:?}"
            )));
        }
        for (k, c) in cols[1..].iter().enumerate() {
            let want = format!("x_{}", k + 1);
            if *c != want {
                return Err(Error::PathFormat(format!(
                    "expected column {want}, found {c:?}"
                )));
            }
        }
        let dim = cols.len() - 1;
        let mut times = Vec::new();
        let mut points = Vec::new();
        for (lineno, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != dim + 1 {
                return Err(Error::PathFormat(format!(
                    "line {}: expected {} fields, found {}",
                    lineno + 1,
                    dim + 1,
                    fields.len()
                )));
            }
            let mut vals = Vec::with_capacity(dim + 1);
            for f in &fields {
                vals.push(parse_float(f).ok_or_else(|| {
                    Error::PathFormat(format!("line {}: bad number {f:?}", lineno + 1))
                })?);
            }
            times.push(vals[0]);
            points.push(vals[1..].to_vec());
        }
        MacroPath::new(times, points)
    }
}
