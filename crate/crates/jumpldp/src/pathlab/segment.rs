//! Segmentation of piecewise-linear paths over a cover.
//!
//! A path is split into maximal spans, each assigned to one region whose
//! closure contains the path over the whole span. The assignment is greedy:
//! from the current time, the region that keeps the path inside for the
//! longest prefix wins, which yields a minimal segmentation; exact ties go
//! to the lowest region id. Span boundaries land on exact half-space
//! crossing roots, so downstream constructions can evaluate the path at
//! span endpoints without interpolation error.

use crate::error::{Error, Result};
use crate::numeric::linalg::dot;
use crate::path::MacroPath;
use crate::pathlab::cover::{Cover, CONTAIN_TOL};

/// Hard cap on the number of spans; paths that fragment further are
/// rejected rather than processed.
pub const MAX_SPANS: usize = 10_000;

/// A maximal interval during which the path stays in one region.
#[derive(Debug, Clone, PartialEq)]
pub struct Span {
    pub region: usize,
    pub t_in: f64,
    pub t_out: f64,
}

impl Span {
    pub fn duration(&self) -> f64 {
        self.t_out - self.t_in
    }
}

/// First time in `[t0, z.t_end()]` at which the path leaves the region
/// (beyond the containment slack), or `None` when it never does.
///
/// Per half-space the first crossing is the exact root of the affine map
/// `u -> a . p(u) - b` on the first path segment whose endpoint violates
/// the half-space; the overall exit is the earliest crossing.
fn exit_time(region: &crate::pathlab::cover::CoverRegion, z: &MacroPath, t0: f64) -> Option<f64> {
    let times = z.times();
    let points = z.points();
    let seg0 = z.locate_segment(t0);
    let mut exit: Option<f64> = None;
    for h in &region.halfspaces {
        let tol = CONTAIN_TOL * (1.0 + h.b.abs());
        for i in seg0..z.segment_count() {
            let g_end = dot(&h.a, &points[i + 1]) - h.b;
            if g_end <= tol {
                continue;
            }
            // The path endpoint violates this half-space, so the segment
            // crosses the hyperplane; the start value is <= tol because
            // earlier segments did not trigger, hence the slope is
            // strictly positive and the root is well defined.
            let g_start = dot(&h.a, &points[i]) - h.b;
            let u = (0.0 - g_start) / (g_end - g_start);
            let t_cross = (times[i] + u * (times[i + 1] - times[i])).max(t0);
            if exit.is_none_or(|e| t_cross < e) {
                exit = Some(t_cross);
            }
            break;
        }
    }
    exit
}

/// Split the path into maximal single-region spans.
pub fn segment_path(cover: &Cover, z: &MacroPath) -> Result<Vec<Span>> {
    if z.dim() != cover.dim() {
        return Err(Error::Invalid(format!(
            "path has dimension {} but the cover has {}",
            z.dim(),
            cover.dim()
        )));
    }
    let t_end = z.t_end();
    let mut t = z.t_start();
    let mut spans: Vec<Span> = Vec::new();
    while t < t_end {
        if spans.len() >= MAX_SPANS {
            return Err(Error::Cover(format!(
                "segmentation exceeds {MAX_SPANS} spans (at time {t})"
            )));
        }
        let x = z.eval(t);
        let mut best: Option<(usize, f64)> = None;
        for r in cover.regions() {
            if !r.contains(&x, CONTAIN_TOL) {
                continue;
            }
            let out = exit_time(r, z, t).unwrap_or(t_end).min(t_end);
            // Strict improvement only, so exact ties keep the lowest id.
            if best.is_none_or(|(_, b)| out > b) {
                best = Some((r.id, out));
            }
        }
        match best {
            None => {
                return Err(Error::Cover(format!(
                    "path point {x:?} at time {t} is not covered by any region"
                )));
            }
            Some((_, out)) if out <= t => {
                return Err(Error::Cover(format!(
                    "path is stuck at time {t}: every containing region is exited immediately"
                )));
            }
            Some((region, out)) => {
                spans.push(Span {
                    region,
                    t_in: t,
                    t_out: out,
                });
                t = out;
            }
        }
    }
    Ok(spans)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::model::parse_model;
    use crate::network::ReactionNetwork;

    fn two_species_net() -> ReactionNetwork {
        parse_model(
            r#"{
                "name": "switch",
                "species": ["A", "B"],
                "reactions": [
                    {"in": {"A": 1}, "out": {"B": 1}, "rate": {"type": "mass_action", "k": 1.0}},
                    {"in": {"B": 1}, "out": {"A": 1}, "rate": {"type": "mass_action", "k": 1.0}}
                ]
            }"#,
        )
        .unwrap()
    }

    /// Two unit boxes sharing the strip x in [0.4, 0.6].
    fn strip_cover(net: &ReactionNetwork) -> Cover {
        Cover::parse(
            r#"{
                "regions": [
                    {
                        "halfspaces": [
                            {"a": [-1.0, 0.0], "b": 0.0}, {"a": [1.0, 0.0], "b": 0.6},
                            {"a": [0.0, -1.0], "b": 0.0}, {"a": [0.0, 1.0], "b": 1.0}
                        ],
                        "boundary": [], "w": [0.0, 0.0], "kappa": 0.5, "escape": []
                    },
                    {
                        "halfspaces": [
                            {"a": [-1.0, 0.0], "b": -0.4}, {"a": [1.0, 0.0], "b": 1.0},
                            {"a": [0.0, -1.0], "b": 0.0}, {"a": [0.0, 1.0], "b": 1.0}
                        ],
                        "boundary": [], "w": [0.0, 0.0], "kappa": 0.5, "escape": []
                    }
                ],
                "eps": 0.1, "eps_prime": 0.05, "eps_dblprime": 0.05, "kappa_dblprime": 0.3
            }"#,
            net,
        )
        .unwrap()
    }

    #[test]
    fn crossing_roots_are_exact() {
        let net = two_species_net();
        let cover = strip_cover(&net);
        // x(t) = 0.1 + 0.8 t leaves region 0 exactly when x = 0.6, t = 0.625.
        let z = MacroPath::new(
            vec![0.0, 1.0],
            vec![vec![0.1, 0.5], vec![0.9, 0.5]],
        )
        .unwrap();
        let spans = segment_path(&cover, &z).unwrap();
        assert_eq!(spans.len(), 2);
        assert_eq!(spans[0].region, 0);
        assert!((spans[0].t_out - 0.625).abs() < 1e-12);
        assert_eq!(spans[1].region, 1);
        assert_eq!(spans[1].t_in, spans[0].t_out, "spans tile exactly");
        assert_eq!(spans[1].t_out, 1.0);
    }

    #[test]
    fn greedy_takes_the_longest_prefix() {
        let net = two_species_net();
        let cover = strip_cover(&net);
        // Starting in the overlap strip, the path moves right, so region 1
        // keeps it longer even though region 0 has the lower id.
        let z = MacroPath::new(
            vec![0.0, 1.0],
            vec![vec![0.5, 0.5], vec![0.9, 0.5]],
        )
        .unwrap();
        let spans = segment_path(&cover, &z).unwrap();
        assert_eq!(spans, vec![Span { region: 1, t_in: 0.0, t_out: 1.0 }]);
    }

    #[test]
    fn ties_resolve_to_the_lowest_id() {
        let net = two_species_net();
        let cover = strip_cover(&net);
        // A constant path in the overlap never exits either region.
        let z = MacroPath::constant(&[0.5, 0.5], 0.0, 1.0).unwrap();
        let spans = segment_path(&cover, &z).unwrap();
        assert_eq!(spans, vec![Span { region: 0, t_in: 0.0, t_out: 1.0 }]);
    }

    #[test]
    fn uncovered_points_are_reported() {
        let net = two_species_net();
        let cover = strip_cover(&net);
        let z = MacroPath::new(
            vec![0.0, 1.0],
            vec![vec![0.5, 0.5], vec![1.5, 0.5]],
        )
        .unwrap();
        let err = segment_path(&cover, &z).unwrap_err();
        assert!(matches!(err, Error::Cover(_)), "got {err:?}");
    }

    #[test]
    fn bouncing_path_alternates_regions() {
        let net = two_species_net();
        let cover = strip_cover(&net);
        let z = MacroPath::new(
            vec![0.0, 1.0, 2.0],
            vec![vec![0.1, 0.5], vec![0.9, 0.5], vec![0.1, 0.5]],
        )
        .unwrap();
        let spans = segment_path(&cover, &z).unwrap();
        let ids: Vec<usize> = spans.iter().map(|s| s.region).collect();
        assert_eq!(ids, vec![0, 1, 0]);
        // Spans tile the window exactly.
        assert_eq!(spans[0].t_in, 0.0);
        assert_eq!(spans.last().unwrap().t_out, 2.0);
        for w in spans.windows(2) {
            assert_eq!(w[0].t_out, w[1].t_in);
        }
    }
}
