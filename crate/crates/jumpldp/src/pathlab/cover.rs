//! Polytope covers of the state space with boundary escape data.
//!
//! The state space is covered by finitely many convex polytopes (regions).
//! Each region lists the half-spaces that describe it, marks the subset of
//! facets that belong to the degenerate boundary (where rates may vanish),
//! and carries the escape data for that boundary piece:
//!
//! * `w`: a unit direction pointing away from the boundary facets (the zero
//!   vector for regions with no boundary facets);
//! * `kappa`: the clearance rate of `w` against the boundary facets;
//! * `escape`: an ordered reaction sequence whose jump vectors sum to
//!   `alpha * w` for some `alpha > 0`.
//!
//! The cover also fixes the global constants `eps`, `eps_prime`,
//! `eps_dblprime` and `kappa_dblprime` used by the shifted-path construction
//! and the boundary auditors, with `kappa_dblprime < kappa_minus / 3` where
//! `kappa_minus` is the smallest clearance among boundary regions.
//!
//! Serialized form:
//!
//! ```json
//! {
//!   "regions": [
//!     {
//!       "halfspaces": [{"a": [0.0, -1.0], "b": 0.0}],
//!       "boundary": [0],
//!       "w": [0.0, 1.0],
//!       "kappa": 0.9,
//!       "escape": [0]
//!     }
//!   ],
//!   "eps": 0.5, "eps_prime": 0.3, "eps_dblprime": 0.25, "kappa_dblprime": 0.25
//! }
//! ```

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::network::ReactionNetwork;
use crate::numeric::linalg::{dot, norm2};
use crate::numeric::sample::halton_point;
use crate::numeric::simplex::{solve_ineq_free, LpOutcome};
use crate::simulator::reachable_set;

/// Relative slack for containment tests.
pub const CONTAIN_TOL: f64 = 1e-9;

/// The half-space `a . x <= b`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Halfspace {
    pub a: Vec<f64>,
    pub b: f64,
}

/// Raw region data as found in cover files and fixtures.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub halfspaces: Vec<Halfspace>,
    pub boundary: Vec<usize>,
    pub w: Vec<f64>,
    pub kappa: f64,
    pub escape: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoverDoc {
    regions: Vec<RegionSpec>,
    eps: f64,
    eps_prime: f64,
    eps_dblprime: f64,
    kappa_dblprime: f64,
}

/// A validated cover region.
#[derive(Debug, Clone)]
pub struct CoverRegion {
    pub id: usize,
    pub halfspaces: Vec<Halfspace>,
    /// Indices into `halfspaces` of the degenerate boundary facets.
    pub boundary: Vec<usize>,
    pub w: Vec<f64>,
    pub kappa: f64,
    /// Ordered escape reaction indices.
    pub escape: Vec<usize>,
    /// Positive scalar with `sum of escape jumps = alpha * w`; 0 for regions
    /// without an escape sequence.
    pub alpha: f64,
}

impl CoverRegion {
    pub fn dim(&self) -> usize {
        self.w.len()
    }

    /// Closure membership with relative slack `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.halfspaces
            .iter()
            .all(|h| dot(&h.a, x) <= h.b + tol * (1.0 + h.b.abs()))
    }

    /// Signed distance to facet `i`'s hyperplane; positive inside.
    pub fn facet_distance(&self, i: usize, x: &[f64]) -> f64 {
        let h = &self.halfspaces[i];
        (h.b - dot(&h.a, x)) / norm2(&h.a)
    }

    /// Signed distance to the nearest boundary facet; `+inf` when the region
    /// has none.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        self.boundary
            .iter()
            .map(|&i| self.facet_distance(i, x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Axis-aligned bounding box, solved facet-wise as linear programs.
    pub fn bbox(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let d = self.dim();
        let a: Vec<Vec<f64>> = self.halfspaces.iter().map(|h| h.a.clone()).collect();
        let b: Vec<f64> = self.halfspaces.iter().map(|h| h.b).collect();
        let mut lo = vec![0.0; d];
        let mut hi = vec![0.0; d];
        for i in 0..d {
            for (slot, sign) in [(&mut lo, 1.0), (&mut hi, -1.0)] {
                let mut c = vec![0.0; d];
                c[i] = sign;
                match solve_ineq_free(&a, &b, &c) {
                    LpOutcome::Optimal { x, .. } => slot[i] = x[i],
                    LpOutcome::Unbounded => {
                        return Err(Error::Cover(format!(
                            "region {} is unbounded along axis {i}",
                            self.id
                        )))
                    }
                    LpOutcome::Infeasible { .. } => {
                        return Err(Error::Cover(format!("region {} is empty", self.id)))
                    }
                }
            }
        }
        Ok((lo, hi))
    }
}

/// A validated cover.
#[derive(Debug, Clone)]
pub struct Cover {
    regions: Vec<CoverRegion>,
    pub eps: f64,
    pub eps_prime: f64,
    pub eps_dblprime: f64,
    pub kappa_dblprime: f64,
    kappa_minus: f64,
    dim: usize,
}

impl Cover {
    /// Validate raw region data against a network and assemble the cover.
    pub fn new(
        specs: Vec<RegionSpec>,
        eps: f64,
        eps_prime: f64,
        eps_dblprime: f64,
        kappa_dblprime: f64,
        net: &ReactionNetwork,
    ) -> Result<Cover> {
        if specs.is_empty() {
            return Err(Error::Cover("a cover needs at least one region".into()));
        }
        let dim = net.dim();
        let mut regions = Vec::with_capacity(specs.len());
        for (id, spec) in specs.into_iter().enumerate() {
            regions.push(validate_region(id, spec, dim, net)?);
        }
        let kappa_minus = regions
            .iter()
            .filter(|r| !r.boundary.is_empty())
            .map(|r| r.kappa)
            .fold(1.0f64, f64::min);
        for (name, v) in [
            ("eps", eps),
            ("eps_prime", eps_prime),
            ("eps_dblprime", eps_dblprime),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Cover(format!("{name} must be positive, got {v}")));
            }
        }
        if !(kappa_dblprime > 0.0 && kappa_dblprime < kappa_minus / 3.0) {
            return Err(Error::Cover(format!(
                "kappa_dblprime = {kappa_dblprime} must lie in (0, kappa_minus/3) = (0, {})",
                kappa_minus / 3.0
            )));
        }
        Ok(Cover {
            regions,
            eps,
            eps_prime,
            eps_dblprime,
            kappa_dblprime,
            kappa_minus,
            dim,
        })
    }

    /// Parse and validate the JSON cover format.
    pub fn parse(json: &str, net: &ReactionNetwork) -> Result<Cover> {
        let doc: CoverDoc =
            serde_json::from_str(json).map_err(|e| Error::Cover(format!("bad cover JSON: {e}")))?;
        Cover::new(
            doc.regions,
            doc.eps,
            doc.eps_prime,
            doc.eps_dblprime,
            doc.kappa_dblprime,
            net,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn regions(&self) -> &[CoverRegion] {
        &self.regions
    }

    pub fn region(&self, j: usize) -> &CoverRegion {
        &self.regions[j]
    }

    /// Smallest clearance among boundary regions (1 when there are none).
    pub fn kappa_minus(&self) -> f64 {
        self.kappa_minus
    }

    /// Lowest-id region whose closure contains `x`.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        self.regions
            .iter()
            .position(|r| r.contains(x, CONTAIN_TOL))
    }
}

fn validate_region(
    id: usize,
    spec: RegionSpec,
    dim: usize,
    net: &ReactionNetwork,
) -> Result<CoverRegion> {
    let fail = |msg: String| Err(Error::Cover(format!("region {id}: {msg}")));
    if spec.halfspaces.is_empty() {
        return fail("needs at least one half-space".into());
    }
    for (i, h) in spec.halfspaces.iter().enumerate() {
        if h.a.len() != dim {
            return fail(format!(
                "half-space {i} has {} coefficients, expected {dim}",
                h.a.len()
            ));
        }
        if !h.b.is_finite() || h.a.iter().any(|v| !v.is_finite()) {
            return fail(format!("half-space {i} has non-finite data"));
        }
        if h.a.iter().all(|&v| v == 0.0) {
            return fail(format!("half-space {i} has a zero normal"));
        }
    }
    if spec.w.len() != dim {
        return fail(format!("w has length {}, expected {dim}", spec.w.len()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for &i in &spec.boundary {
        if i >= spec.halfspaces.len() {
            return fail(format!("boundary facet index {i} out of range"));
        }
        if !seen.insert(i) {
            return fail(format!("boundary facet index {i} repeated"));
        }
    }
    if !(spec.kappa > 0.0 && spec.kappa < 1.0) {
        return fail(format!("kappa = {} must lie in (0, 1)", spec.kappa));
    }
    let wnorm = norm2(&spec.w);
    let alpha;
    if spec.boundary.is_empty() {
        if wnorm != 0.0 {
            return fail("w must be zero for a region without boundary facets".into());
        }
        if !spec.escape.is_empty() {
            return fail("escape sequence requires boundary facets".into());
        }
        alpha = 0.0;
    } else {
        if (wnorm - 1.0).abs() > 1e-9 {
            return fail(format!("w must be a unit vector, |w| = {wnorm}"));
        }
        if spec.escape.is_empty() {
            return fail("boundary region needs an escape sequence".into());
        }
        for &r in &spec.escape {
            if r >= net.n_reactions() {
                return fail(format!("escape reaction index {r} out of range"));
            }
        }
        // The escape jumps must sum to alpha * w for a positive alpha.
        let mut total = vec![0.0; dim];
        for &r in &spec.escape {
            for (t, g) in total.iter_mut().zip(net.jump_f64(r)) {
                *t += g;
            }
        }
        alpha = dot(&total, &spec.w);
        if alpha <= 0.0 {
            return fail(format!(
                "escape jumps must advance along w, got alpha = {alpha}"
            ));
        }
        for (i, (&t, &wi)) in total.iter().zip(&spec.w).enumerate() {
            if (t - alpha * wi).abs() > 1e-12 * (1.0 + t.abs()) {
                return fail(format!(
                    "escape jump sum is not parallel to w (coordinate {i}: {t} vs {})",
                    alpha * wi
                ));
            }
        }
    }
    Ok(CoverRegion {
        id,
        halfspaces: spec.halfspaces,
        boundary: spec.boundary,
        w: spec.w,
        kappa: spec.kappa,
        escape: spec.escape,
        alpha,
    })
}

/// Low-discrepancy samples from the closure of a region: Halton points in
/// the bounding box, rejected against the half-spaces.
pub fn sample_region(region: &CoverRegion, count: usize, start_index: u64) -> Result<Vec<Vec<f64>>> {
    let d = region.dim();
    let (lo, hi) = region.bbox()?;
    let mut out = Vec::with_capacity(count);
    let mut idx = start_index;
    let cap = 10_000 * count.max(1) as u64;
    for _ in 0..cap {
        let h = halton_point(d, idx);
        idx += 1;
        let x: Vec<f64> = (0..d).map(|i| lo[i] + (hi[i] - lo[i]) * h[i]).collect();
        if region.contains(&x, 0.0) {
            out.push(x);
            if out.len() == count {
                return Ok(out);
            }
        }
    }
    Err(Error::Cover(format!(
        "region {}: sampled {} points of {count} requested (thin region?)",
        region.id,
        out.len()
    )))
}

/// Low-discrepancy samples from the slab of a boundary facet: points of the
/// region whose distance to facet `facet` lies in `[lo_dist, hi_dist]`.
///
/// Raw box samples are projected along the facet normal to the prescribed
/// distance, which keeps the acceptance rate order one even for distances
/// far below the region diameter; the projected point is then rejected if it
/// left the region or if another boundary facet is closer than `lo_dist`.
pub fn sample_near_facet(
    region: &CoverRegion,
    facet: usize,
    lo_dist: f64,
    hi_dist: f64,
    count: usize,
    start_index: u64,
) -> Result<Vec<Vec<f64>>> {
    let d = region.dim();
    if facet >= region.halfspaces.len() {
        return Err(Error::Cover(format!(
            "region {}: facet {facet} out of range",
            region.id
        )));
    }
    if !(0.0 <= lo_dist && lo_dist <= hi_dist) {
        return Err(Error::Cover(format!(
            "bad distance slab [{lo_dist}, {hi_dist}]"
        )));
    }
    let (lo, hi) = region.bbox()?;
    let h = &region.halfspaces[facet];
    let anorm = norm2(&h.a);
    let mut out = Vec::with_capacity(count);
    let mut idx = start_index;
    let cap = 10_000 * count.max(1) as u64;
    for _ in 0..cap {
        let pt = halton_point(d + 1, idx);
        idx += 1;
        let mut x: Vec<f64> = (0..d).map(|i| lo[i] + (hi[i] - lo[i]) * pt[i]).collect();
        let target = lo_dist + (hi_dist - lo_dist) * pt[d];
        let dist = region.facet_distance(facet, &x);
        let shift = dist - target;
        for (xi, ai) in x.iter_mut().zip(&h.a) {
            *xi += shift * ai / anorm;
        }
        if !region.contains(&x, CONTAIN_TOL) {
            continue;
        }
        let bd = region.boundary_distance(&x);
        if bd < lo_dist * (1.0 - 1e-9) || bd > hi_dist * (1.0 + 1e-9) {
            continue;
        }
        out.push(x);
        if out.len() == count {
            return Ok(out);
        }
    }
    Err(Error::Cover(format!(
        "region {}: sampled {} slab points of {count} requested",
        region.id,
        out.len()
    )))
}

/// Coverage report for the scaled reachable set.
#[derive(Debug, Clone)]
pub struct CoverageReport {
    pub checked: usize,
    /// Reachable concentrations not covered by any region.
    pub missed: Vec<Vec<f64>>,
    pub passed: bool,
}

/// Check that every scaled reachable state in the box `[lo, hi]` lies in
/// some region, strictly inside the non-boundary facets (boundary facets are
/// tested with closure slack, since reachable states sit exactly on them).
pub fn check_coverage(
    cover: &Cover,
    net: &ReactionNetwork,
    v: u64,
    x0_counts: &[i64],
    lo: &[f64],
    hi: &[f64],
    max_states: usize,
) -> Result<CoverageReport> {
    let states = reachable_set(net, v, x0_counts, lo, hi, max_states)?;
    let mut missed = Vec::new();
    for counts in &states {
        let x: Vec<f64> = counts.iter().map(|&c| c as f64 / v as f64).collect();
        let covered = cover.regions().iter().any(|r| {
            r.halfspaces.iter().enumerate().all(|(i, h)| {
                let margin = CONTAIN_TOL * (1.0 + h.b.abs());
                if r.boundary.contains(&i) {
                    dot(&h.a, &x) <= h.b + margin
                } else {
                    dot(&h.a, &x) <= h.b - margin
                }
            })
        });
        if !covered {
            missed.push(x);
        }
    }
    Ok(CoverageReport {
        checked: states.len(),
        passed: missed.is_empty(),
        missed,
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

    fn interval_cover_json() -> &'static str {
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
        }"#
    }

    #[test]
    fn parses_and_derives_constants() {
        let net = birth_net();
        let cover = Cover::parse(interval_cover_json(), &net).unwrap();
        assert_eq!(cover.regions().len(), 2);
        assert_eq!(cover.kappa_minus(), 0.9, "only boundary regions count");
        assert_eq!(cover.region(0).alpha, 1.0, "single +1 escape jump");
        assert_eq!(cover.region(1).alpha, 0.0, "interior region");
    }

    #[test]
    fn locate_prefers_the_lowest_id() {
        let net = birth_net();
        let cover = Cover::parse(interval_cover_json(), &net).unwrap();
        assert_eq!(cover.locate(&[0.3]), Some(0), "overlap resolves to region 0");
        assert_eq!(cover.locate(&[1.0]), Some(1));
        assert_eq!(cover.locate(&[0.0]), Some(0), "boundary point included");
        assert_eq!(cover.locate(&[3.0]), None);
    }

    #[test]
    fn validation_rejects_bad_data() {
        let net = birth_net();
        // kappa_dblprime too large for kappa_minus = 0.9.
        let bad = interval_cover_json().replace("\"kappa_dblprime\": 0.25", "\"kappa_dblprime\": 0.4");
        assert!(Cover::parse(&bad, &net).is_err());
        // Non-unit w on a boundary region.
        let bad = interval_cover_json().replace("\"w\": [1.0]", "\"w\": [2.0]");
        assert!(Cover::parse(&bad, &net).is_err());
        // Escape jumps must move along w: reversed direction.
        let bad = interval_cover_json().replace("\"w\": [1.0]", "\"w\": [-1.0]");
        assert!(Cover::parse(&bad, &net).is_err());
    }

    #[test]
    fn bbox_and_distances() {
        let net = birth_net();
        let cover = Cover::parse(interval_cover_json(), &net).unwrap();
        let (lo, hi) = cover.region(0).bbox().unwrap();
        assert!((lo[0] - 0.0).abs() < 1e-9 && (hi[0] - 0.5).abs() < 1e-9);
        assert!((cover.region(0).boundary_distance(&[0.2]) - 0.2).abs() < 1e-12);
        assert_eq!(cover.region(1).boundary_distance(&[1.0]), f64::INFINITY);
    }

    #[test]
    fn sampling_stays_inside() {
        let net = birth_net();
        let cover = Cover::parse(interval_cover_json(), &net).unwrap();
        let pts = sample_region(cover.region(0), 64, 1).unwrap();
        assert_eq!(pts.len(), 64);
        assert!(pts.iter().all(|x| (0.0..=0.5).contains(&x[0])));

        let slab = sample_near_facet(cover.region(0), 0, 1e-6, 2e-6, 32, 1).unwrap();
        assert_eq!(slab.len(), 32);
        for x in &slab {
            assert!((1e-6..=2.000_01e-6).contains(&x[0]), "got {}", x[0]);
        }
    }

    #[test]
    fn coverage_check_finds_gaps() {
        let net = birth_net();
        let cover = Cover::parse(interval_cover_json(), &net).unwrap();
        // Reachable lattice 1/v, 2/v, ... stays covered up to 1.9.
        let rep = check_coverage(&cover, &net, 20, &[1], &[0.0], &[1.9], 1000).unwrap();
        assert!(rep.passed, "missed: {:?}", rep.missed);
        assert!(rep.checked > 10);
        // Shrinking region 1 to [0.25, 0.8] uncovers the tail.
        let json = interval_cover_json().replace("\"b\": 2.0", "\"b\": 0.8");
        let small = Cover::parse(&json, &net).unwrap();
        let rep = check_coverage(&small, &net, 20, &[1], &[0.0], &[1.9], 1000).unwrap();
        assert!(!rep.passed);
    }
}
