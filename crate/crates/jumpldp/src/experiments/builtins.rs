//! Built-in models: small reaction networks with vanishing rates, each
//! packaged with a hand-authored polytope cover of its working window and a
//! volume-indexed initial condition.
//!
//! The catalog:
//!
//! - `ex1_1`: autocatalysis A -> 2A with rate x, started from a single
//!   particle. The fluid limit from 0 is identically 0, yet the marginal
//!   satisfies (1/v) log P(X(t) >= delta) -> delta log(1 - e^{-t}).
//! - `ex2_1_dimer`: reversible dimerization 2A <-> B started from pure
//!   monomer; its cover window is strictly interior, so shifts are no-ops.
//! - `ex2_2`: B <-> 2B together with A <-> 2A + B, started from a single A;
//!   both axes are degenerate and one jump direction escapes both at once.
//! - `ex2_3`: linear interchange A <-> B on the simplex x_A + x_B = 1 + 1/v,
//!   started from the all-B corner.
//! - `ex2_4`: a single birth jump with rate e^{-k/x}; rates freeze so fast
//!   toward 0 that escape has infinite cost. Built failing on purpose.
//! - `ex5_2`: jumps (0,1) with rate (x_1 - 1)^+ and (1,0) with rate 1; the
//!   only affordable escape direction is tangent to the degenerate axis.
//! - `ex5_3`: jumps (-1,1) with rate x_1 e^{-1/x_2} and (1,1) with rate 1;
//!   a diagonal escape direction works even though the horizontal one
//!   freezes.

use crate::error::{Error, Result};
use crate::network::model::parse_model;
use crate::network::ReactionNetwork;
use crate::pathlab::cover::Cover;

/// A packaged model: network, cover fixture, and initial-condition rule.
#[derive(Debug, Clone)]
pub struct BuiltinModel {
    pub id: &'static str,
    pub net: ReactionNetwork,
    pub cover: Cover,
    /// Concentration limit of the initial conditions as v grows.
    pub x0_limit: Vec<f64>,
    x0_rule: fn(u64) -> Vec<i64>,
}

impl BuiltinModel {
    /// Initial counts at volume `v`.
    pub fn x0_counts(&self, v: u64) -> Vec<i64> {
        (self.x0_rule)(v)
    }
}

pub const BUILTIN_IDS: [&str; 7] = [
    "ex1_1",
    "ex2_1_dimer",
    "ex2_2",
    "ex2_3",
    "ex2_4",
    "ex5_2",
    "ex5_3",
];

/// The one-species birth model with rate `exp(-k / x)` for a chosen k.
pub fn ex2_4_with_k(k: f64) -> Result<ReactionNetwork> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Invalid(format!(
            "freeze constant must be positive, got {k}"
        )));
    }
    parse_model(&format!(
        r#"{{
            "name": "ex2_4",
            "species": ["A"],
            "reactions": [
                {{"in": {{}}, "out": {{"A": 1}}, "rate": {{"type": "expr", "formula": "exp(-{k} / x[A])"}}}}
            ]
        }}"#
    ))
}

/// Look up a built-in model by id.
pub fn builtin(id: &str) -> Result<BuiltinModel> {
    let (net, cover_json, x0_limit, x0_rule): (
        ReactionNetwork,
        &'static str,
        Vec<f64>,
        fn(u64) -> Vec<i64>,
    ) = match id {
        "ex1_1" => (
            parse_model(
                r#"{
                    "name": "ex1_1",
                    "species": ["A"],
                    "reactions": [
                        {"in": {"A": 1}, "out": {"A": 2}, "rate": {"type": "mass_action", "k": 1.0}}
                    ]
                }"#,
            )?,
            r#"{
                "regions": [
                    {
                        "halfspaces": [{"a": [-1.0], "b": 0.0}, {"a": [1.0], "b": 2.0}],
                        "boundary": [0],
                        "w": [1.0],
                        "kappa": 0.9,
                        "escape": [0]
                    }
                ],
                "eps": 0.25, "eps_prime": 0.15, "eps_dblprime": 0.1, "kappa_dblprime": 0.25
            }"#,
            vec![0.0],
            |_v| vec![1],
        ),
        "ex2_1_dimer" => (
            parse_model(
                r#"{
                    "name": "ex2_1_dimer",
                    "species": ["A", "B"],
                    "reactions": [
                        {"in": {"A": 2}, "out": {"B": 1}, "rate": {"type": "mass_action", "k": 1.0}},
                        {"in": {"B": 1}, "out": {"A": 2}, "rate": {"type": "mass_action", "k": 1.0}}
                    ]
                }"#,
            )?,
            r#"{
                "regions": [
                    {
                        "halfspaces": [
                            {"a": [-1.0, 0.0], "b": -0.05}, {"a": [1.0, 0.0], "b": 1.15},
                            {"a": [0.0, -1.0], "b": 0.0}, {"a": [0.0, 1.0], "b": 0.55}
                        ],
                        "boundary": [],
                        "w": [0.0, 0.0],
                        "kappa": 0.5,
                        "escape": []
                    }
                ],
                "eps": 0.25, "eps_prime": 0.15, "eps_dblprime": 0.1, "kappa_dblprime": 0.25
            }"#,
            vec![1.0, 0.0],
            |v| vec![v as i64, 0],
        ),
        "ex2_2" => (
            parse_model(
                r#"{
                    "name": "ex2_2",
                    "species": ["A", "B"],
                    "reactions": [
                        {"in": {"B": 1}, "out": {"B": 2}, "rate": {"type": "mass_action", "k": 1.0}},
                        {"in": {"B": 2}, "out": {"B": 1}, "rate": {"type": "mass_action", "k": 1.0}},
                        {"in": {"A": 1}, "out": {"A": 2, "B": 1}, "rate": {"type": "mass_action", "k": 1.0}},
                        {"in": {"A": 2, "B": 1}, "out": {"A": 1}, "rate": {"type": "mass_action", "k": 1.0}}
                    ]
                }"#,
            )?,
            r#"{
                "regions": [
                    {
                        "halfspaces": [
                            {"a": [-1.0, 0.0], "b": 0.0}, {"a": [1.0, 0.0], "b": 1.5},
                            {"a": [0.0, -1.0], "b": 0.0}, {"a": [0.0, 1.0], "b": 1.5}
                        ],
                        "boundary": [0, 2],
                        "w": [0.7071067811865476, 0.7071067811865476],
                        "kappa": 0.6,
                        "escape": [2]
                    }
                ],
                "eps": 0.25, "eps_prime": 0.15, "eps_dblprime": 0.1, "kappa_dblprime": 0.15
            }"#,
            vec![0.0, 0.0],
            |_v| vec![1, 0],
        ),
        "ex2_3" => (
            parse_model(
                r#"{
                    "name": "ex2_3",
                    "species": ["A", "B"],
                    "reactions": [
                        {"in": {"A": 1}, "out": {"B": 1}, "rate": {"type": "mass_action", "k": 1.0}},
                        {"in": {"B": 1}, "out": {"A": 1}, "rate": {"type": "mass_action", "k": 1.0}}
                    ]
                }"#,
            )?,
            r#"{
                "regions": [
                    {
                        "halfspaces": [
                            {"a": [-1.0, 0.0], "b": 0.0}, {"a": [1.0, 0.0], "b": 0.3},
                            {"a": [0.0, -1.0], "b": -0.5}, {"a": [0.0, 1.0], "b": 1.3}
                        ],
                        "boundary": [0],
                        "w": [0.7071067811865476, -0.7071067811865476],
                        "kappa": 0.6,
                        "escape": [1]
                    },
                    {
                        "halfspaces": [
                            {"a": [-1.0, 0.0], "b": -0.5}, {"a": [1.0, 0.0], "b": 1.3},
                            {"a": [0.0, -1.0], "b": 0.0}, {"a": [0.0, 1.0], "b": 0.3}
                        ],
                        "boundary": [2],
                        "w": [-0.7071067811865476, 0.7071067811865476],
                        "kappa": 0.6,
                        "escape": [0]
                    },
                    {
                        "halfspaces": [
                            {"a": [-1.0, 0.0], "b": -0.2}, {"a": [1.0, 0.0], "b": 1.1},
                            {"a": [0.0, -1.0], "b": -0.2}, {"a": [0.0, 1.0], "b": 1.1}
                        ],
                        "boundary": [],
                        "w": [0.0, 0.0],
                        "kappa": 0.6,
                        "escape": []
                    }
                ],
                "eps": 0.2, "eps_prime": 0.12, "eps_dblprime": 0.08, "kappa_dblprime": 0.15
            }"#,
            vec![0.0, 1.0],
            |v| vec![0, v as i64 + 1],
        ),
        "ex2_4" => (
            ex2_4_with_k(1.0)?,
            r#"{
                "regions": [
                    {
                        "halfspaces": [{"a": [-1.0], "b": 0.0}, {"a": [1.0], "b": 2.0}],
                        "boundary": [0],
                        "w": [1.0],
                        "kappa": 0.9,
                        "escape": [0]
                    }
                ],
                "eps": 0.25, "eps_prime": 0.15, "eps_dblprime": 0.1, "kappa_dblprime": 0.25
            }"#,
            vec![0.0],
            |_v| vec![1],
        ),
        "ex5_2" => (
            parse_model(
                r#"{
                    "name": "ex5_2",
                    "species": ["X1", "X2"],
                    "reactions": [
                        {"in": {}, "out": {"X2": 1}, "rate": {"type": "expr", "formula": "step(x[X1] - 1) * (x[X1] - 1)"}},
                        {"in": {}, "out": {"X1": 1}, "rate": {"type": "mass_action", "k": 1.0}}
                    ]
                }"#,
            )?,
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
                        "escape": [1]
                    }
                ],
                "eps": 0.25, "eps_prime": 0.15, "eps_dblprime": 0.1, "kappa_dblprime": 0.15
            }"#,
            vec![0.0, 0.0],
            |_v| vec![0, 0],
        ),
        "ex5_3" => (
            parse_model(
                r#"{
                    "name": "ex5_3",
                    "species": ["X1", "X2"],
                    "reactions": [
                        {"in": {"X1": 1}, "out": {"X2": 1}, "rate": {"type": "expr", "formula": "x[X1] * exp(-1 / x[X2])"}},
                        {"in": {}, "out": {"X1": 1, "X2": 1}, "rate": {"type": "mass_action", "k": 1.0}}
                    ]
                }"#,
            )?,
            r#"{
                "regions": [
                    {
                        "halfspaces": [
                            {"a": [-1.0, 0.0], "b": 0.0}, {"a": [1.0, 0.0], "b": 2.0},
                            {"a": [0.0, -1.0], "b": 0.0}, {"a": [0.0, 1.0], "b": 2.0}
                        ],
                        "boundary": [2],
                        "w": [0.7071067811865476, 0.7071067811865476],
                        "kappa": 0.6,
                        "escape": [1]
                    }
                ],
                "eps": 0.25, "eps_prime": 0.15, "eps_dblprime": 0.1, "kappa_dblprime": 0.15
            }"#,
            vec![0.0, 0.0],
            |_v| vec![0, 0],
        ),
        other => {
            return Err(Error::Invalid(format!(
                "unknown builtin model '{other}'; known: {}",
                BUILTIN_IDS.join(", ")
            )))
        }
    };
    let cover = Cover::parse(cover_json, &net)?;
    Ok(BuiltinModel {
        id: BUILTIN_IDS
            .iter()
            .find(|&&s| s == id)
            .expect("id matched above"),
        net,
        cover,
        x0_limit,
        x0_rule,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::audit::{audit_aleph, audit_rate_convergence};
    use crate::pathlab::cover::check_coverage;

    #[test]
    fn every_builtin_loads_and_is_consistent() {
        for id in BUILTIN_IDS {
            let m = builtin(id).unwrap();
            assert_eq!(m.id, id);
            assert_eq!(m.cover.dim(), m.net.dim(), "{id}");
            assert_eq!(m.x0_limit.len(), m.net.dim(), "{id}");
            // The v = 100 initial counts approach the declared limit.
            let c = m.x0_counts(100);
            for (ci, li) in c.iter().zip(&m.x0_limit) {
                assert!(
                    (*ci as f64 / 100.0 - li).abs() <= 0.011,
                    "{id}: counts {c:?} vs limit {:?}",
                    m.x0_limit
                );
            }
            // The initial point lies in the cover.
            let conc: Vec<f64> = c.iter().map(|&ci| ci as f64 / 100.0).collect();
            assert!(m.cover.locate(&conc).is_some(), "{id}: x0 {conc:?} uncovered");
        }
        assert!(builtin("nope").is_err());
    }

    #[test]
    fn rate_scaling_audits_pass_on_default_windows() {
        // Micro rates converge to macro rates with a finite distortion
        // constant on each model's cover window.
        for id in BUILTIN_IDS {
            let m = builtin(id).unwrap();
            let (lo, hi) = m.cover.region(0).bbox().unwrap();
            // Keep the grid strictly inside the positive orthant: ratio
            // checks at exact zeros are 0/0.
            let lo: Vec<f64> = lo.iter().map(|&v| v.max(0.05)).collect();
            let report = audit_rate_convergence(
                &m.net,
                &lo,
                &hi,
                3,
                &[128, 256, 512],
            )
            .unwrap();
            assert!(report.passed, "{id}: {report:?}");
            assert!(
                report.rows.last().unwrap().sup_gap < 0.05,
                "{id}: {report:?}"
            );
            let aleph = audit_aleph(&m.net, &lo, &hi, 3, 512).unwrap();
            assert!(aleph.min_ratio > 0.5, "{id}: {aleph:?}");
        }
    }

    #[test]
    fn simplex_cover_reaches_every_lattice_state() {
        // The three-region fixture covers the reachable simplex.
        let m = builtin("ex2_3").unwrap();
        let report = check_coverage(
            &m.cover,
            &m.net,
            16,
            &m.x0_counts(16),
            &[0.0, 0.0],
            &[1.3, 1.3],
            10_000,
        )
        .unwrap();
        assert!(report.passed, "{report:?}");
        assert!(report.checked > 10);
    }

    #[test]
    fn freeze_constant_is_embedded_in_the_formula() {
        let net = ex2_4_with_k(2.0).unwrap();
        let l = net.log_macro_rate(0, &[0.5]);
        assert!((l + 4.0).abs() < 1e-12, "log rate {l}");
        assert!(ex2_4_with_k(0.0).is_err());
    }
}
