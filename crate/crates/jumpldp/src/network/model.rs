//! Model documents: the JSON schema for reaction networks.
//!
//! ```json
//! {
//!   "name": "dimerization",
//!   "species": ["A", "B"],
//!   "reactions": [
//!     {"in": {"A": 2}, "out": {"B": 1}, "rate": {"type": "mass_action", "k": 1.0}},
//!     {"in": {}, "out": {"A": 1}, "rate": {"type": "expr", "formula": "exp(-1 / x[B])"}}
//!   ]
//! }
//! ```
//!
//! `in`/`out` map species names to stoichiometric counts; species absent
//! from a map have count zero. Unknown fields anywhere in the document are
//! rejected so typos fail loudly instead of silently dropping a rate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{expr, RateLaw, Reaction, ReactionNetwork};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    name: String,
    species: Vec<String>,
    reactions: Vec<ReactionDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReactionDoc {
    #[serde(rename = "in")]
    inputs: BTreeMap<String, u64>,
    #[serde(rename = "out")]
    outputs: BTreeMap<String, u64>,
    rate: RateDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
enum RateDoc {
    #[serde(rename = "mass_action")]
    MassAction { k: f64 },
    #[serde(rename = "expr")]
    Expr { formula: String },
}

fn dense_counts(
    map: &BTreeMap<String, u64>,
    species: &[String],
    reaction: usize,
    side: &str,
) -> Result<Vec<u64>> {
    let mut out = vec![0u64; species.len()];
    for (name, &count) in map {
        match species.iter().position(|s| s == name) {
            Some(i) => out[i] = count,
            None => {
                return Err(Error::Model(format!(
                    "reaction {reaction}: {side} references unknown species {name:?}"
                )))
            }
        }
    }
    Ok(out)
}

/// Parse a model document into a validated network.
pub fn parse_model(json: &str) -> Result<ReactionNetwork> {
    let doc: ModelDoc =
        serde_json::from_str(json).map_err(|e| Error::Model(format!("bad model JSON: {e}")))?;
    let mut reactions = Vec::with_capacity(doc.reactions.len());
    for (i, r) in doc.reactions.iter().enumerate() {
        let inputs = dense_counts(&r.inputs, &doc.species, i, "in")?;
        let outputs = dense_counts(&r.outputs, &doc.species, i, "out")?;
        let rate = match &r.rate {
            RateDoc::MassAction { k } => RateLaw::MassAction { k: *k },
            RateDoc::Expr { formula } => {
                let parsed = expr::parse_expr(formula, &doc.species)
                    .map_err(|e| Error::Model(format!("reaction {i}: {e}")))?;
                RateLaw::Expression { formula: parsed }
            }
        };
        reactions.push(Reaction {
            inputs,
            outputs,
            rate,
        });
    }
    ReactionNetwork::new(doc.name, doc.species, reactions)
}

fn sparse_counts(counts: &[u64], species: &[String]) -> BTreeMap<String, u64> {
    counts
        .iter()
        .zip(species)
        .filter(|(&c, _)| c > 0)
        .map(|(&c, s)| (s.clone(), c))
        .collect()
}

/// Serialize a network back to the document schema (pretty-printed).
pub fn to_json(net: &ReactionNetwork) -> String {
    let doc = ModelDoc {
        name: net.name().to_string(),
        species: net.species().to_vec(),
        reactions: net
            .reactions()
            .iter()
            .map(|r| ReactionDoc {
                inputs: sparse_counts(&r.inputs, net.species()),
                outputs: sparse_counts(&r.outputs, net.species()),
                rate: match &r.rate {
                    RateLaw::MassAction { k } => RateDoc::MassAction { k: *k },
                    RateLaw::Expression { formula } => RateDoc::Expr {
                        formula: formula.to_formula(net.species()),
                    },
                },
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("model document serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
        "name": "toy",
        "species": ["A", "B"],
        "reactions": [
            {"in": {"A": 2}, "out": {"B": 1}, "rate": {"type": "mass_action", "k": 3.0}},
            {"in": {}, "out": {"A": 1}, "rate": {"type": "expr", "formula": "exp(-1 / x[B])"}}
        ]
    }"#;

    #[test]
    fn parses_and_evaluates() {
        let net = parse_model(DOC).unwrap();
        assert_eq!(net.species(), &["A".to_string(), "B".to_string()]);
        assert_eq!(net.n_reactions(), 2);
        assert_eq!(net.jump(0), &[-2, 1]);
        assert_eq!(net.jump(1), &[1, 0]);
        let x = [0.5, 1.0];
        assert!((net.macro_rate(0, &x).unwrap() - 0.75).abs() < 1e-15);
        assert!((net.macro_rate(1, &x).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip_preserves_rates() {
        let net = parse_model(DOC).unwrap();
        let back = parse_model(&to_json(&net)).unwrap();
        let x = [0.31, 0.77];
        for r in 0..net.n_reactions() {
            assert_eq!(
                net.macro_rate(r, &x).unwrap().to_bits(),
                back.macro_rate(r, &x).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn unknown_fields_and_species_are_rejected() {
        let extra = DOC.replace("\"name\": \"toy\"", "\"name\": \"toy\", \"version\": 2");
        assert!(parse_model(&extra).is_err());
        let bad_species = DOC.replace("{\"A\": 2}", "{\"C\": 2}");
        assert!(parse_model(&bad_species).is_err());
        let bad_formula = DOC.replace("exp(-1 / x[B])", "exp(-1 / x[C])");
        let err = parse_model(&bad_formula).unwrap_err();
        assert!(err.to_string().contains("reaction 1"), "{err}");
    }
}
