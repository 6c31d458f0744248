//! Sample-path large-deviation toolkit for density-scaled Markov jump
//! processes whose rates may vanish on part of the state space.
//!
//! A model is a reaction network on `d` species. At volume parameter `v` the
//! microscopic process `X^v` lives on the lattice `(1/v)Z^d` and jumps by
//! `gamma^r / v` at rate `v * Lambda^v_r(x)`; as `v` grows, `Lambda^v_r`
//! converges to a macroscopic rate `lambda_r` and sample paths concentrate on
//! the fluid limit `dx/dt = sum_r lambda_r(x) gamma^r`. The cost of deviating
//! from the fluid limit is measured by the path action
//!
//! ```text
//! I(z) = integral of l(z(t), zdot(t)) dt,
//! l(x,y) = sup_theta { theta.y - sum_r lambda_r(x) (e^{theta.gamma_r} - 1) }
//!        = inf { H(mu | lambda(x)) : mu >= 0, Gamma mu = y },
//! H(mu|lambda) = sum_r lambda_r - mu_r + mu_r log(mu_r / lambda_r).
//! ```
//!
//! The crate provides:
//!
//! - [`network`]: model types, a rate-expression parser, microscopic and
//!   macroscopic rates, the fluid limit, and rate-scaling audits.
//! - [`simulator`]: exact stochastic simulation (direct method), flux
//!   augmentation, reachable sets, and Monte Carlo tube probabilities.
//! - [`exactdist`]: exact transient distributions of the truncated
//!   microscopic chain by uniformization; the ground-truth oracle at small v.
//! - [`ratefn`]: the entropy form `H`, the Lagrangian `l` by safeguarded
//!   concave maximization, feasibility certificates, path and flux actions,
//!   and duality diagnostics.
//! - [`pathlab`]: polytope covers of the state space, the shifted-path
//!   construction that steers clear of the degenerate set where rates vanish,
//!   its geometric verification, escape costs, and auditors for the
//!   vanishing-rate assumptions (decay exponents, FAST jumps, cone
//!   obstructions).
//! - [`experiments`]: built-in models, convergence ladders against the exact
//!   solver, action minimization, and divergence probes.
//!
//! Everything is deterministic given seeds: per-trial RNG streams are derived
//! from `(base_seed, trial_index)` through a fixed avalanche mix, so results
//! do not depend on thread scheduling.

pub mod error;
pub mod exactdist;
pub mod experiments;
pub mod network;
pub mod numeric;
pub mod path;
pub mod pathlab;
pub mod ratefn;
pub mod simulator;

pub use error::{Error, Result};
pub use network::ReactionNetwork;
pub use path::MacroPath;
