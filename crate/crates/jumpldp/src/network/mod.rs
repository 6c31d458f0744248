//! Reaction networks: species, reactions with stoichiometry, and rate laws
//! at both the microscopic (lattice) and macroscopic (density) scale.
//!
//! A reaction r has input counts `gamma_in`, output counts `gamma_out`, and
//! jump vector `gamma_r = gamma_out - gamma_in`. At volume v the process
//! sits at `x = counts / v` and reaction r fires at total rate
//! `v * Lambda^v_r(x)`, moving the state by `gamma_r / v`.
//!
//! Rate laws:
//!
//! - Mass action with constant k. Microscopically
//!   `Lambda^v_r(x) = k * v^{-|gamma_in|} * prod_i ff(counts_i, gamma_in_i)`
//!   where `ff` is the falling factorial; this converges to the density
//!   rate `lambda_r(x) = k * prod_i x_i^{gamma_in_i}`.
//! - An explicit formula in the concentrations, used at both scales
//!   (`Lambda^v_r = lambda_r`), for models whose rates vanish faster than
//!   any polynomial.
//!
//! Rates must be nonnegative on the closed positive orthant. Evaluations
//! that come out negative beyond rounding dust, NaN, or infinite are domain
//! errors; dust in `[-1e-12, 0)` clamps to zero.

pub mod audit;
pub mod expr;
pub mod fluid;
pub mod model;

use crate::error::{Error, Result};
pub use expr::{parse_expr, Expr};

/// Negative rate values at least this small (and below zero) are treated as
/// rounding dust and clamped; anything more negative is a domain error.
pub const RATE_DUST: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum RateLaw {
    MassAction { k: f64 },
    Expression { formula: Expr },
}

#[derive(Debug, Clone)]
pub struct Reaction {
    /// Input stoichiometry per species (consumed copies).
    pub inputs: Vec<u64>,
    /// Output stoichiometry per species (produced copies).
    pub outputs: Vec<u64>,
    pub rate: RateLaw,
}

/// Microscopic state: counts on the integer lattice together with the
/// volume, representing concentrations `counts / v`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledState {
    pub v: u64,
    pub counts: Vec<i64>,
}

impl ScaledState {
    /// Nearest lattice state to the concentration vector x.
    pub fn from_concentrations(v: u64, x: &[f64]) -> ScaledState {
        assert!(v > 0);
        ScaledState {
            v,
            counts: x.iter().map(|&xi| (v as f64 * xi).round() as i64).collect(),
        }
    }

    pub fn concentrations(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.v as f64)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct ReactionNetwork {
    name: String,
    species: Vec<String>,
    reactions: Vec<Reaction>,
    /// Jump vectors gamma_r = outputs - inputs, one per reaction.
    jumps: Vec<Vec<i64>>,
    jumps_f64: Vec<Vec<f64>>,
}

impl ReactionNetwork {
    pub fn new(name: String, species: Vec<String>, reactions: Vec<Reaction>) -> Result<Self> {
        if species.is_empty() {
            return Err(Error::Model("model needs at least one species".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for s in &species {
            if s.is_empty() {
                return Err(Error::Model("species names must be nonempty".into()));
            }
            if !seen.insert(s.clone()) {
                return Err(Error::Model(format!("duplicate species name {s:?}")));
            }
        }
        if reactions.is_empty() {
            return Err(Error::Model("model needs at least one reaction".into()));
        }
        let d = species.len();
        for (r, rx) in reactions.iter().enumerate() {
            if rx.inputs.len() != d || rx.outputs.len() != d {
                return Err(Error::Model(format!(
                    "reaction {r} stoichiometry does not cover all {d} species"
                )));
            }
            if let RateLaw::MassAction { k } = rx.rate {
                if !(k.is_finite() && k >= 0.0) {
                    return Err(Error::Model(format!(
                        "reaction {r} has mass-action constant {k}; need a finite k >= 0"
                    )));
                }
            }
        }
        let jumps: Vec<Vec<i64>> = reactions
            .iter()
            .map(|rx| {
                rx.inputs
                    .iter()
                    .zip(&rx.outputs)
                    .map(|(&i, &o)| o as i64 - i as i64)
                    .collect()
            })
            .collect();
        let jumps_f64 = jumps
            .iter()
            .map(|j| j.iter().map(|&v| v as f64).collect())
            .collect();
        Ok(ReactionNetwork {
            name,
            species,
            reactions,
            jumps,
            jumps_f64,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s == name)
    }

    pub fn dim(&self) -> usize {
        self.species.len()
    }

    pub fn n_reactions(&self) -> usize {
        self.reactions.len()
    }

    pub fn reaction(&self, r: usize) -> &Reaction {
        &self.reactions[r]
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn jump(&self, r: usize) -> &[i64] {
        &self.jumps[r]
    }

    pub fn jump_f64(&self, r: usize) -> &[f64] {
        &self.jumps_f64[r]
    }

    pub fn jumps_f64(&self) -> &[Vec<f64>] {
        &self.jumps_f64
    }

    /// True when the reaction's jump vector is zero: it spends exponential
    /// clocks without moving the state, acting as a uniformizing placeholder.
    pub fn is_uniformizing(&self, r: usize) -> bool {
        self.jumps[r].iter().all(|&j| j == 0)
    }

    /// Macroscopic rate without domain checks. Mass action extends as a
    /// polynomial to negative coordinates, which keeps integrator stages
    /// smooth when they overshoot the orthant boundary slightly.
    pub fn macro_rate_raw(&self, r: usize, x: &[f64]) -> f64 {
        match &self.reactions[r].rate {
            RateLaw::MassAction { k } => {
                let mut v = *k;
                for (xi, &g) in x.iter().zip(&self.reactions[r].inputs) {
                    if g > 0 {
                        v *= xi.powi(g as i32);
                    }
                }
                v
            }
            RateLaw::Expression { formula } => formula.eval(x),
        }
    }

    /// Domain check; `state` is only materialized on the error path so hot
    /// loops pay nothing when rates are fine.
    fn check_rate(&self, r: usize, state: impl FnOnce() -> Vec<f64>, v: f64) -> Result<f64> {
        if v >= 0.0 && v.is_finite() {
            return Ok(v);
        }
        if (-RATE_DUST..0.0).contains(&v) {
            return Ok(0.0);
        }
        let message = if v.is_nan() {
            "rate evaluated to NaN".to_string()
        } else if v.is_infinite() {
            "rate evaluated to infinity".to_string()
        } else {
            format!("rate evaluated to {v} < 0")
        };
        Err(Error::RateDomain {
            reaction: r,
            state: state(),
            message,
        })
    }

    /// Macroscopic rate with domain checks.
    pub fn macro_rate(&self, r: usize, x: &[f64]) -> Result<f64> {
        let v = self.macro_rate_raw(r, x);
        self.check_rate(r, || x.to_vec(), v)
    }

    pub fn macro_rates(&self, x: &[f64]) -> Result<Vec<f64>> {
        (0..self.n_reactions()).map(|r| self.macro_rate(r, x)).collect()
    }

    /// log lambda_r(x), finite even where the plain value underflows.
    /// Returns -inf for a zero rate and NaN outside the domain.
    pub fn log_macro_rate(&self, r: usize, x: &[f64]) -> f64 {
        match &self.reactions[r].rate {
            RateLaw::MassAction { k } => {
                let mut l = k.ln();
                for (xi, &g) in x.iter().zip(&self.reactions[r].inputs) {
                    if g > 0 {
                        l += g as f64 * xi.ln();
                    }
                }
                l
            }
            RateLaw::Expression { formula } => formula.log_value(x),
        }
    }

    pub fn log_macro_rates(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_reactions())
            .map(|r| self.log_macro_rate(r, x))
            .collect()
    }

    /// log rates with domain checking: NaN log values are resolved through
    /// the plain evaluation (so dust-negative rates clamp to -inf and real
    /// domain violations become errors).
    pub fn log_macro_rates_checked(&self, x: &[f64]) -> Result<Vec<f64>> {
        (0..self.n_reactions())
            .map(|r| {
                let l = self.log_macro_rate(r, x);
                if !l.is_nan() {
                    return Ok(l);
                }
                let v = self.macro_rate(r, x)?;
                Ok(v.ln())
            })
            .collect()
    }

    /// Fluid-limit drift sum_r lambda_r(x) gamma_r, domain checked.
    pub fn drift(&self, x: &[f64]) -> Result<Vec<f64>> {
        let rates = self.macro_rates(x)?;
        Ok(self.drift_from_rates(&rates))
    }

    /// Drift from the raw polynomial extension (no domain checks).
    pub fn drift_raw(&self, x: &[f64]) -> Vec<f64> {
        let rates: Vec<f64> = (0..self.n_reactions())
            .map(|r| self.macro_rate_raw(r, x))
            .collect();
        self.drift_from_rates(&rates)
    }

    fn drift_from_rates(&self, rates: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        for (r, &lam) in rates.iter().enumerate() {
            for (yi, g) in y.iter_mut().zip(&self.jumps_f64[r]) {
                *yi += lam * g;
            }
        }
        y
    }

    /// Microscopic rate Lambda^v_r at integer counts. Mass action uses
    /// falling factorials and vanishes whenever an input count is below its
    /// stoichiometry (in particular at negative counts); expression laws
    /// evaluate the formula at counts / v.
    pub fn micro_rate(&self, r: usize, state: &ScaledState) -> Result<f64> {
        let v = state.v;
        let val = match &self.reactions[r].rate {
            RateLaw::MassAction { k } => {
                let mut order = 0u64;
                for (&c, &g) in state.counts.iter().zip(&self.reactions[r].inputs) {
                    if g > 0 && c < g as i64 {
                        return Ok(0.0);
                    }
                    order += g;
                }
                match falling_factorial_product(&state.counts, &self.reactions[r].inputs) {
                    Some(ff) => k * ff / (v as f64).powi(order as i32),
                    None => {
                        // Product overflows u128; redo in f64, interleaving
                        // the division by v to keep magnitudes bounded.
                        let mut val = *k;
                        for (&c, &g) in state.counts.iter().zip(&self.reactions[r].inputs) {
                            for j in 0..g {
                                val *= (c - j as i64) as f64 / v as f64;
                            }
                        }
                        val
                    }
                }
            }
            RateLaw::Expression { formula } => formula.eval(&state.concentrations()),
        };
        self.check_rate(r, || state.concentrations(), val)
    }

    pub fn micro_rates(&self, state: &ScaledState) -> Result<Vec<f64>> {
        (0..self.n_reactions())
            .map(|r| self.micro_rate(r, state))
            .collect()
    }

    /// log Lambda^v_r at integer counts, finite where the plain value
    /// underflows (an expression like exp(-v) is far below the smallest
    /// positive double once v exceeds a few hundred); -inf for a rate of
    /// exactly zero, NaN off domain.
    pub fn log_micro_rate(&self, r: usize, state: &ScaledState) -> f64 {
        match &self.reactions[r].rate {
            RateLaw::MassAction { k } => {
                let mut l = k.ln();
                let lv = (state.v as f64).ln();
                for (&c, &g) in state.counts.iter().zip(&self.reactions[r].inputs) {
                    if g > 0 {
                        if c < g as i64 {
                            return f64::NEG_INFINITY;
                        }
                        for j in 0..g {
                            l += ((c - j as i64) as f64).ln() - lv;
                        }
                    }
                }
                l
            }
            RateLaw::Expression { formula } => formula.log_value(&state.concentrations()),
        }
    }
}

/// prod_i counts_i * (counts_i - 1) * .. * (counts_i - g_i + 1) in u128;
/// None on overflow. Callers ensure counts_i >= g_i beforehand.
fn falling_factorial_product(counts: &[i64], inputs: &[u64]) -> Option<f64> {
    let mut acc: u128 = 1;
    for (&c, &g) in counts.iter().zip(inputs) {
        for j in 0..g {
            let factor = (c - j as i64) as u128;
            acc = acc.checked_mul(factor)?;
        }
    }
    Some(acc as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mass(inputs: Vec<u64>, outputs: Vec<u64>, k: f64) -> Reaction {
        Reaction {
            inputs,
            outputs,
            rate: RateLaw::MassAction { k },
        }
    }

    /// 2A -> B at k = 3, plus B -> A at k = 1.
    fn dimer() -> ReactionNetwork {
        ReactionNetwork::new(
            "dimer".into(),
            vec!["A".into(), "B".into()],
            vec![
                mass(vec![2, 0], vec![0, 1], 3.0),
                mass(vec![0, 1], vec![1, 0], 1.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn jumps_and_uniformizing_flag() {
        let net = ReactionNetwork::new(
            "n".into(),
            vec!["A".into()],
            vec![mass(vec![1], vec![1], 2.0), mass(vec![1], vec![2], 1.0)],
        )
        .unwrap();
        assert_eq!(net.jump(0), &[0]);
        assert_eq!(net.jump(1), &[1]);
        assert!(net.is_uniformizing(0));
        assert!(!net.is_uniformizing(1));
    }

    #[test]
    fn macro_mass_action_is_a_monomial() {
        let net = dimer();
        let x = [0.5, 0.25];
        assert!((net.macro_rate(0, &x).unwrap() - 3.0 * 0.25).abs() < 1e-15);
        assert!((net.macro_rate(1, &x).unwrap() - 0.25).abs() < 1e-15);
        let d = net.drift(&x).unwrap();
        // gamma_0 = (-2, 1), gamma_1 = (1, -1).
        assert!((d[0] - (-2.0 * 0.75 + 0.25)).abs() < 1e-15);
        assert!((d[1] - (0.75 - 0.25)).abs() < 1e-15);
    }

    #[test]
    fn micro_mass_action_uses_falling_factorials() {
        // 2A -> B at k = 3, v = 10, 4 copies of A:
        // Lambda = 3 * 4 * 3 / 10^2 = 0.36.
        let net = dimer();
        let s = ScaledState { v: 10, counts: vec![4, 0] };
        assert!((net.micro_rate(0, &s).unwrap() - 0.36).abs() < 1e-15);
        // Below stoichiometry the rate is exactly zero, negatives included.
        let s1 = ScaledState { v: 10, counts: vec![1, 0] };
        assert_eq!(net.micro_rate(0, &s1).unwrap(), 0.0);
        let s2 = ScaledState { v: 10, counts: vec![-3, 0] };
        assert_eq!(net.micro_rate(0, &s2).unwrap(), 0.0);
    }

    #[test]
    fn micro_rate_survives_huge_counts() {
        // Counts big enough that the u128 product overflows: order-3 input
        // with counts near 2^62 forces the f64 fallback.
        let net = ReactionNetwork::new(
            "big".into(),
            vec!["A".into()],
            vec![mass(vec![3], vec![0], 1.0)],
        )
        .unwrap();
        let c = (1i64 << 62) - 5;
        let s = ScaledState { v: 1 << 32, counts: vec![c] };
        let got = net.micro_rate(0, &s).unwrap();
        let x = c as f64 / (1u64 << 32) as f64;
        let want = x * x * x;
        assert!((got / want - 1.0).abs() < 1e-9, "got {got}, want ~{want}");
    }

    #[test]
    fn log_rates_match_plain_rates_where_finite() {
        let net = dimer();
        let x = [0.7, 0.2];
        for r in 0..2 {
            let plain = net.macro_rate(r, &x).unwrap().ln();
            assert!((net.log_macro_rate(r, &x) - plain).abs() < 1e-12);
        }
        let s = ScaledState::from_concentrations(50, &x);
        for r in 0..2 {
            let plain = net.micro_rate(r, &s).unwrap().ln();
            assert!((net.log_micro_rate(r, &s) - plain).abs() < 1e-12);
        }
    }

    #[test]
    fn log_macro_rate_reaches_below_underflow() {
        let net = ReactionNetwork::new(
            "v".into(),
            vec!["A".into()],
            vec![Reaction {
                inputs: vec![0],
                outputs: vec![1],
                rate: RateLaw::Expression {
                    formula: parse_expr("exp(-1 / x[A])", &["A".into()]).unwrap(),
                },
            }],
        )
        .unwrap();
        let x = [5e-4];
        assert_eq!(net.macro_rate(0, &x).unwrap(), 0.0);
        assert_eq!(net.log_macro_rate(0, &x), -2000.0);
    }

    #[test]
    fn negative_rates_are_domain_errors_and_dust_clamps() {
        let species = vec!["A".into()];
        let mk = |f: &str| {
            ReactionNetwork::new(
                "n".into(),
                species.clone(),
                vec![Reaction {
                    inputs: vec![0],
                    outputs: vec![1],
                    rate: RateLaw::Expression {
                        formula: parse_expr(f, &species).unwrap(),
                    },
                }],
            )
            .unwrap()
        };
        assert!(mk("x[A] - 1").macro_rate(0, &[0.0]).is_err());
        assert_eq!(mk("0 - 1e-13").macro_rate(0, &[0.0]).unwrap(), 0.0);
        assert!(mk("1 / x[A]").macro_rate(0, &[0.0]).is_err());
        assert!(mk("log(x[A])").macro_rate(0, &[0.0]).is_err());
    }

    #[test]
    fn scaled_state_round_trips_concentrations() {
        let s = ScaledState::from_concentrations(100, &[0.5, 1.25]);
        assert_eq!(s.counts, vec![50, 125]);
        assert_eq!(s.concentrations(), vec![0.5, 1.25]);
    }

    #[test]
    fn constructor_rejects_bad_models() {
        assert!(ReactionNetwork::new("n".into(), vec![], vec![]).is_err());
        assert!(ReactionNetwork::new(
            "n".into(),
            vec!["A".into(), "A".into()],
            vec![mass(vec![1, 0], vec![0, 1], 1.0)],
        )
        .is_err());
        assert!(ReactionNetwork::new(
            "n".into(),
            vec!["A".into()],
            vec![mass(vec![1, 2], vec![0, 0], 1.0)],
        )
        .is_err());
        assert!(ReactionNetwork::new(
            "n".into(),
            vec!["A".into()],
            vec![mass(vec![1], vec![0], -1.0)],
        )
        .is_err());
    }
}
