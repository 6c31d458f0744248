//! Fluid limit: the deterministic flow dx/dt = sum_r lambda_r(x) gamma_r.
//!
//! Classical fourth-order Runge-Kutta on a fixed grid, using the raw
//! polynomial extension of mass-action rates so stages that overshoot the
//! orthant boundary by a rounding error stay smooth. The result is returned
//! as a piecewise-linear path with one breakpoint per step.

use crate::error::{Error, Result};
use crate::network::ReactionNetwork;
use crate::path::MacroPath;

/// Integrate the fluid limit from x0 over [0, t1] with n_steps RK4 steps.
/// Trajectories whose sup norm exceeds `blow_up` (or that leave f64 range)
/// abort with a numeric error.
pub fn fluid_limit(
    net: &ReactionNetwork,
    x0: &[f64],
    t1: f64,
    n_steps: usize,
    blow_up: f64,
) -> Result<MacroPath> {
    if x0.len() != net.dim() {
        return Err(Error::Invalid(format!(
            "initial state has dimension {}, model has {}",
            x0.len(),
            net.dim()
        )));
    }
    if !(t1 > 0.0 && t1.is_finite()) {
        return Err(Error::Invalid(format!("horizon must be positive, got {t1}")));
    }
    if n_steps == 0 {
        return Err(Error::Invalid("need at least one integration step".into()));
    }
    let h = t1 / n_steps as f64;
    let mut x = x0.to_vec();
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut points = Vec::with_capacity(n_steps + 1);
    times.push(0.0);
    points.push(x.clone());
    for step in 0..n_steps {
        let k1 = net.drift_raw(&x);
        let k2 = net.drift_raw(&combine(&x, &k1, 0.5 * h));
        let k3 = net.drift_raw(&combine(&x, &k2, 0.5 * h));
        let k4 = net.drift_raw(&combine(&x, &k3, h));
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t = h * (step + 1) as f64;
        if x.iter().any(|v| !v.is_finite() || v.abs() > blow_up) {
            return Err(Error::Numeric(format!(
                "fluid limit exceeded the blow-up bound {blow_up} near t = {t}"
            )));
        }
        times.push(t);
        points.push(x.clone());
    }
    MacroPath::new(times, points)
}

fn combine(x: &[f64], k: &[f64], s: f64) -> Vec<f64> {
    x.iter().zip(k).map(|(xi, ki)| xi + s * ki).collect()
}
