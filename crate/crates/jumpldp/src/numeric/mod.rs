//! Small numeric toolbox: log-space arithmetic, Gauss-Legendre quadrature,
//! dense linear algebra, a two-phase simplex solver, deterministic RNG
//! streams, low-discrepancy sampling, and statistics helpers.

pub mod gauss;
pub mod linalg;
pub mod rng;
pub mod sample;
pub mod simplex;
pub mod stats;

/// log(e^a + e^b) without overflow; -inf acts as the additive identity.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        return f64::NAN;
    }
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// log(e^a - e^b); requires a >= b (NaN otherwise), returns -inf when a == b.
pub fn log_sub_exp(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        return f64::NAN;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a == b {
        return f64::NEG_INFINITY;
    }
    a + (-((b - a).exp())).ln_1p()
}

/// Format a float with 17 significant digits (round-trip safe) for CSV
/// output. Integers in float columns keep the same uniform format.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x == f64::INFINITY {
        return "inf".to_string();
    }
    if x == f64::NEG_INFINITY {
        return "-inf".to_string();
    }
    format!("{:.16e}", x)
}

/// Parse a float, accepting the `inf`/`-inf`/`nan` spellings that
/// [`fmt_float`] emits.
pub fn parse_float(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        t => t.parse::<f64>().ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_add_exp_matches_direct_sum() {
        let cases = [(0.0, 0.0), (-3.0, -4.5), (10.0, -10.0), (-700.0, -701.0)];
        for (a, b) in cases {
            let got = log_add_exp(a, b);
            let want = (a.exp() + b.exp()).ln();
            if want.is_finite() {
                assert!(
                    (got - want).abs() <= 1e-12 * (1.0 + want.abs()),
                    "log_add_exp({a},{b}) = {got}, want {want}"
                );
            }
        }
        assert_eq!(log_add_exp(f64::NEG_INFINITY, -2.0), -2.0);
        assert_eq!(
            log_add_exp(f64::NEG_INFINITY, f64::NEG_INFINITY),
            f64::NEG_INFINITY
        );
        // Deep underflow territory: direct evaluation would give ln(0).
        let got = log_add_exp(-2000.0, -2000.5);
        let want = -2000.0 + (-0.5f64).exp().ln_1p();
        assert!((got - want).abs() < 1e-12, "deep tail: {got} vs {want}");
    }

    #[test]
    fn log_sub_exp_matches_direct_difference() {
        let got = log_sub_exp(1.0, 0.0);
        let want = (1f64.exp() - 1.0).ln();
        assert!((got - want).abs() < 1e-12);
        assert_eq!(log_sub_exp(2.0, 2.0), f64::NEG_INFINITY);
        assert!(log_sub_exp(0.0, 1.0).is_nan(), "negative difference is NaN");
        assert_eq!(log_sub_exp(-5.0, f64::NEG_INFINITY), -5.0);
    }

    #[test]
    fn fmt_float_round_trips() {
        for &x in &[
            0.0,
            1.0,
            -0.2293375726,
            3.141592653589793e-200,
            -7.7e9,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ] {
            let s = fmt_float(x);
            let back = parse_float(&s).unwrap();
            assert_eq!(back, x, "round trip of {x} via {s:?}");
        }
    }
}
