//! Small statistical helpers: binomial confidence intervals, least-squares
//! slopes for log-log diagnostics, and first-order Richardson extrapolation
//! of scale ladders.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials > 0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // At the extremes the exact bound is 0 (or 1); rounding in
    // center - half would otherwise leave ~1e-18 residue.
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Least-squares slope of y against x. Requires at least two distinct x.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    assert!(sxx > 0.0, "slope needs at least two distinct x values");
    sxy / sxx
}

/// First-order Richardson extrapolation: given f(v) = a + b/v + o(1/v)
/// sampled at two scales, recover a.
pub fn richardson1(v1: f64, f1: f64, v2: f64, f2: f64) -> f64 {
    assert!(v1 != v2);
    (v2 * f2 - v1 * f1) / (v2 - v1)
}

pub fn mean(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty());
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Median by sorting a copy; NaNs are rejected.
pub fn median(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty());
    assert!(xs.iter().all(|x| !x.is_nan()));
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_zero_successes_closed_form() {
        // With zero successes the interval is (0, z^2 / (n + z^2)).
        let n = 100u64;
        let (lo, hi) = wilson_interval(0, n, Z95);
        assert_eq!(lo, 0.0);
        let want = Z95 * Z95 / (n as f64 + Z95 * Z95);
        assert!((hi - want).abs() < 1e-15, "hi {hi} want {want}");
    }

    #[test]
    fn wilson_contains_point_estimate() {
        for s in [1u64, 17, 50, 99] {
            let (lo, hi) = wilson_interval(s, 100, Z95);
            let p = s as f64 / 100.0;
            assert!(lo < p && p < hi, "s={s}: ({lo}, {hi}) vs {p}");
        }
    }

    #[test]
    fn slope_exact_on_a_line() {
        let xs = [0.0, 1.0, 2.0, 5.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.5 * x).collect();
        assert!((fit_slope(&xs, &ys) + 2.5).abs() < 1e-14);
    }

    #[test]
    fn richardson_removes_first_order_error() {
        let f = |v: f64| 7.0 + 3.0 / v;
        let a = richardson1(100.0, f(100.0), 400.0, f(400.0));
        assert!((a - 7.0).abs() < 1e-12);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
