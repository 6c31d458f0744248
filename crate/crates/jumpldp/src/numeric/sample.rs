//! Low-discrepancy sampling and grid helpers.
//!
//! Audits that scan a region for a supremum or infimum use Halton points:
//! deterministic, reproducible, and far better space coverage than a
//! pseudo-random scatter of the same size.

/// First primes, one per dimension of a Halton point.
const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Van der Corput radical inverse of `index` in the given base, in [0, 1).
pub fn radical_inverse(base: u64, mut index: u64) -> f64 {
    let inv_base = 1.0 / base as f64;
    let mut f = inv_base;
    let mut r = 0.0;
    while index > 0 {
        r += (index % base) as f64 * f;
        index /= base;
        f *= inv_base;
    }
    r
}

/// Point `index` of the Halton sequence in [0,1)^dim. Index 0 maps to the
/// origin; callers who want to avoid it can start at 1.
pub fn halton_point(dim: usize, index: u64) -> Vec<f64> {
    assert!(
        dim <= PRIMES.len(),
        "halton_point supports up to {} dimensions",
        PRIMES.len()
    );
    (0..dim).map(|d| radical_inverse(PRIMES[d], index)).collect()
}

/// n evenly spaced values from a to b inclusive (n >= 2), plus the exact
/// endpoints regardless of rounding.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let mut out = Vec::with_capacity(n);
    let h = (b - a) / (n - 1) as f64;
    for i in 0..n {
        out.push(a + h * i as f64);
    }
    out[0] = a;
    out[n - 1] = b;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_base_two_prefix() {
        let want = [0.0, 0.5, 0.25, 0.75, 0.125, 0.625, 0.375, 0.875];
        for (i, &w) in want.iter().enumerate() {
            assert_eq!(radical_inverse(2, i as u64), w);
        }
    }

    #[test]
    fn halton_points_fill_the_square() {
        // Every cell of a 4x4 partition should be hit within 64 points.
        let mut hit = [[false; 4]; 4];
        for i in 0..64 {
            let p = halton_point(2, i);
            let cx = ((p[0] * 4.0) as usize).min(3);
            let cy = ((p[1] * 4.0) as usize).min(3);
            hit[cx][cy] = true;
        }
        assert!(hit.iter().flatten().all(|&h| h));
    }

    #[test]
    fn linspace_hits_endpoints_exactly() {
        let v = linspace(0.1, 0.7, 7);
        assert_eq!(v.len(), 7);
        assert_eq!(v[0], 0.1);
        assert_eq!(v[6], 0.7);
        assert!((v[3] - 0.4).abs() < 1e-15);
    }
}
