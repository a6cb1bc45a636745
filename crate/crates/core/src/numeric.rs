//! Small numeric helpers shared across modules.

/// Formats with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Pairwise (cascade) summation; error grows as `O(log n)` instead of `O(n)`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 128;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let (lo, hi) = xs.split_at(xs.len() / 2);
    pairwise_sum(lo) + pairwise_sum(hi)
}

/// Wilson score interval for `k` successes in `n` trials at normal quantile `z`.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    // Clamp so the interval always brackets the point estimate despite rounding.
    (
        (centre - half).max(0.0).min(p),
        (centre + half).min(1.0).max(p),
    )
}

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fmt17_round_trips() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt(), 1e-300, 6.02e23, 0.0, -5.5] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(fmt17(0.25), "2.5000000000000000e-1");
    }

    #[test]
    fn wilson_known_values() {
        let (lo, hi) = wilson_interval(0, 100, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.036995).abs() < 1e-5);
        let (lo, hi) = wilson_interval(50, 100, Z95);
        assert!((lo - 0.403832).abs() < 1e-5 && (hi - 0.596168).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn wilson_brackets_estimate(n in 1u64..100_000, frac in 0.0f64..=1.0) {
            let k = ((n as f64) * frac).floor() as u64;
            let (lo, hi) = wilson_interval(k, n, Z95);
            let p = k as f64 / n as f64;
            prop_assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
        }

        #[test]
        fn pairwise_matches_exact_integer_sums(v in prop::collection::vec(-1_000_000i64..1_000_000, 0..2000)) {
            let xs: Vec<f64> = v.iter().map(|&x| x as f64).collect();
            prop_assert_eq!(pairwise_sum(&xs), v.iter().sum::<i64>() as f64);
        }
    }
}
