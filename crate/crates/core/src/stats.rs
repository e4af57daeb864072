//! Small statistics helpers for the Monte-Carlo experiments.

use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let radius = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // The endpoints are exactly 0 and 1 at the extremes; avoid rounding noise.
    let lo = if successes == 0 {
        0.0
    } else {
        (centre - radius).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (centre + radius).min(1.0)
    };
    (lo, hi)
}

/// Two-sided Clopper-Pearson interval at the confidence of a normal
/// interval of half-width `z` (so `z = 3` means 99.73%). Unlike
/// [`wilson_interval`] it keeps its coverage when only a handful of
/// successes are expected.
pub fn clopper_pearson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let alpha = erfc(z / std::f64::consts::SQRT_2);
    let (x, n) = (successes as f64, trials as f64);
    let lo = if successes == 0 {
        0.0
    } else {
        beta_quantile(x, n - x + 1.0, alpha / 2.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        beta_quantile(x + 1.0, n - x, 1.0 - alpha / 2.0)
    };
    (lo, hi)
}

/// Inverse of the regularised incomplete beta function in its first
/// argument, by bisection.
fn beta_quantile(a: f64, b: f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Standard error of a proportion `prob` estimated from `trials` samples.
pub fn binomial_se(prob: f64, trials: u64) -> f64 {
    if trials == 0 {
        return f64::INFINITY;
    }
    (prob * (1.0 - prob) / trials as f64).sqrt()
}

/// Nearest-rank quantile of an ascending slice; `q` in `[0, 1]`.
pub fn quantile_sorted(sorted: &[usize], q: f64) -> Option<usize> {
    if sorted.is_empty() {
        return None;
    }
    let rank = (q.clamp(0.0, 1.0) * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_phat_and_stays_in_unit_interval() {
        let (lo, hi) = wilson_interval(30, 100, Z95);
        assert!(lo < 0.3 && 0.3 < hi);
        let (lo, hi) = wilson_interval(0, 1000, Z95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.01);
        let (lo, hi) = wilson_interval(1000, 1000, Z95);
        assert!(lo > 0.99);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn clopper_pearson_known_values() {
        // Textbook 95% interval for 4 successes in 20 trials.
        let (lo, hi) = clopper_pearson_interval(4, 20, Z95);
        assert!((lo - 0.057_334).abs() < 1e-5, "{lo}");
        assert!((hi - 0.436_614).abs() < 1e-5, "{hi}");
        let (lo, hi) = clopper_pearson_interval(0, 100, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.036_217).abs() < 1e-5, "{hi}");
        // Rare events: 4 hits in 1e5 trials at 99.73% still covers 0.94e-5.
        let (lo, hi) = clopper_pearson_interval(4, 100_000, 3.0);
        assert!(lo < 0.94e-5 && hi > 4e-5);
        let (lo, hi) = clopper_pearson_interval(7, 7, Z95);
        assert!(lo > 0.5);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn nearest_rank_quantiles() {
        let v = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];
        assert_eq!(quantile_sorted(&v, 0.5), Some(5));
        assert_eq!(quantile_sorted(&v, 0.95), Some(10));
        assert_eq!(quantile_sorted(&v, 0.0), Some(1));
        assert_eq!(quantile_sorted(&[], 0.5), None);
    }
}
