//! Small statistics helpers shared by the Monte-Carlo verifiers.

use statrs::distribution::{ContinuousCDF, Normal};

/// Confidence level used by the auditors and stability verifiers.
pub const CONFIDENCE: f64 = 0.99;

/// Two-sided normal quantile at `confidence`, Bonferroni-corrected over
/// `comparisons` simultaneous intervals.
pub fn bonferroni_z(confidence: f64, comparisons: usize) -> f64 {
    let k = comparisons.max(1) as f64;
    let alpha = (1.0 - confidence) / k;
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    std.inverse_cdf(1.0 - alpha / 2.0)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Running count / sum / sum of squares; merges associatively.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(mut self, other: Moments) -> Moments {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let mean = self.sum / n;
        ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    }

    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        for x in iter {
            m.push(x);
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_point_estimate() {
        let z = bonferroni_z(0.95, 1);
        assert!((z - 1.959963984540054).abs() < 1e-9);
        let (lo, hi) = wilson_interval(30, 100, z);
        assert!(lo < 0.3 && 0.3 < hi);
        // Zero successes still yields a strictly positive upper bound.
        let (lo, hi) = wilson_interval(0, 1000, z);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.01);
    }

    #[test]
    fn bonferroni_widens() {
        assert!(bonferroni_z(0.99, 16) > bonferroni_z(0.99, 1));
    }

    #[test]
    fn moments_match_direct_computation() {
        let xs = [1.0, 2.0, 4.0, 7.0];
        let m: Moments = xs.iter().copied().collect();
        assert_eq!(m.mean(), 3.5);
        let var = xs.iter().map(|x| (x - 3.5f64).powi(2)).sum::<f64>() / 3.0;
        assert!((m.variance() - var).abs() < 1e-12);
        let (a, b): (Moments, Moments) = (xs[..2].iter().copied().collect(), xs[2..].iter().copied().collect());
        assert_eq!(a.merge(b), m);
    }
}
