//! Sample means with Student-t confidence intervals.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AggregateStats {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_runs: usize,
}

impl AggregateStats {
    pub fn half_width(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }

    /// True when the two intervals share at least one point.
    pub fn overlaps(&self, other: &AggregateStats) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

/// Mean of `samples` with a two-sided t interval at confidence `level`.
///
/// Returns `None` for fewer than two samples, where no interval exists.
pub fn aggregate(samples: &[f64], level: f64) -> Option<AggregateStats> {
    let n = samples.len();
    if n < 2 || !(0.0 < level && level < 1.0) {
        return None;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .ok()?
        .inverse_cdf(0.5 + level / 2.0);
    let half = t * (var / n as f64).sqrt();
    Some(AggregateStats {
        mean,
        ci_low: mean - half,
        ci_high: mean + half,
        n_runs: n,
    })
}

/// Plain arithmetic mean, `None` when empty.
pub fn mean(samples: &[f64]) -> Option<f64> {
    if samples.is_empty() {
        None
    } else {
        Some(samples.iter().sum::<f64>() / samples.len() as f64)
    }
}
