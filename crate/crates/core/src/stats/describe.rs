use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{shifted_mean, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    /// Sample standard deviation, divisor `n - 1`.
    pub std_dev: f64,
    pub n: usize,
}

/// Mean and sample standard deviation; needs at least two values.
pub fn summary_stats(xs: &[f64]) -> Result<SummaryStats, StatsError> {
    if xs.len() < 2 {
        return Err(StatsError::TooFewPoints {
            needed: 2,
            got: xs.len(),
        });
    }
    if xs.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFiniteInput);
    }
    let mean = shifted_mean(xs);
    let ss: f64 = xs.iter().map(|&x| (x - mean) * (x - mean)).sum();
    Ok(SummaryStats {
        mean,
        std_dev: (ss / (xs.len() - 1) as f64).sqrt(),
        n: xs.len(),
    })
}

/// Counts per half-open bin `[origin + k*width, origin + (k+1)*width)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub origin: f64,
    pub counts: BTreeMap<i64, usize>,
}

impl Histogram {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Lower and upper edge of bin `k`.
    pub fn edges(&self, k: i64) -> (f64, f64) {
        let lo = self.origin + k as f64 * self.bin_width;
        (lo, lo + self.bin_width)
    }
}

pub fn histogram(xs: &[f64], bin_width: f64, origin: f64) -> Result<Histogram, StatsError> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(StatsError::NonPositiveBinWidth(bin_width));
    }
    if !origin.is_finite() || xs.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFiniteInput);
    }
    let mut counts = BTreeMap::new();
    for &v in xs {
        let k = ((v - origin) / bin_width).floor() as i64;
        *counts.entry(k).or_insert(0) += 1;
    }
    Ok(Histogram {
        bin_width,
        origin,
        counts,
    })
}
