//! Self-contained numerical statistics.
//!
//! Everything here is a pure function of its inputs.

mod describe;
mod dist;
mod normality;
mod ols;
pub mod special;

pub use describe::{histogram, summary_stats, Histogram, SummaryStats};
pub use dist::{normal_quantile, student_t_sf_two_sided};
pub use normality::{shapiro_francia, NormalityResult};
pub use ols::{ols_fit, OlsFit};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("LengthMismatch: {xs} regressor values vs {ys} responses")]
    LengthMismatch { xs: usize, ys: usize },
    #[error("TooFewPoints: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("ZeroVarianceX: regressor is constant")]
    ZeroVarianceX,
    #[error("NonFiniteInput")]
    NonFiniteInput,
    #[error("InvalidDf: degrees of freedom must be at least 1")]
    InvalidDf,
    #[error("OutOfDomain: probability {0} outside (0, 1)")]
    OutOfDomain(f64),
    #[error("SampleTooSmall: n = {0}, need at least 8")]
    SampleTooSmall(usize),
    #[error("SampleTooLarge: n = {0}, at most 5000")]
    SampleTooLarge(usize),
    #[error("ZeroVariance: all values are equal")]
    ZeroVariance,
    #[error("NonPositiveBinWidth: {0}")]
    NonPositiveBinWidth(f64),
}

/// Mean computed as an offset from the first element, so a constant input
/// returns that constant exactly.
pub(crate) fn shifted_mean(xs: &[f64]) -> f64 {
    let origin = xs[0];
    origin + xs.iter().map(|&x| x - origin).sum::<f64>() / xs.len() as f64
}
