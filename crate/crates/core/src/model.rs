//! The forward model: growth rate `A/G + k * dln N_s`, linear forecasts,
//! seeded simulation of synthetic economies and recovery of `A`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{annual_increments, increment_regression_vs_level, AnalysisError, IncrementSeries, LevelTiming};
use crate::data::{CohortSeries, CountryId, DataError, GdpSeries, Observation, SegmentLabel, SegmentSpec, YearRange};
use crate::stats::{summary_stats, StatsError, SummaryStats};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("NonPositiveLevel: level {level} in {year}")]
    NonPositiveLevel { year: i32, level: f64 },
    #[error("YearBeforeStart: {target} precedes {t0}")]
    YearBeforeStart { target: i32, t0: i32 },
    #[error("CohortNotCovered: cohort must span {first}-{last}")]
    CohortNotCovered { first: i32, last: i32 },
    #[error("InvalidParams: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

type Result<T> = std::result::Result<T, ModelError>;

pub const DEFAULT_COHORT_FACTOR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Inertial annual increment, dollars per year.
    pub a: f64,
    /// Level at `t0`, dollars.
    pub c: f64,
    pub t0: i32,
    /// Multiplier on the cohort log-change: 0.5 for most developed
    /// economies, 2/3 has been reported for Japan.
    #[serde(default = "default_cohort_factor")]
    pub cohort_factor: f64,
}

fn default_cohort_factor() -> f64 {
    DEFAULT_COHORT_FACTOR
}

impl ModelParams {
    pub fn new(a: f64, c: f64, t0: i32) -> Result<Self> {
        Self::with_cohort_factor(a, c, t0, DEFAULT_COHORT_FACTOR)
    }

    pub fn with_cohort_factor(a: f64, c: f64, t0: i32, cohort_factor: f64) -> Result<Self> {
        let p = Self {
            a,
            c,
            t0,
            cohort_factor,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() {
            return Err(ModelError::InvalidParams(format!("A = {} is not finite", self.a)));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(ModelError::InvalidParams(format!("C = {} must be positive", self.c)));
        }
        if !(self.cohort_factor.is_finite() && self.cohort_factor >= 0.0) {
            return Err(ModelError::InvalidParams(format!(
                "cohort factor {} must be non-negative",
                self.cohort_factor
            )));
        }
        Ok(())
    }
}

/// Relative growth rate per year at level `level` when the specific-age
/// population changes by `dln_n` (log units per year).
pub fn growth_rate(params: &ModelParams, level: f64, dln_n: f64) -> Result<f64> {
    if level.is_nan() || level <= 0.0 {
        return Err(ModelError::NonPositiveLevel { year: params.t0, level });
    }
    Ok(params.a / level + params.cohort_factor * dln_n)
}

/// `C + A * (target_year - t0)`.
pub fn inertial_forecast(params: &ModelParams, target_year: i32) -> Result<f64> {
    if target_year < params.t0 {
        return Err(ModelError::YearBeforeStart {
            target: target_year,
            t0: params.t0,
        });
    }
    Ok(params.c + params.a * f64::from(target_year - params.t0))
}

/// How one simulated year advances the level.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateRule {
    /// `G * exp(g)`, the discrete form of the continuous growth rate.
    #[default]
    Exponential,
    /// `G + A + k * dln N * G`: exactly arithmetic without a cohort.
    Linearized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: ModelParams,
    /// Number of yearly steps; the series has `years + 1` levels.
    pub years: u32,
    #[serde(default)]
    pub cohort: Option<CohortSeries>,
    /// Standard deviation of additive Gaussian noise on each new level.
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub update: UpdateRule,
}

impl SimConfig {
    pub fn new(params: ModelParams, years: u32) -> Self {
        Self {
            params,
            years,
            cohort: None,
            noise_sigma: 0.0,
            seed: 0,
            update: UpdateRule::Exponential,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.years < 1 {
            return Err(ModelError::InvalidParams("years must be at least 1".into()));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(ModelError::InvalidParams(format!(
                "noise sigma {} must be non-negative",
                self.noise_sigma
            )));
        }
        Ok(())
    }

    pub fn last_year(&self) -> i32 {
        self.params.t0 + self.years as i32
    }
}

/// Simulates a synthetic economy. Identical configurations, seed included,
/// give bit-identical series.
pub fn simulate_series(cfg: &SimConfig, country: CountryId, basis: &str) -> Result<GdpSeries> {
    cfg.validate()?;
    let p = &cfg.params;
    let last = cfg.last_year();
    if let Some(cohort) = &cfg.cohort {
        let span = YearRange { first: p.t0, last };
        if !cohort.covers(span) {
            return Err(ModelError::CohortNotCovered { first: p.t0, last });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.noise_sigma).map_err(|e| ModelError::InvalidParams(e.to_string()))?;

    let mut level = p.c;
    let mut observations = Vec::with_capacity(cfg.years as usize + 1);
    observations.push(Observation {
        year: p.t0,
        value: level,
    });
    for year in p.t0..last {
        let dln_n = match &cfg.cohort {
            // covered above
            Some(c) => c.log_change(year).unwrap_or(0.0),
            None => 0.0,
        };
        let next = match cfg.update {
            UpdateRule::Exponential => level * growth_rate(p, level, dln_n)?.exp(),
            UpdateRule::Linearized => level + p.a + p.cohort_factor * dln_n * level,
        };
        let next = if cfg.noise_sigma > 0.0 {
            next + noise.sample(&mut rng)
        } else {
            next
        };
        if !(next > 0.0 && next.is_finite()) {
            return Err(ModelError::NonPositiveLevel {
                year: year + 1,
                level: next,
            });
        }
        level = next;
        observations.push(Observation {
            year: year + 1,
            value: level,
        });
    }
    Ok(GdpSeries::new(country, basis, observations)?)
}

/// The mean increment estimates `A`; the standard deviation is the scatter
/// of the residual fluctuations.
pub fn estimate_a(inc: &IncrementSeries) -> Result<SummaryStats> {
    Ok(summary_stats(&inc.values())?)
}

/// Outcome of repeated simulate-then-estimate trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub trials: usize,
    pub true_a: f64,
    pub mean_estimate: f64,
    pub sd_of_estimates: f64,
    pub bias: f64,
    /// `3 * sigma / sqrt(years)`.
    pub bias_bound: f64,
    pub within_bound: bool,
    /// Share of trials where the increments-on-level slope is significant
    /// at the 5% level.
    pub rejection_rate: f64,
    pub alpha: f64,
}

pub const RECOVERY_ALPHA: f64 = 0.05;

/// Runs `trials` simulations with seeds `base.seed, base.seed + 1, ...` and
/// summarizes recovery of `A` and the size of the zero-slope test.
pub fn recover_parameters(base: &SimConfig, trials: usize) -> Result<RecoveryReport> {
    base.validate()?;
    if trials < 2 {
        return Err(ModelError::InvalidParams("need at least 2 trials".into()));
    }
    let segment = SegmentSpec::spanning(
        SegmentLabel::Custom,
        YearRange {
            first: base.params.t0,
            last: base.last_year(),
        },
    )?;
    let country = CountryId::new("SIM")?;
    let mut estimates = Vec::with_capacity(trials);
    let mut rejections = 0usize;
    for i in 0..trials {
        let cfg = SimConfig {
            seed: base.seed.wrapping_add(i as u64),
            ..base.clone()
        };
        let series = simulate_series(&cfg, country.clone(), "SIM")?;
        let inc = annual_increments(&series, &segment)?;
        estimates.push(estimate_a(&inc)?.mean);
        if base.years >= 3 {
            let fit = increment_regression_vs_level(&inc, LevelTiming::Prior)?;
            if fit.p_value < RECOVERY_ALPHA {
                rejections += 1;
            }
        }
    }
    let summary = summary_stats(&estimates)?;
    let bias = summary.mean - base.params.a;
    let bias_bound = 3.0 * base.noise_sigma / f64::from(base.years).sqrt();
    Ok(RecoveryReport {
        trials,
        true_a: base.params.a,
        mean_estimate: summary.mean,
        sd_of_estimates: summary.std_dev,
        bias,
        bias_bound,
        within_bound: bias.abs() <= bias_bound,
        rejection_rate: rejections as f64 / trials as f64,
        alpha: RECOVERY_ALPHA,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim_country() -> CountryId {
        CountryId::new("SIM").unwrap()
    }

    #[test]
    fn growth_rate_examples() {
        let p = ModelParams::new(300.0, 3000.0, 1950).unwrap();
        assert_eq!(growth_rate(&p, 15000.0, 0.0).unwrap(), 300.0 / 15000.0);
        assert!((growth_rate(&p, 15000.0, 0.01).unwrap() - 0.025).abs() < 1e-15);
        let p = ModelParams::new(297.0, 3000.0, 1950).unwrap();
        let g = growth_rate(&p, 20054.0, 0.0).unwrap();
        assert!((g - 0.01481).abs() < 1e-5, "{g}");
        assert!(matches!(
            growth_rate(&p, 0.0, 0.0),
            Err(ModelError::NonPositiveLevel { .. })
        ));
    }

    #[test]
    fn growth_rate_decreases_with_level() {
        let p = ModelParams::new(300.0, 3000.0, 1950).unwrap();
        let rates: Vec<f64> = (1..50)
            .map(|k| growth_rate(&p, 1000.0 * k as f64, 0.0).unwrap())
            .collect();
        assert!(rates.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn forecast_examples() {
        let p = ModelParams::new(300.0, 3000.0, 1950).unwrap();
        assert_eq!(inertial_forecast(&p, 1950).unwrap(), 3000.0);
        assert_eq!(inertial_forecast(&p, 1960).unwrap(), 6000.0);
        assert!(matches!(
            inertial_forecast(&p, 1949),
            Err(ModelError::YearBeforeStart { .. })
        ));
        let flat = ModelParams::new(0.0, 3000.0, 1950).unwrap();
        assert!((1950..2050).all(|y| inertial_forecast(&flat, y).unwrap() == 3000.0));
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(f64::NAN, 1.0, 0).is_err());
        assert!(ModelParams::new(1.0, 0.0, 0).is_err());
        assert!(ModelParams::with_cohort_factor(1.0, 1.0, 0, -0.1).is_err());
        let mut cfg = SimConfig::new(ModelParams::new(1.0, 1.0, 0).unwrap(), 0);
        assert!(cfg.validate().is_err());
        cfg.years = 3;
        cfg.noise_sigma = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn linearized_simulation_is_arithmetic() {
        let mut cfg = SimConfig::new(ModelParams::new(300.0, 3000.0, 1950).unwrap(), 10);
        cfg.update = UpdateRule::Linearized;
        let s = simulate_series(&cfg, sim_country(), "SIM").unwrap();
        assert_eq!(s.values()[..3], [3000.0, 3300.0, 3600.0]);
        assert_eq!(s.len(), 11);
        assert_eq!(*s.values().last().unwrap(), 6000.0);
    }

    #[test]
    fn exponential_step_overshoots_linear() {
        let cfg = SimConfig::new(ModelParams::new(300.0, 3000.0, 1950).unwrap(), 1);
        let s = simulate_series(&cfg, sim_country(), "SIM").unwrap();
        assert_eq!(s.values()[1], 3000.0 * 0.1f64.exp());
        assert!(s.values()[1] > 3300.0);
    }

    #[test]
    fn cohort_step() {
        let cohort = CohortSeries::new(
            sim_country(),
            vec![
                Observation {
                    year: 2000,
                    value: 1000.0,
                },
                Observation {
                    year: 2001,
                    value: 1020.0,
                },
            ],
        )
        .unwrap();
        let mut cfg = SimConfig::new(ModelParams::new(300.0, 10000.0, 2000).unwrap(), 1);
        cfg.cohort = Some(cohort.clone());
        let s = simulate_series(&cfg, sim_country(), "SIM").unwrap();
        let g = 0.03 + 0.5 * 1.02f64.ln();
        assert!((g - 0.039902).abs() < 1e-6);
        assert!((s.values()[1] - 10407.1).abs() < 0.05, "{}", s.values()[1]);

        cfg.years = 2;
        assert!(matches!(
            simulate_series(&cfg, sim_country(), "SIM"),
            Err(ModelError::CohortNotCovered {
                first: 2000,
                last: 2002
            })
        ));
    }

    #[test]
    fn seeded_runs_are_identical() {
        let mut cfg = SimConfig::new(ModelParams::new(300.0, 5000.0, 1950).unwrap(), 61);
        cfg.noise_sigma = 250.0;
        cfg.seed = 42;
        let a = simulate_series(&cfg, sim_country(), "SIM").unwrap();
        let b = simulate_series(&cfg, sim_country(), "SIM").unwrap();
        let bits = |s: &GdpSeries| s.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        cfg.seed = 43;
        let c = simulate_series(&cfg, sim_country(), "SIM").unwrap();
        assert_ne!(bits(&a), bits(&c));
    }

    #[test]
    fn noise_can_abort() {
        let mut cfg = SimConfig::new(ModelParams::new(1.0, 10.0, 1950).unwrap(), 200);
        cfg.noise_sigma = 1000.0;
        assert!(matches!(
            simulate_series(&cfg, sim_country(), "SIM"),
            Err(ModelError::NonPositiveLevel { .. })
        ));
    }

    #[test]
    fn estimate_examples() {
        let s = GdpSeries::from_values(sim_country(), "SIM", 2000, &[100.0, 110.0, 125.0]).unwrap();
        let seg = SegmentSpec::spanning(SegmentLabel::Custom, YearRange::new(2000, 2002).unwrap()).unwrap();
        let inc = annual_increments(&s, &seg).unwrap();
        assert_eq!(estimate_a(&inc).unwrap().mean, 12.5);
    }
}
