//! The empirical pipeline over annual increments.
//!
//! Each era (PRE, POST) is analysed on its own [`Era`]: a dataset plus the
//! segment it is cut to. Countries are always visited in code order so that
//! pooled vectors and tables are reproducible.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{slice_segment, CountryId, DataError, Dataset, GdpSeries, SegmentSpec};
use crate::stats::{ols_fit, summary_stats, OlsFit, StatsError, SummaryStats};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("{country} {segment}: {source}")]
    Stats {
        country: String,
        segment: String,
        #[source]
        source: StatsError,
    },
    #[error("InvalidTrim: threshold {0} must be positive")]
    InvalidTrim(f64),
}

type Result<T> = std::result::Result<T, AnalysisError>;

fn stats_err(country: &CountryId, seg: &SegmentSpec) -> impl FnOnce(StatsError) -> AnalysisError {
    let country = country.code.clone();
    let segment = seg.label.to_string();
    move |source| AnalysisError::Stats {
        country,
        segment,
        source,
    }
}

/// Which level an increment is regressed on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelTiming {
    /// `G(t-1)`, the level the increment grew from.
    #[default]
    Prior,
    /// `G(t)`, which already contains the increment.
    Current,
}

impl fmt::Display for LevelTiming {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LevelTiming::Prior => "prior",
            LevelTiming::Current => "current",
        })
    }
}

impl std::str::FromStr for LevelTiming {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "prior" => Ok(LevelTiming::Prior),
            "current" => Ok(LevelTiming::Current),
            other => Err(format!("unknown level timing `{other}` (expected prior or current)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Increment {
    pub year: i32,
    /// `G(year) - G(year - 1)`.
    pub value: f64,
    pub prior_level: f64,
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementSeries {
    pub country: CountryId,
    pub segment: SegmentSpec,
    pub observations: Vec<Increment>,
}

impl IncrementSeries {
    pub fn values(&self) -> Vec<f64> {
        self.observations.iter().map(|i| i.value).collect()
    }

    pub fn years(&self) -> Vec<f64> {
        self.observations.iter().map(|i| i.year as f64).collect()
    }

    pub fn levels(&self, timing: LevelTiming) -> Vec<f64> {
        self.observations
            .iter()
            .map(|i| match timing {
                LevelTiming::Prior => i.prior_level,
                LevelTiming::Current => i.level,
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

/// First differences over the segment's increment years.
pub fn annual_increments(series: &GdpSeries, seg: &SegmentSpec) -> Result<IncrementSeries> {
    let levels = series.covering(seg.level_years)?;
    let observations = levels
        .windows(2)
        .filter(|w| seg.increment_years.contains(w[1].year))
        .map(|w| Increment {
            year: w[1].year,
            value: w[1].value - w[0].value,
            prior_level: w[0].value,
            level: w[1].value,
        })
        .collect();
    Ok(IncrementSeries {
        country: series.country().clone(),
        segment: *seg,
        observations,
    })
}

/// Increment on attained level: dollars of increment per dollar of level.
pub fn increment_regression_vs_level(inc: &IncrementSeries, timing: LevelTiming) -> Result<OlsFit> {
    ols_fit(&inc.levels(timing), &inc.values()).map_err(stats_err(&inc.country, &inc.segment))
}

/// Increment on calendar year.
pub fn increment_regression_vs_time(inc: &IncrementSeries) -> Result<OlsFit> {
    ols_fit(&inc.years(), &inc.values()).map_err(stats_err(&inc.country, &inc.segment))
}

/// Level on calendar year over the segment's level years.
pub fn level_time_regression(series: &GdpSeries, seg: &SegmentSpec) -> Result<OlsFit> {
    let sliced = slice_segment(series, seg)?;
    ols_fit(&sliced.years(), &sliced.values()).map_err(stats_err(series.country(), seg))
}

/// A dataset cut to one segment.
#[derive(Debug, Clone)]
pub struct Era {
    pub data: Dataset,
    pub segment: SegmentSpec,
}

impl Era {
    pub fn new(data: Dataset, segment: SegmentSpec) -> Self {
        Self { data, segment }
    }

    fn series(&self, code: &str) -> Result<&GdpSeries> {
        self.data.get(code).map_err(|e| match e {
            DataError::UnknownCountry(country) => DataError::SegmentNotCovered {
                country,
                first: self.segment.level_years.first,
                last: self.segment.level_years.last,
            }
            .into(),
            other => other.into(),
        })
    }

    /// Increments of every country, in code order.
    pub fn increments(&self) -> Result<Vec<IncrementSeries>> {
        self.data
            .countries()
            .iter()
            .map(|code| annual_increments(self.series(code)?, &self.segment))
            .collect()
    }
}

/// The two eras either side of the structural break.
#[derive(Debug, Clone)]
pub struct Panel {
    pub pre: Era,
    pub post: Era,
}

impl Panel {
    pub fn new(pre: Era, post: Era) -> Self {
        Self { pre, post }
    }

    /// Both eras drawn from one dataset.
    pub fn from_dataset(data: Dataset, pre: SegmentSpec, post: SegmentSpec) -> Self {
        Self {
            pre: Era::new(data.clone(), pre),
            post: Era::new(data, post),
        }
    }

    /// Union of the countries of both eras, in code order.
    pub fn countries(&self) -> Vec<String> {
        let mut codes = self.pre.data.countries();
        codes.extend(self.post.data.countries());
        codes.sort();
        codes.dedup();
        codes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakRow {
    pub country: CountryId,
    pub post: OlsFit,
    pub pre: OlsFit,
    /// `post.slope / pre.slope`, from unrounded slopes.
    pub ratio: f64,
}

impl BreakRow {
    pub fn post_slope(&self) -> f64 {
        self.post.slope
    }

    pub fn pre_slope(&self) -> f64 {
        self.pre.slope
    }
}

/// Level-on-time slopes before and after the break, one row per country.
pub fn break_table(panel: &Panel) -> Result<Vec<BreakRow>> {
    panel
        .countries()
        .iter()
        .map(|code| {
            let pre_series = panel.pre.series(code)?;
            let post_series = panel.post.series(code)?;
            let pre = level_time_regression(pre_series, &panel.pre.segment)?;
            let post = level_time_regression(post_series, &panel.post.segment)?;
            Ok(BreakRow {
                country: post_series.country().clone(),
                ratio: post.slope / pre.slope,
                post,
                pre,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanRow {
    pub country: CountryId,
    pub pre: SummaryStats,
    pub post: SummaryStats,
    /// `post.mean / pre.mean`.
    pub ratio: f64,
}

/// Mean annual increments and their standard deviations for both eras.
pub fn mean_increment_table(panel: &Panel) -> Result<Vec<MeanRow>> {
    panel
        .countries()
        .iter()
        .map(|code| {
            let pre_inc = annual_increments(panel.pre.series(code)?, &panel.pre.segment)?;
            let post_inc = annual_increments(panel.post.series(code)?, &panel.post.segment)?;
            let pre = summary_stats(&pre_inc.values()).map_err(stats_err(&pre_inc.country, &pre_inc.segment))?;
            let post = summary_stats(&post_inc.values()).map_err(stats_err(&post_inc.country, &post_inc.segment))?;
            Ok(MeanRow {
                country: post_inc.country,
                ratio: post.mean / pre.mean,
                pre,
                post,
            })
        })
        .collect()
}

/// Demeaned increments of every country in one era, concatenated in code order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledResiduals {
    pub segment: SegmentSpec,
    /// Raw increments, pooled in the same order, before demeaning.
    pub original: Vec<f64>,
    /// Demeaned values that survived trimming.
    pub values: Vec<f64>,
    /// Per-country increment counts before trimming.
    pub counts: Vec<(String, usize)>,
    pub trim_threshold: Option<f64>,
    pub n_trimmed: usize,
}

impl PooledResiduals {
    pub fn n_before_trim(&self) -> usize {
        self.counts.iter().map(|(_, n)| n).sum()
    }
}

/// Subtracts each country's segment-mean increment, pools, and optionally
/// drops values with `|v| > trim_threshold`.
pub fn demean_and_pool(era: &Era, trim_threshold: Option<f64>) -> Result<PooledResiduals> {
    if let Some(t) = trim_threshold {
        if t.is_nan() || t <= 0.0 {
            return Err(AnalysisError::InvalidTrim(t));
        }
    }
    let mut original = Vec::new();
    let mut demeaned = Vec::new();
    let mut counts = Vec::new();
    for inc in era.increments()? {
        let values = inc.values();
        let mean = summary_stats(&values)
            .map_err(stats_err(&inc.country, &inc.segment))?
            .mean;
        demeaned.extend(values.iter().map(|v| v - mean));
        counts.push((inc.country.code.clone(), values.len()));
        original.extend(values);
    }
    let before = demeaned.len();
    if let Some(t) = trim_threshold {
        demeaned.retain(|v| v.abs() <= t);
    }
    Ok(PooledResiduals {
        segment: era.segment,
        n_trimmed: before - demeaned.len(),
        original,
        values: demeaned,
        counts,
        trim_threshold,
    })
}
