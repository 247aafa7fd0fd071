//! Run configuration: one JSON file, overridable from the command line.
//!
//! Relative data paths are resolved against the directory holding the
//! config file, so a config and its data can be moved together.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use inertia::analysis::LevelTiming;
use inertia::data::{load_cohort_csv, load_long_csv, load_wide_csv, CohortSeries, SegmentLabel, YearRange};
use inertia::model::UpdateRule;
use inertia::{Dataset, ModelParams, SegmentSpec, SimConfig};
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_COUNTRIES: [&str; 13] = [
    "AUS", "AUT", "BEL", "CAN", "FRA", "ITA", "JPN", "NLD", "ESP", "SWE", "CHE", "GBR", "USA",
];
pub const DEFAULT_BIN_WIDTH: f64 = 200.0;
pub const DEFAULT_TRIM: f64 = 800.0;
pub const DEFAULT_TRIALS: usize = 1000;
pub const FALLBACK_OUT: &str = "inertia-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    Long,
    Wide,
}

/// Years an era is cut to; increments start one year after `first`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentOverride {
    pub first: i32,
    pub last: i32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EraSource {
    pub path: PathBuf,
    pub format: Layout,
    pub basis: String,
    #[serde(default)]
    pub segment: Option<SegmentOverride>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub a: f64,
    pub c: f64,
    pub t0: i32,
    #[serde(default)]
    pub cohort_factor: Option<f64>,
    pub years: u32,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub update: UpdateRule,
    /// Long-format `country,year,population` file for the cohort term.
    #[serde(default)]
    pub cohort: Option<PathBuf>,
    #[serde(default)]
    pub cohort_country: Option<String>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_sim_country")]
    pub country: String,
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

fn default_sim_country() -> String {
    "SIM".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub pre: Option<EraSource>,
    #[serde(default)]
    pub post: Option<EraSource>,
    #[serde(default)]
    pub countries: Option<Vec<String>>,
    /// Display names keyed by country code.
    #[serde(default)]
    pub names: BTreeMap<String, String>,
    #[serde(default)]
    pub bin_width: Option<f64>,
    #[serde(default)]
    pub trim: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub round: Option<usize>,
    #[serde(default)]
    pub level_timing: Option<LevelTiming>,
    #[serde(default)]
    pub simulate: Option<SimulateSection>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn countries(&self) -> Vec<String> {
        match &self.countries {
            Some(list) => list.iter().map(|c| c.trim().to_uppercase()).collect(),
            None => DEFAULT_COUNTRIES.iter().map(|c| c.to_string()).collect(),
        }
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width.unwrap_or(DEFAULT_BIN_WIDTH)
    }

    pub fn trim(&self) -> f64 {
        self.trim.unwrap_or(DEFAULT_TRIM)
    }

    pub fn level_timing(&self) -> LevelTiming {
        self.level_timing.unwrap_or_default()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bw = self.bin_width();
        if !(bw.is_finite() && bw > 0.0) {
            return Err(CliError::Config(format!("bin width {bw} must be positive")));
        }
        let trim = self.trim();
        if !(trim.is_finite() && trim > 0.0) {
            return Err(CliError::Config(format!("trim threshold {trim} must be positive")));
        }
        if self.countries().is_empty() {
            return Err(CliError::Config("country list is empty".into()));
        }
        Ok(())
    }

    fn source(&self, label: SegmentLabel) -> Result<&EraSource, CliError> {
        let src = match label {
            SegmentLabel::Pre => self.pre.as_ref(),
            _ => self.post.as_ref(),
        };
        src.ok_or_else(|| CliError::Config(format!("config has no `{}` section", label.to_string().to_lowercase())))
    }

    pub fn segment(&self, label: SegmentLabel) -> Result<SegmentSpec, CliError> {
        let default = match label {
            SegmentLabel::Pre => SegmentSpec::pre(),
            _ => SegmentSpec::post(),
        };
        match self.source(label)?.segment {
            None => Ok(default),
            Some(o) => YearRange::new(o.first, o.last)
                .and_then(|r| SegmentSpec::spanning(label, r))
                .map_err(|e| CliError::Config(format!("segment override: {e}"))),
        }
    }

    /// Loads one era and restricts it to the configured countries.
    pub fn load_era(&self, label: SegmentLabel) -> Result<Dataset, CliError> {
        let src = self.source(label)?;
        let path = self.resolve(&src.path);
        let ds = match src.format {
            Layout::Long => load_long_csv(&path, &src.basis)?,
            Layout::Wide => load_wide_csv(&path, &src.basis)?,
        };
        let mut ds = ds.restrict(&self.countries())?;
        ds.set_display_names(&self.names);
        Ok(ds)
    }

    pub fn sim_config(&self) -> Result<SimConfig, CliError> {
        let s = self
            .simulate
            .as_ref()
            .ok_or_else(|| CliError::Config("config has no `simulate` section".into()))?;
        let params = match s.cohort_factor {
            Some(k) => ModelParams::with_cohort_factor(s.a, s.c, s.t0, k),
            None => ModelParams::new(s.a, s.c, s.t0),
        }
        .map_err(|e| CliError::Config(e.to_string()))?;
        let mut cfg = SimConfig::new(params, s.years);
        cfg.noise_sigma = s.noise_sigma;
        cfg.seed = s.seed;
        cfg.update = s.update;
        if let Some(path) = &s.cohort {
            cfg.cohort = Some(self.load_cohort(path, s.cohort_country.as_deref())?);
        }
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    fn load_cohort(&self, path: &Path, code: Option<&str>) -> Result<CohortSeries, CliError> {
        let all = load_cohort_csv(self.resolve(path))?;
        match code {
            Some(code) => {
                let code = code.trim().to_uppercase();
                all.into_iter()
                    .find(|c| c.country().code == code)
                    .ok_or_else(|| CliError::Config(format!("cohort file has no {code} series")))
            }
            None if all.len() == 1 => Ok(all.into_iter().next().expect("one series")),
            None => Err(CliError::Config(
                "cohort file holds several countries; set `cohort_country`".into(),
            )),
        }
    }
}
