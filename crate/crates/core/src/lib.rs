//! Inertial-growth model of real GDP per capita.
//!
//! The central observable is the annual increment `dG(t) = G(t) - G(t-1)` of
//! real GDP per capita. Under inertial growth the increment is a constant `A`
//! dollars per year, so the level grows linearly in time and the relative
//! growth rate decays as `A / G`. This crate provides:
//!
//! * [`data`]: loading and slicing country GDP panels (long and wide CSV).
//! * [`stats`]: OLS with inference, Student-t tails, the inverse normal CDF,
//!   the Shapiro-Francia test, histograms and summary moments.
//! * [`analysis`]: increments, the three regression families, break and
//!   mean-increment tables, demeaning, pooling and outlier trimming.
//! * [`model`]: the forward model (growth rate, forecast, simulation) and the
//!   estimator of `A`.
//! * [`report`]: CSV/JSON tables and deterministic SVG figures.

pub mod analysis;
pub mod data;
pub mod model;
pub mod report;
pub mod stats;

pub use analysis::{AnalysisError, IncrementSeries, LevelTiming, Panel, PooledResiduals};
pub use data::{CountryId, DataError, Dataset, GdpSeries, SegmentSpec};
pub use model::{ModelError, ModelParams, SimConfig};
pub use stats::{OlsFit, StatsError};
