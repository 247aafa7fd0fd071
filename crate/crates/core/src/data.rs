//! Country GDP panels: loading, validation and segment slicing.
//!
//! Three on-disk layouts are understood, all UTF-8 and comma separated:
//!
//! * long: header `country,year,gdp_pc`, one observation per row;
//! * wide: header `year,<code1>,<code2>,...`, a blank cell is a missing year;
//! * cohort: header `country,year,population`.
//!
//! Country codes are uppercased on ingest and compared case-sensitively
//! afterwards. The currency basis (for instance `GK1990`) is opaque metadata.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

const LONG_HEADER: [&str; 3] = ["country", "year", "gdp_pc"];
const COHORT_HEADER: [&str; 3] = ["country", "year", "population"];

#[derive(Debug, Error)]
pub enum DataError {
    #[error("MissingFile: {0}")]
    MissingFile(PathBuf),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("MalformedHeader: expected `{expected}`, found `{found}`")]
    MalformedHeader { expected: String, found: String },
    #[error("UnparsableRow at line {line}: {reason}")]
    UnparsableRow { line: u64, reason: String },
    #[error("RaggedRow at line {line}: expected {expected} cells, found {found}")]
    RaggedRow { line: u64, expected: usize, found: usize },
    #[error("DuplicateObservation: {country} {year}")]
    DuplicateObservation { country: String, year: i32 },
    #[error("EmptyDataset: no data rows")]
    EmptyDataset,
    #[error("GapInSegment: {country} has no observation for {year}")]
    GapInSegment { country: String, year: i32 },
    #[error("SegmentNotCovered: {country} does not cover {first}-{last}")]
    SegmentNotCovered { country: String, first: i32, last: i32 },
    #[error("DuplicateSeries: {country} already has a {basis} series")]
    DuplicateSeries { country: String, basis: String },
    #[error("UnknownCountry: {0}")]
    UnknownCountry(String),
    #[error("AmbiguousBasis: {country} has series in several bases ({bases})")]
    AmbiguousBasis { country: String, bases: String },
    #[error("InvalidSeries: {0}")]
    InvalidSeries(String),
    #[error("InvalidSegment: {0}")]
    InvalidSegment(String),
}

type Result<T> = std::result::Result<T, DataError>;

/// Country identifier. `code` is the uppercase key, `name` is for display.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CountryId {
    pub code: String,
    pub name: String,
}

impl CountryId {
    /// Builds an id whose display name equals its code.
    pub fn new(code: &str) -> Result<Self> {
        let code = normalize_code(code).ok_or_else(|| DataError::InvalidSeries("empty country code".into()))?;
        Ok(Self {
            name: code.clone(),
            code,
        })
    }

    pub fn with_name(code: &str, name: impl Into<String>) -> Result<Self> {
        let mut id = Self::new(code)?;
        id.name = name.into();
        Ok(id)
    }
}

impl fmt::Display for CountryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code)
    }
}

fn normalize_code(raw: &str) -> Option<String> {
    let code = raw.trim().to_uppercase();
    (!code.is_empty()).then_some(code)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub year: i32,
    pub value: f64,
}

/// Inclusive range of calendar years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearRange {
    pub first: i32,
    pub last: i32,
}

impl YearRange {
    pub fn new(first: i32, last: i32) -> Result<Self> {
        if first > last {
            return Err(DataError::InvalidSegment(format!("year range {first}-{last} is empty")));
        }
        Ok(Self { first, last })
    }

    pub fn len(&self) -> usize {
        (self.last - self.first + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.first..=self.last).contains(&year)
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.first..=self.last
    }
}

impl fmt::Display for YearRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.first, self.last)
    }
}

/// Real GDP per capita of one country in one currency basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdpSeries {
    country: CountryId,
    basis: String,
    observations: Vec<Observation>,
}

impl GdpSeries {
    /// Validates that years are strictly increasing and values finite and positive.
    pub fn new(country: CountryId, basis: impl Into<String>, observations: Vec<Observation>) -> Result<Self> {
        for pair in observations.windows(2) {
            if pair[1].year <= pair[0].year {
                return Err(DataError::InvalidSeries(format!(
                    "{country}: years not strictly increasing at {}",
                    pair[1].year
                )));
            }
        }
        if let Some(bad) = observations.iter().find(|o| !(o.value.is_finite() && o.value > 0.0)) {
            return Err(DataError::InvalidSeries(format!(
                "{country}: value {} in {} is not finite and positive",
                bad.value, bad.year
            )));
        }
        Ok(Self {
            country,
            basis: basis.into(),
            observations,
        })
    }

    /// Builds a series from consecutive values starting at `first_year`.
    pub fn from_values(country: CountryId, basis: impl Into<String>, first_year: i32, values: &[f64]) -> Result<Self> {
        let observations = values
            .iter()
            .zip(first_year..)
            .map(|(&value, year)| Observation { year, value })
            .collect();
        Self::new(country, basis, observations)
    }

    pub fn country(&self) -> &CountryId {
        &self.country
    }

    pub fn basis(&self) -> &str {
        &self.basis
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn years(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.year as f64).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.value).collect()
    }

    pub fn value_at(&self, year: i32) -> Option<f64> {
        self.observations
            .binary_search_by_key(&year, |o| o.year)
            .ok()
            .map(|i| self.observations[i].value)
    }

    /// Returns the observations over `years`, which must be present without gaps.
    pub fn covering(&self, years: YearRange) -> Result<&[Observation]> {
        let not_covered = || DataError::SegmentNotCovered {
            country: self.country.code.clone(),
            first: years.first,
            last: years.last,
        };
        let (first, last) = match (self.observations.first(), self.observations.last()) {
            (Some(f), Some(l)) => (f.year, l.year),
            _ => return Err(not_covered()),
        };
        if first > years.first || last < years.last {
            return Err(not_covered());
        }
        let start = self.observations.partition_point(|o| o.year < years.first);
        let mut expected = years.first;
        let mut end = start;
        while expected <= years.last {
            match self.observations.get(end) {
                Some(o) if o.year == expected => {
                    expected += 1;
                    end += 1;
                }
                _ => {
                    return Err(DataError::GapInSegment {
                        country: self.country.code.clone(),
                        year: expected,
                    })
                }
            }
        }
        Ok(&self.observations[start..end])
    }
}

/// Specific-age population counts, contiguous in years.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSeries {
    country: CountryId,
    observations: Vec<Observation>,
}

impl CohortSeries {
    pub fn new(country: CountryId, observations: Vec<Observation>) -> Result<Self> {
        for pair in observations.windows(2) {
            if pair[1].year != pair[0].year + 1 {
                return Err(DataError::InvalidSeries(format!(
                    "{country}: cohort years not contiguous at {}",
                    pair[1].year
                )));
            }
        }
        if let Some(bad) = observations.iter().find(|o| !(o.value.is_finite() && o.value > 0.0)) {
            return Err(DataError::InvalidSeries(format!(
                "{country}: cohort count {} in {} is not positive",
                bad.value, bad.year
            )));
        }
        Ok(Self { country, observations })
    }

    pub fn country(&self) -> &CountryId {
        &self.country
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn count_at(&self, year: i32) -> Option<f64> {
        let first = self.observations.first()?.year;
        let idx = usize::try_from(year.checked_sub(first)?).ok()?;
        self.observations.get(idx).map(|o| o.value)
    }

    /// `ln(N(year + 1) / N(year))`, the yearly log-change of the cohort.
    pub fn log_change(&self, year: i32) -> Option<f64> {
        Some((self.count_at(year + 1)? / self.count_at(year)?).ln())
    }

    pub fn covers(&self, years: YearRange) -> bool {
        self.count_at(years.first).is_some() && self.count_at(years.last).is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SegmentLabel {
    Pre,
    Post,
    Custom,
}

impl fmt::Display for SegmentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SegmentLabel::Pre => "PRE",
            SegmentLabel::Post => "POST",
            SegmentLabel::Custom => "CUSTOM",
        })
    }
}

/// An analysis era: the years used for level regressions and the years that
/// label increments. Every increment year `y` needs `y - 1` and `y` among the
/// level years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentSpec {
    pub label: SegmentLabel,
    pub level_years: YearRange,
    pub increment_years: YearRange,
}

impl SegmentSpec {
    pub fn new(label: SegmentLabel, level_years: YearRange, increment_years: YearRange) -> Result<Self> {
        if increment_years.first <= level_years.first || increment_years.last > level_years.last {
            return Err(DataError::InvalidSegment(format!(
                "increment years {increment_years} need levels for the prior year within {level_years}"
            )));
        }
        Ok(Self {
            label,
            level_years,
            increment_years,
        })
    }

    /// Levels 1870-1940, increments 1871-1940.
    pub fn pre() -> Self {
        Self {
            label: SegmentLabel::Pre,
            level_years: YearRange {
                first: 1870,
                last: 1940,
            },
            increment_years: YearRange {
                first: 1871,
                last: 1940,
            },
        }
    }

    /// Levels 1950-2011, increments 1951-2011.
    pub fn post() -> Self {
        Self {
            label: SegmentLabel::Post,
            level_years: YearRange {
                first: 1950,
                last: 2011,
            },
            increment_years: YearRange {
                first: 1951,
                last: 2011,
            },
        }
    }

    /// Level years followed by all increments inside them.
    pub fn spanning(label: SegmentLabel, level_years: YearRange) -> Result<Self> {
        let increments = YearRange::new(level_years.first + 1, level_years.last)?;
        Self::new(label, level_years, increments)
    }
}

/// Restricts `series` to the segment's level years, which must be covered
/// without gaps.
pub fn slice_segment(series: &GdpSeries, seg: &SegmentSpec) -> Result<GdpSeries> {
    let observations = series.covering(seg.level_years)?.to_vec();
    Ok(GdpSeries {
        country: series.country.clone(),
        basis: series.basis.clone(),
        observations,
    })
}

/// A collection of GDP series keyed by country code and basis.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    series: BTreeMap<(String, String), GdpSeries>,
    cohorts: BTreeMap<String, CohortSeries>,
    pub provenance: String,
}

impl Dataset {
    pub fn new(provenance: impl Into<String>) -> Self {
        Self {
            provenance: provenance.into(),
            ..Self::default()
        }
    }

    pub fn insert(&mut self, series: GdpSeries) -> Result<()> {
        let key = (series.country.code.clone(), series.basis.clone());
        if self.series.contains_key(&key) {
            return Err(DataError::DuplicateSeries {
                country: key.0,
                basis: key.1,
            });
        }
        self.series.insert(key, series);
        Ok(())
    }

    pub fn insert_cohort(&mut self, cohort: CohortSeries) {
        self.cohorts.insert(cohort.country.code.clone(), cohort);
    }

    /// All series ordered by country code, then basis.
    pub fn series(&self) -> impl Iterator<Item = &GdpSeries> {
        self.series.values()
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    /// Distinct country codes in sorted order.
    pub fn countries(&self) -> Vec<String> {
        let mut codes: Vec<String> = self.series.keys().map(|(c, _)| c.clone()).collect();
        codes.dedup();
        codes
    }

    /// The single series for `code`; errors when absent or present in several bases.
    pub fn get(&self, code: &str) -> Result<&GdpSeries> {
        let mut matches = self
            .series
            .range((code.to_string(), String::new())..)
            .take_while(|((c, _), _)| c == code)
            .map(|(_, s)| s);
        let first = matches
            .next()
            .ok_or_else(|| DataError::UnknownCountry(code.to_string()))?;
        let rest: Vec<&GdpSeries> = matches.collect();
        if !rest.is_empty() {
            let bases = std::iter::once(first)
                .chain(rest)
                .map(|s| s.basis.as_str())
                .collect::<Vec<_>>()
                .join(", ");
            return Err(DataError::AmbiguousBasis {
                country: code.to_string(),
                bases,
            });
        }
        Ok(first)
    }

    pub fn cohort(&self, code: &str) -> Option<&CohortSeries> {
        self.cohorts.get(code)
    }

    /// Keeps only the listed countries; every listed code must be present.
    pub fn restrict(&self, codes: &[String]) -> Result<Dataset> {
        let mut out = Dataset::new(self.provenance.clone());
        for raw in codes {
            let code = normalize_code(raw).ok_or_else(|| DataError::UnknownCountry(raw.clone()))?;
            let mut found = false;
            for ((c, _), s) in self.series.range((code.clone(), String::new())..) {
                if *c != code {
                    break;
                }
                found = true;
                out.insert(s.clone())?;
            }
            if !found {
                return Err(DataError::UnknownCountry(code));
            }
            if let Some(cohort) = self.cohorts.get(&code) {
                out.insert_cohort(cohort.clone());
            }
        }
        Ok(out)
    }

    /// Replaces display names for codes found in `names`.
    pub fn set_display_names(&mut self, names: &BTreeMap<String, String>) {
        for s in self.series.values_mut() {
            if let Some(name) = names.get(&s.country.code) {
                s.country.name = name.clone();
            }
        }
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => DataError::MissingFile(path.to_path_buf()),
        _ => DataError::Io {
            path: path.to_path_buf(),
            source: e,
        },
    })
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(open(path)?))
}

fn read_record(reader: &mut csv::Reader<File>, record: &mut csv::StringRecord, path: &Path) -> Result<bool> {
    reader.read_record(record).map_err(|e| {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        match e.into_kind() {
            csv::ErrorKind::Io(source) => DataError::Io {
                path: path.to_path_buf(),
                source,
            },
            other => DataError::UnparsableRow {
                line,
                reason: format!("{other:?}"),
            },
        }
    })
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn check_header(record: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if record.iter().eq(expected.iter().copied()) {
        Ok(())
    } else {
        Err(DataError::MalformedHeader {
            expected: expected.join(","),
            found: record.iter().collect::<Vec<_>>().join(","),
        })
    }
}

fn parse_year(cell: &str, line: u64) -> Result<i32> {
    cell.parse().map_err(|_| DataError::UnparsableRow {
        line,
        reason: format!("year `{cell}` is not an integer"),
    })
}

fn parse_positive(cell: &str, line: u64, what: &str) -> Result<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(DataError::UnparsableRow {
            line,
            reason: format!("{what} `{cell}` is not a positive finite number"),
        }),
    }
}

/// Reads `country,year,<value>` rows into per-country sorted observation lists.
fn read_long_rows(path: &Path, header: &[&str]) -> Result<BTreeMap<String, Vec<Observation>>> {
    let mut reader = csv_reader(path)?;
    let mut record = csv::StringRecord::new();
    if !read_record(&mut reader, &mut record, path)? {
        return Err(DataError::MalformedHeader {
            expected: header.join(","),
            found: String::new(),
        });
    }
    check_header(&record, header)?;

    let mut rows: BTreeMap<String, BTreeMap<i32, f64>> = BTreeMap::new();
    while read_record(&mut reader, &mut record, path)? {
        let line = line_of(&record);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != header.len() {
            return Err(DataError::UnparsableRow {
                line,
                reason: format!("expected {} cells, found {}", header.len(), record.len()),
            });
        }
        let code = normalize_code(&record[0]).ok_or_else(|| DataError::UnparsableRow {
            line,
            reason: "empty country code".into(),
        })?;
        let year = parse_year(&record[1], line)?;
        let value = parse_positive(&record[2], line, header[2])?;
        let per_country = rows.entry(code.clone()).or_default();
        if per_country.insert(year, value).is_some() {
            return Err(DataError::DuplicateObservation { country: code, year });
        }
    }
    if rows.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    Ok(rows
        .into_iter()
        .map(|(code, obs)| {
            let obs = obs
                .into_iter()
                .map(|(year, value)| Observation { year, value })
                .collect();
            (code, obs)
        })
        .collect())
}

/// Loads a long-format file (`country,year,gdp_pc`).
pub fn load_long_csv(path: impl AsRef<Path>, basis: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let rows = read_long_rows(path, &LONG_HEADER)?;
    let mut ds = Dataset::new(format!("long:{}#{basis}", path.display()));
    for (code, obs) in rows {
        ds.insert(GdpSeries::new(CountryId::new(&code)?, basis, obs)?)?;
    }
    Ok(ds)
}

/// Loads a wide-format file (`year,<code1>,<code2>,...`); blank cells are missing years.
pub fn load_wide_csv(path: impl AsRef<Path>, basis: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv_reader(path)?;
    let mut record = csv::StringRecord::new();
    let malformed = |found: &csv::StringRecord| DataError::MalformedHeader {
        expected: "year,<code>,...".into(),
        found: found.iter().collect::<Vec<_>>().join(","),
    };
    if !read_record(&mut reader, &mut record, path)? {
        return Err(malformed(&record));
    }
    if record.len() < 2 || &record[0] != "year" {
        return Err(malformed(&record));
    }
    let mut codes = Vec::with_capacity(record.len() - 1);
    for cell in record.iter().skip(1) {
        match normalize_code(cell) {
            Some(code) if !codes.contains(&code) => codes.push(code),
            _ => return Err(malformed(&record)),
        }
    }

    let mut columns: Vec<BTreeMap<i32, f64>> = vec![BTreeMap::new(); codes.len()];
    let mut seen_years = BTreeMap::new();
    let mut rows = 0usize;
    while read_record(&mut reader, &mut record, path)? {
        let line = line_of(&record);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != codes.len() + 1 {
            return Err(DataError::RaggedRow {
                line,
                expected: codes.len() + 1,
                found: record.len(),
            });
        }
        let year = parse_year(&record[0], line)?;
        if seen_years.insert(year, line).is_some() {
            return Err(DataError::DuplicateObservation {
                country: codes[0].clone(),
                year,
            });
        }
        rows += 1;
        for (col, cell) in record.iter().skip(1).enumerate() {
            if cell.is_empty() {
                continue;
            }
            columns[col].insert(year, parse_positive(cell, line, "gdp_pc")?);
        }
    }
    if rows == 0 || columns.iter().all(BTreeMap::is_empty) {
        return Err(DataError::EmptyDataset);
    }

    let mut ds = Dataset::new(format!("wide:{}#{basis}", path.display()));
    for (code, column) in codes.iter().zip(columns) {
        if column.is_empty() {
            continue;
        }
        let obs = column
            .into_iter()
            .map(|(year, value)| Observation { year, value })
            .collect();
        ds.insert(GdpSeries::new(CountryId::new(code)?, basis, obs)?)?;
    }
    Ok(ds)
}

/// Loads a cohort file (`country,year,population`).
pub fn load_cohort_csv(path: impl AsRef<Path>) -> Result<Vec<CohortSeries>> {
    read_long_rows(path.as_ref(), &COHORT_HEADER)?
        .into_iter()
        .map(|(code, obs)| CohortSeries::new(CountryId::new(&code)?, obs))
        .collect()
}

/// Writes every series as long-format rows, countries in code order.
///
/// The basis is not part of the long layout, so a dataset holding the same
/// country in two bases is rejected.
pub fn write_long_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source: io::Error| DataError::Io {
        path: path.to_path_buf(),
        source,
    };
    for code in ds.countries() {
        ds.get(&code)?;
    }
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    writeln!(out, "{}", LONG_HEADER.join(",")).map_err(io_err)?;
    for s in ds.series() {
        for o in &s.observations {
            writeln!(out, "{},{},{}", s.country.code, o.year, o.value).map_err(io_err)?;
        }
    }
    out.flush().map_err(io_err)
}
