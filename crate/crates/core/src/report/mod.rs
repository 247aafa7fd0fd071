//! Machine-readable tables and static SVG figures.
//!
//! Numbers are persisted at full precision (shortest round-trip decimal)
//! unless a display rounding is requested explicitly.

mod svg;

pub use svg::{histogram_svg, render_histogram, render_scatter, scatter_svg, PlotLabels, FRAME};

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("IoError on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("EmptyInput: nothing to render")]
    EmptyInput,
    #[error("NonFiniteInput: plot coordinates must be finite")]
    NonFiniteInput,
    #[error("RowWidth: row has {found} cells, table has {expected} columns")]
    RowWidth { expected: usize, found: usize },
}

type Result<T> = std::result::Result<T, ReportError>;

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| ReportError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, bytes).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    Num(f64),
    Bool(bool),
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

fn format_num(v: f64, round: Option<usize>) -> String {
    match round {
        Some(d) if v.is_finite() => format!("{v:.d$}"),
        _ => format!("{v}"),
    }
}

impl Cell {
    /// Text as written to CSV.
    pub fn render(&self, round: Option<usize>) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Num(v) => format_num(*v, round),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn to_json(&self, round: Option<usize>) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Int(i) => json!(i),
            Cell::Bool(b) => json!(b),
            Cell::Num(v) if v.is_finite() => {
                // parse the rounded text back so JSON and CSV carry the same decimal
                let v = format_num(*v, round).parse::<f64>().unwrap_or(*v);
                json!(v)
            }
            Cell::Num(v) => Value::String(format!("{v}")),
        }
    }
}

/// A named table with ordered columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TableDoc {
    pub name: String,
    pub columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl TableDoc {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(ReportError::RowWidth {
                expected: self.columns.len(),
                found: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn to_csv(&self, round: Option<usize>) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        // writing to a Vec cannot fail
        w.write_record(&self.columns).expect("in-memory csv");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.render(round)))
                .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 cells")
    }

    pub fn to_json(&self, round: Option<usize>) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| Value::Array(row.iter().map(|c| c.to_json(round)).collect()))
            .collect();
        let mut obj = Map::new();
        obj.insert("name".into(), Value::String(self.name.clone()));
        obj.insert("columns".into(), json!(self.columns));
        obj.insert("rows".into(), Value::Array(rows));
        let mut out = serde_json::to_string_pretty(&Value::Object(obj)).expect("json value");
        out.push('\n');
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

impl TableFormat {
    pub fn extension(self) -> &'static str {
        match self {
            TableFormat::Csv => "csv",
            TableFormat::Json => "json",
        }
    }
}

/// Writes `doc` to `path`. `round` sets the number of decimals shown for
/// real-valued cells; `None` keeps full precision.
pub fn emit_table(doc: &TableDoc, format: TableFormat, path: impl AsRef<Path>, round: Option<usize>) -> Result<()> {
    let body = match format {
        TableFormat::Csv => doc.to_csv(round),
        TableFormat::Json => doc.to_json(round),
    };
    write_file(path.as_ref(), body.as_bytes())
}
