//! Artifact emission: CSV with 17 significant digits and pretty JSON, both
//! written through a temporary file and renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
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

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// 17 significant digits: enough for every f64 to survive a round trip.
pub fn format_num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_num(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> std::io::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner().map_err(|e| e.into_error())
    }
}

/// Write `bytes` to `path` via a sibling temporary file and a rename, so a
/// reader never observes a half-written artifact.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("artifact");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

pub fn to_json<S: Serialize>(value: &S) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("artifacts serialize");
    v.push(b'\n');
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Tables go out as CSV, or as JSON arrays of objects keyed by column.
pub fn emit(table: &Table, format: Format, path: &Path) -> std::io::Result<PathBuf> {
    let bytes = match format {
        Format::Csv => table.to_csv()?,
        Format::Json => {
            let records: Vec<serde_json::Map<String, serde_json::Value>> = table
                .rows
                .iter()
                .map(|row| {
                    table
                        .header
                        .iter()
                        .zip(row)
                        .map(|(h, c)| {
                            let v = match c {
                                Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(serde_json::Value::Null, Into::into),
                                Cell::Int(i) => (*i).into(),
                                Cell::Text(s) => s.clone().into(),
                            };
                            (h.clone(), v)
                        })
                        .collect()
                })
                .collect();
            to_json(&records)
        }
    };
    write_atomic(path, &bytes)?;
    Ok(path.to_path_buf())
}

/// Numeric parse of a CSV field as written by `format_num`.
pub fn parse_num(s: &str) -> Option<f64> {
    s.trim().parse().ok()
}
