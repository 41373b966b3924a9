//! Report envelope and renderers.
//!
//! Every subcommand produces `{config, rows, errata, status}`; JSON gets it
//! verbatim, CSV gets the fixed per-subcommand column schema, text gets an
//! aligned human-readable table. Exact integers travel as decimal strings so
//! nothing is squeezed through a double. Output is byte-stable for a given
//! config: no timestamps, no map iteration order, fixed field order.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            other => Err(format!("unknown format `{other}` (expected json|csv|text)")),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct WitnessJson {
    pub p: u64,
    pub s: u32,
    pub stated: String,
    pub oracle: String,
}

#[derive(Debug, Serialize)]
pub struct ErratumJson {
    pub formula: String,
    pub description: String,
    pub witnesses: Vec<WitnessJson>,
}

#[derive(Debug, Serialize)]
pub struct Report<C: Serialize, R: Serialize> {
    pub config: C,
    pub rows: Vec<R>,
    pub errata: Vec<ErratumJson>,
    pub status: String,
}

impl<C: Serialize, R: Serialize> Report<C, R> {
    pub fn new(config: C, rows: Vec<R>, errata: Vec<ErratumJson>, pass: bool) -> Self {
        Self {
            config,
            rows,
            errata,
            status: if pass { "ok" } else { "fail" }.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }
}

/// Render rows as CSV under a fixed header. Cells are plain numbers or
/// decimal strings, so no quoting is ever needed.
pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Render rows as an aligned text table.
pub fn to_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let fmt_row = |cells: &[String], widths: &[usize]| -> String {
        cells
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c:>w$}", w = w))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let header_cells: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    out.push_str(&fmt_row(&header_cells, &widths));
    out.push('\n');
    for row in rows {
        out.push_str(&fmt_row(row, &widths));
        out.push('\n');
    }
    out
}

pub fn opt_str<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}
