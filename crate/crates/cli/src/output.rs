//! Tables rendered as CSV or JSON.
//!
//! CSV floats use 12 significant digits in scientific notation so that
//! identical runs give identical bytes.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => float(*v),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

pub fn float(v: f64) -> String {
    format!("{v:.11e}")
}

/// Rows plus `key value` summary entries. Summary values that are JSON
/// objects or arrays go into CSV comments verbatim.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(String, Value)>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.summary.push((key.into(), value.into()));
    }
}

pub struct Provenance<'a> {
    pub command: &'a str,
    pub config: &'a [u8],
}

impl Provenance<'_> {
    pub fn config_hash(&self) -> String {
        Sha256::digest(self.config).iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

pub fn render(table: &Table, format: Format, prov: &Provenance) -> String {
    match format {
        Format::Csv => render_csv(table, prov),
        Format::Json => render_json(table, prov),
    }
}

fn render_csv(table: &Table, prov: &Provenance) -> String {
    let mut out = format!(
        "# rydcool {} {} config-sha256 {}\n",
        env!("CARGO_PKG_VERSION"),
        prov.command,
        prov.config_hash()
    );
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    for (k, v) in &table.summary {
        let v = match v {
            Value::Number(n) if n.is_f64() => float(n.as_f64().unwrap_or(f64::NAN)),
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        let _ = writeln!(out, "# {k} {v}");
    }
    out
}

fn render_json(table: &Table, prov: &Provenance) -> String {
    let summary: Map<String, Value> = table.summary.iter().cloned().collect();
    let rows: Vec<Value> = table.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
    let doc = json!({
        "tool": "rydcool",
        "version": env!("CARGO_PKG_VERSION"),
        "command": prov.command,
        "config_sha256": prov.config_hash(),
        "columns": table.columns,
        "rows": rows,
        "summary": summary,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("tables serialize");
    s.push('\n');
    s
}
