//! Tables rendered as commented CSV or as a single JSON document.
//!
//! Floats print as the shortest decimal that parses back to the same
//! `f64`, so identical runs give identical bytes.

use std::io::Write;

use serde_json::{Map, Value};

use crate::config::{RunConfig, ECHO_PREFIX};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Empty,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Self {
        v.map_or(Self::Empty, Self::Num)
    }

    fn csv(&self) -> String {
        match self {
            Self::Num(v) if v.is_finite() => format!("{v:?}"),
            Self::Int(v) => v.to_string(),
            _ => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Self::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Self::Int(v) => Value::from(*v),
            Self::Empty => Value::Null,
        }
    }
}

/// Metadata value printed as `# key: value` in CSV and as a field in JSON.
pub fn meta_num(v: Option<f64>) -> Value {
    Cell::opt(v).json()
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub header: Vec<(&'static str, Value)>,
    pub footer: Vec<(&'static str, Value)>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            header: Vec::new(),
            footer: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(
        &self,
        config: &RunConfig,
        format: Format,
        out: &mut dyn Write,
    ) -> std::io::Result<()> {
        match format {
            Format::Csv => self.write_csv(config, out),
            Format::Json => write_json(&self.json(config), out),
        }
    }

    fn write_csv(&self, config: &RunConfig, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "{ECHO_PREFIX}{}", config.echo())?;
        for (k, v) in &self.header {
            writeln!(out, "# {k}: {}", scalar_text(v))?;
        }
        let mut w = csv::Writer::from_writer(&mut *out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.flush()?;
        drop(w);
        for (k, v) in &self.footer {
            writeln!(out, "# {k}: {}", scalar_text(v))?;
        }
        Ok(())
    }

    fn json(&self, config: &RunConfig) -> Value {
        let mut doc = Map::new();
        doc.insert("config".into(), config.echo());
        for (k, v) in self.header.iter().chain(&self.footer) {
            doc.insert((*k).into(), v.clone());
        }
        let rows = self
            .rows
            .iter()
            .map(|r| {
                Value::Object(
                    self.columns
                        .iter()
                        .zip(r)
                        .map(|(c, v)| (c.to_string(), v.json()))
                        .collect(),
                )
            })
            .collect();
        doc.insert("rows".into(), Value::Array(rows));
        Value::Object(doc)
    }
}

/// Numbers and strings unquoted, null as an empty value, objects as JSON.
fn scalar_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => format!("{f:?}"),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

pub fn write_json(doc: &Value, out: &mut dyn Write) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, doc)?;
    writeln!(out)
}
