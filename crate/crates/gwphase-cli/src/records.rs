//! Flat output records and their CSV/JSON encodings.
//!
//! Identical configs must produce identical bytes, so floats are written
//! with 17 significant digits (round-trip exact for f64), columns keep a
//! fixed per-scenario order, and wall time stays out of the emitted record
//! (it is reported on stderr instead).

use std::io::Write;

use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Float(f64),
    Int(i64),
    Text(String),
    Null,
}

/// One output row: a scenario tag plus ordered named fields.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    scenario: String,
    fields: Vec<(String, Field)>,
    /// Measured wall time; excluded from the emitted bytes so that records
    /// stay reproducible.
    pub wall_time_s: f64,
}

impl RunRecord {
    pub fn new(scenario: impl Into<String>) -> Self {
        Self {
            scenario: scenario.into(),
            fields: Vec::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn scenario(&self) -> &str {
        &self.scenario
    }

    pub fn fields(&self) -> &[(String, Field)] {
        &self.fields
    }

    pub fn push_f64(&mut self, name: &str, value: f64) -> &mut Self {
        self.fields.push((name.into(), Field::Float(value)));
        self
    }

    pub fn push_int(&mut self, name: &str, value: i64) -> &mut Self {
        self.fields.push((name.into(), Field::Int(value)));
        self
    }

    pub fn push_text(&mut self, name: &str, value: impl Into<String>) -> &mut Self {
        self.fields.push((name.into(), Field::Text(value.into())));
        self
    }

    pub fn push_opt_f64(&mut self, name: &str, value: Option<f64>) -> &mut Self {
        match value {
            Some(v) => self.push_f64(name, v),
            None => {
                self.fields.push((name.into(), Field::Null));
                self
            }
        }
    }

    /// JSON object with `scenario` first and fields in insertion order.
    pub fn to_json_value(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        map.insert(
            "scenario".into(),
            serde_json::Value::String(self.scenario.clone()),
        );
        for (name, field) in &self.fields {
            let v = match field {
                Field::Float(x) => serde_json::Number::from_f64(*x)
                    .map(serde_json::Value::Number)
                    .unwrap_or(serde_json::Value::Null),
                Field::Int(i) => serde_json::Value::Number((*i).into()),
                Field::Text(s) => serde_json::Value::String(s.clone()),
                Field::Null => serde_json::Value::Null,
            };
            map.insert(name.clone(), v);
        }
        serde_json::Value::Object(map)
    }
}

/// 17 significant digits: enough to reconstruct any f64 exactly.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_field(field: &Field) -> String {
    match field {
        Field::Float(x) => format_float(*x),
        Field::Int(i) => i.to_string(),
        Field::Text(s) => s.clone(),
        Field::Null => String::new(),
    }
}

fn render_csv(records: &[RunRecord]) -> Result<String> {
    let header: Vec<&str> = std::iter::once("scenario")
        .chain(records[0].fields.iter().map(|(n, _)| n.as_str()))
        .collect();
    for r in records {
        let names: Vec<&str> = std::iter::once("scenario")
            .chain(r.fields.iter().map(|(n, _)| n.as_str()))
            .collect();
        if names != header {
            return Err(CliError::Config(
                "records in one emission must share a column set".into(),
            ));
        }
    }
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for r in records {
        let mut row = vec![r.scenario.clone()];
        row.extend(r.fields.iter().map(|(_, f)| csv_field(f)));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn render_json(records: &[RunRecord]) -> String {
    let array: Vec<serde_json::Value> = records.iter().map(|r| r.to_json_value()).collect();
    let mut text = serde_json::to_string_pretty(&array).expect("records serialize");
    text.push('\n');
    text
}

/// Render records in the requested format (UTF-8, trailing newline).
pub fn render(records: &[RunRecord], format: crate::OutputFormat) -> Result<String> {
    if records.is_empty() {
        return Err(CliError::Config("no records to emit".into()));
    }
    match format {
        crate::OutputFormat::Csv => render_csv(records),
        crate::OutputFormat::Json => Ok(render_json(records)),
    }
}

/// Emit records to a file (or stdout when no path is given).
pub fn emit(
    records: &[RunRecord],
    format: crate::OutputFormat,
    path: Option<&std::path::Path>,
) -> Result<()> {
    let text = render(records, format)?;
    match path {
        Some(p) => std::fs::write(p, text.as_bytes())?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}
