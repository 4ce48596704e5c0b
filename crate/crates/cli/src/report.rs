//! Rendering of command reports.
//!
//! Reports are JSON trees with sorted keys and 17-significant-digit numbers.
//! Tabular commands render CSV directly; every other report flattens to a
//! two-column `key,value` CSV with dotted paths.

use std::fs;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub enum Report {
    Tree(Value),
    Table {
        header: Vec<String>,
        rows: Vec<Vec<String>>,
        /// JSON rendering of the same table.
        json: Value,
    },
}

pub fn render(report: &Report, format: Format) -> Result<String, CliError> {
    match (report, format) {
        (Report::Tree(v), Format::Json) | (Report::Table { json: v, .. }, Format::Json) => {
            let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        (Report::Tree(v), Format::Csv) => {
            let mut rows = Vec::new();
            flatten("", v, &mut rows);
            write_csv(&["key".to_string(), "value".to_string()], &rows)
        }
        (Report::Table { header, rows, .. }, Format::Csv) => write_csv(header, rows),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<Vec<String>>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                flatten(&join(k), child, out);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), child, out);
            }
        }
        Value::String(s) => out.push(vec![prefix.to_string(), s.clone()]),
        other => out.push(vec![prefix.to_string(), other.to_string()]),
    }
}

fn write_csv(header: &[String], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}
