//! Rendering and writing of command results.
//!
//! Every CSV starts with a fixed header: the tool version, the command, the
//! effective configuration (one `key = value` per line) and then the
//! command's summary values. JSON carries the same information as fields of a
//! single top-level object.

use std::io::Write;
use std::path::Path;

use hhbar_core::io::CsvTable;
use serde_json::{json, Map, Value};
use tempfile::NamedTempFile;

use crate::config::{Format, RunConfig};
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Result of one command, ready to be rendered.
#[derive(Clone, Debug)]
pub struct Artifact {
    pub command: &'static str,
    /// Scalar results, in display order.
    pub summary: Vec<(String, Value)>,
    pub table: CsvTable,
    /// JSON payload; when `None` the table rows are used.
    pub data: Option<Value>,
}

impl Artifact {
    pub fn new(command: &'static str, table: CsvTable) -> Self {
        Self { command, summary: Vec::new(), table, data: None }
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl Into<Value>) -> &mut Self {
        self.summary.push((key.into(), value.into()));
        self
    }
}

fn plain(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Table rows as objects; numeric cells become numbers and empty cells null.
pub fn table_json(table: &CsvTable) -> Value {
    let rows = table
        .rows
        .iter()
        .map(|row| {
            let mut object = Map::new();
            for (name, cell) in table.columns.iter().zip(row) {
                let value = if cell.is_empty() {
                    Value::Null
                } else if let Ok(x) = cell.parse::<f64>() {
                    json!(x)
                } else {
                    Value::String(cell.clone())
                };
                object.insert(name.clone(), value);
            }
            Value::Object(object)
        })
        .collect();
    Value::Array(rows)
}

pub fn render(artifact: &Artifact, config: &RunConfig) -> String {
    match config.format {
        Format::Csv => {
            let mut table = artifact.table.clone();
            let mut header = vec![format!("hhbar {VERSION}"), format!("command = {}", artifact.command)];
            header.extend(config.echo().into_iter().map(|(k, v)| format!("{k} = {v}")));
            header.extend(artifact.summary.iter().map(|(k, v)| format!("{k} = {}", plain(v))));
            header.append(&mut table.comments);
            table.comments = header;
            table.to_string_lossy()
        }
        Format::Json => {
            let config_echo: Map<String, Value> =
                config.echo().into_iter().map(|(k, v)| (k.to_string(), Value::String(v))).collect();
            let summary: Map<String, Value> = artifact.summary.iter().cloned().collect();
            let document = json!({
                "hhbar_version": VERSION,
                "command": artifact.command,
                "config": config_echo,
                "summary": summary,
                "columns": artifact.table.columns,
                "data": artifact.data.clone().unwrap_or_else(|| table_json(&artifact.table)),
            });
            let mut text = serde_json::to_string_pretty(&document).expect("JSON values always serialize");
            text.push('\n');
            text
        }
    }
}

/// Writes to `config.output` through a temporary file in the same directory,
/// so a failed run never leaves a partial artifact; without an output path
/// the text goes to stdout.
pub fn emit(artifact: &Artifact, config: &RunConfig) -> Result<(), CliError> {
    let text = render(artifact, config);
    match &config.output {
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
        Some(path) => write_atomic(path, &text),
    }
}

fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let io_err = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut file = NamedTempFile::new_in(dir).map_err(io_err)?;
    file.write_all(text.as_bytes()).map_err(io_err)?;
    file.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}
