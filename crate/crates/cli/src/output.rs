use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Result fields at top level, preceded by the schema version, the command
/// and its resolved configuration.
pub fn envelope(command: &str, config: Value, result: Value) -> Value {
    let mut out = Map::new();
    out.insert("schema_version".into(), SCHEMA_VERSION.into());
    out.insert("command".into(), command.into());
    out.insert("config".into(), config);
    match result {
        Value::Object(m) => out.extend(m),
        other => {
            out.insert("result".into(), other);
        }
    }
    Value::Object(out)
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// CSV of an array of objects; the header is every key in order of first
/// appearance, missing cells are empty.
pub fn rows_csv(rows: &[Value]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut keys: Vec<String> = Vec::new();
    for r in rows {
        if let Value::Object(m) = r {
            for k in m.keys() {
                if !keys.contains(k) {
                    keys.push(k.clone());
                }
            }
        }
    }
    if keys.is_empty() {
        keys.push("value".into());
    }
    w.write_record(&keys).expect("in-memory write");
    for r in rows {
        let rec: Vec<String> = match r {
            Value::Object(m) => keys.iter().map(|k| m.get(k).map(cell).unwrap_or_default()).collect(),
            other => vec![cell(other)],
        };
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// A report as text: JSON on one line, or CSV of its `rows` (when present)
/// or of its top-level fields as a single row.
pub fn render(report: &Value, format: Format) -> String {
    match format {
        Format::Json => format!("{report}\n"),
        Format::Csv => match report.get("rows").and_then(Value::as_array) {
            Some(rows) => rows_csv(rows),
            None => {
                let mut one = report.clone();
                if let Value::Object(m) = &mut one {
                    m.remove("config");
                }
                rows_csv(&[one])
            }
        },
    }
}

/// Write-to-temp then rename, in the target's directory.
pub fn persist(path: &Path, text: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
