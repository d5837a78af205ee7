//! Tables and their CSV / JSON serialisation.

use std::io::{self, Write};
use std::path::Path;

use serde_json::{json, Value};

/// One cell of an output row.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format_number(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // JSON has no NaN/inf
            Cell::Num(v) if !v.is_finite() => Value::String(format_number(*v)),
            Cell::Num(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Scientific notation with 17 significant digits, enough to round-trip
/// any f64.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Derived quantities reported next to the rows (fit amplitude, etc.).
    pub notes: Vec<(String, Cell)>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl Into<Cell>) {
        self.notes.push((key.into(), value.into()));
    }
}

/// Everything that precedes the data.
#[derive(Debug, Clone, PartialEq)]
pub struct Header {
    pub command: String,
    pub config: Value,
    pub constants: Value,
    pub rerun: String,
    /// RFC 3339; omitted with --no-timestamp.
    pub generated: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub fn render(format: Format, header: &Header, table: &Table) -> String {
    match format {
        Format::Csv => render_csv(header, table),
        Format::Json => render_json(header, table),
    }
}

fn render_csv(header: &Header, table: &Table) -> String {
    let mut out = String::new();
    out.push_str(&format!("# casimir-torque {}\n", header.command));
    out.push_str(&format!("# config: {}\n", header.config));
    out.push_str(&format!("# constants: {}\n", header.constants));
    out.push_str(&format!("# rerun: {}\n", header.rerun));
    if let Some(ts) = &header.generated {
        out.push_str(&format!("# generated: {ts}\n"));
    }
    for (k, v) in &table.notes {
        out.push_str(&format!("# {k}: {}\n", v.csv()));
    }
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let line: Vec<String> = row.iter().map(Cell::csv).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn render_json(header: &Header, table: &Table) -> String {
    let notes: serde_json::Map<String, Value> = table.notes.iter().map(|(k, v)| (k.clone(), v.json())).collect();
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
        .collect();
    let doc = json!({
        "command": header.command,
        "config": header.config,
        "constants": header.constants,
        "rerun": header.rerun,
        "generated": header.generated,
        "notes": notes,
        "columns": table.columns,
        "rows": rows,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON values always serialise");
    s.push('\n');
    s
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    // temp files are created 0600
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644))?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
