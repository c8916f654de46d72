//! CSV artifacts with a `#`-prefixed provenance header, plus an optional
//! JSON mirror. Files are rendered in memory first and written only after
//! every artifact of a run has been produced.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i128)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i128)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:e}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Int(i) => serde_json::Value::from(*i as i64),
            Cell::Float(x) => serde_json::Value::from(*x),
            Cell::Text(s) => serde_json::Value::from(s.clone()),
            Cell::Bool(b) => serde_json::Value::from(*b),
        }
    }
}

/// One output table.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub formulas: Vec<&'static str>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Artifact {
    pub fn new(name: &str, formulas: &[&'static str], columns: &[&'static str]) -> Self {
        Artifact {
            name: name.to_string(),
            formulas: formulas.to_vec(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "{}", self.name);
        self.rows.push(row);
    }

    /// Rejects NaN and infinities.
    pub fn check_finite(&self) -> Result<(), CliError> {
        for (i, row) in self.rows.iter().enumerate() {
            for (c, cell) in row.iter().enumerate() {
                if let Cell::Float(x) = cell {
                    if !x.is_finite() {
                        return Err(CliError::Numerical(format!(
                            "{}: non-finite value in row {i}, column {}",
                            self.name, self.columns[c]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn render_csv(&self, header: &Header) -> Result<String, CliError> {
        let mut out = String::new();
        out.push_str(&format!("# {} {}\n", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")));
        out.push_str(&format!("# command: {}\n", header.command));
        out.push_str(&format!("# config: {}\n", header.config_json));
        out.push_str(&format!("# formulas: {}\n", self.formulas.join(", ")));
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(io_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io_err)?;
        }
        let body = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        out.push_str(&String::from_utf8(body).map_err(|e| CliError::Io(e.to_string()))?);
        Ok(out)
    }

    pub fn render_json(&self, header: &Header) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = serde_json::Map::new();
                for (c, cell) in self.columns.iter().zip(r) {
                    m.insert(c.to_string(), cell.json());
                }
                serde_json::Value::Object(m)
            })
            .collect();
        let doc = serde_json::json!({
            "tool": format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            "command": header.command,
            "config": serde_json::from_str::<serde_json::Value>(&header.config_json).unwrap_or_default(),
            "formulas": self.formulas,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("json");
        s.push('\n');
        s
    }
}

fn io_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

#[derive(Debug, Clone)]
pub struct Header {
    pub command: String,
    pub config_json: String,
}

impl Header {
    pub fn new<T: Serialize>(command: &str, config: &T) -> Self {
        Header {
            command: command.to_string(),
            config_json: serde_json::to_string(config).expect("config serializes"),
        }
    }
}

/// Renders every artifact, then writes them under `dir`. Returns the paths
/// written, in order.
pub fn write_all(dir: &Path, header: &Header, artifacts: &[Artifact], json: bool) -> Result<Vec<PathBuf>, CliError> {
    let mut rendered = Vec::new();
    for a in artifacts {
        a.check_finite()?;
        rendered.push((format!("{}.csv", a.name), a.render_csv(header)?));
        if json {
            rendered.push((format!("{}.json", a.name), a.render_json(header)));
        }
    }
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut paths = Vec::new();
    for (name, text) in rendered {
        let p = dir.join(name);
        fs::write(&p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
        paths.push(p);
    }
    Ok(paths)
}
