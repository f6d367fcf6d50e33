use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

/// One acceptance check. `value` is compared against `tolerance` in the
/// direction named by `relation`.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
    pub relation: &'static str,
    pub provenance: String,
}

impl Check {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64, provenance: impl Into<String>) -> Self {
        Check { name: name.into(), pass: value <= tolerance, value, tolerance, relation: "<=", provenance: provenance.into() }
    }

    /// Passes when `value >= tolerance`.
    pub fn at_least(name: impl Into<String>, value: f64, tolerance: f64, provenance: impl Into<String>) -> Self {
        Check { name: name.into(), pass: value >= tolerance, value, tolerance, relation: ">=", provenance: provenance.into() }
    }

    pub fn holds(name: impl Into<String>, pass: bool, provenance: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass,
            value: if pass { 1.0 } else { 0.0 },
            tolerance: 1.0,
            relation: "==",
            provenance: provenance.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Column {
    pub name: String,
    /// Tolerance the column is checked against, if any.
    pub tolerance: Option<f64>,
    pub provenance: String,
}

pub fn col(name: &str, tolerance: Option<f64>, provenance: &str) -> Column {
    Column { name: name.into(), tolerance, provenance: provenance.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Num(x as f64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// A CSV table. Numeric-only tables are also written as whitespace
/// separated `.dat` files for plotting.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: Vec<Column>) -> Self {
        Table { name: name.into(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }

    /// Numeric value at `(row, column name)`.
    pub fn num(&self, row: usize, column: &str) -> Option<f64> {
        let c = self.columns.iter().position(|c| c.name == column)?;
        match self.rows.get(row)?.get(c)? {
            Cell::Num(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }

    pub fn column_values(&self, column: &str) -> Vec<f64> {
        (0..self.rows.len()).filter_map(|r| self.num(r, column)).collect()
    }

    fn numeric(&self) -> bool {
        self.rows.iter().flatten().all(|c| matches!(c, Cell::Num(_)))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_dat<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        writeln!(out, "# {}", header.join(" "))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::render).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TableMeta {
    pub file: String,
    pub rows: usize,
    pub columns: Vec<Column>,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub scenario: String,
    pub passed: bool,
    pub error: Option<String>,
    pub config: serde_json::Value,
    pub checks: Vec<Check>,
    pub tables: Vec<TableMeta>,
    /// Discrepancies and caveats surfaced by the run.
    pub flags: Vec<String>,
    /// Scenario-specific structured results.
    pub results: serde_json::Value,
}

/// Everything a scenario produces before it is written to disk.
#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub scenario: String,
    pub config: serde_json::Value,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    pub flags: Vec<String>,
    pub results: serde_json::Value,
    /// Extra raw CSV files, such as immersion samples.
    pub attachments: Vec<(String, Vec<u8>)>,
}

impl ScenarioReport {
    pub fn new(scenario: &str, config: serde_json::Value) -> Self {
        ScenarioReport {
            scenario: scenario.into(),
            config,
            checks: Vec::new(),
            tables: Vec::new(),
            flags: Vec::new(),
            results: serde_json::Value::Null,
            attachments: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn summary(&self) -> Summary {
        let mut metas: Vec<TableMeta> = self
            .tables
            .iter()
            .map(|t| TableMeta { file: format!("{}.csv", t.name), rows: t.rows.len(), columns: t.columns.clone() })
            .collect();
        metas.extend(self.attachments.iter().map(|(name, _)| TableMeta { file: name.clone(), rows: 0, columns: Vec::new() }));
        Summary {
            schema_version: SCHEMA_VERSION,
            scenario: self.scenario.clone(),
            passed: self.passed(),
            error: None,
            config: self.config.clone(),
            checks: self.checks.clone(),
            tables: metas,
            flags: self.flags.clone(),
            results: self.results.clone(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for t in &self.tables {
            t.write_csv(fs::File::create(dir.join(format!("{}.csv", t.name)))?)?;
            if t.numeric() {
                t.write_dat(fs::File::create(dir.join(format!("{}.dat", t.name)))?)?;
            }
        }
        for (name, bytes) in &self.attachments {
            fs::write(dir.join(name), bytes)?;
        }
        write_summary(dir, &self.summary())
    }
}

pub fn write_summary(dir: &Path, summary: &Summary) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    fs::write(dir.join("summary.json"), text)?;
    Ok(())
}
