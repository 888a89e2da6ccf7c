//! Report bodies and CSV tables.
//!
//! `report.json` depends only on the resolved config, so repeated runs are
//! byte-identical; the wall-clock time goes to `run_meta.json` instead.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

/// One asserted property. `residual = rhs − lhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub pass: bool,
}

impl Assertion {
    fn new(name: impl Into<String>, lhs: f64, rhs: f64, pass: bool) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            residual: rhs - lhs,
            pass,
        }
    }

    /// `lhs ≤ rhs + tol`
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self::new(name, lhs, rhs, rhs - lhs >= -tol)
    }

    /// `lhs < rhs` by more than `tol`
    pub fn lt(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self::new(name, lhs, rhs, rhs - lhs > tol)
    }

    /// `|lhs − rhs| ≤ tol`
    pub fn close(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self::new(name, lhs, rhs, (rhs - lhs).abs() <= tol)
    }

    /// A count that must be zero.
    pub fn none(name: impl Into<String>, count: usize) -> Self {
        Self::new(name, count as f64, 0.0, count == 0)
    }

    /// A boolean property, recorded as `1 ≤ 1` or `0 ≤ 1`.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::new(name, 1.0, f64::from(u8::from(ok)), ok)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    Float(f64),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            // 17 significant digits round-trip every f64
            Cell::Float(x) => format!("{x:.16e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: Vec<&'static str>) -> Self {
        Self {
            name: name.into(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn all_finite(&self) -> bool {
        self.rows
            .iter()
            .flatten()
            .all(|c| !matches!(c, Cell::Float(x) if !x.is_finite()))
    }

    pub fn to_csv(&self) -> io::Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        String::from_utf8(bytes).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub scenario: &'static str,
    pub config: Value,
    pub results: Value,
    pub assertions: Vec<Assertion>,
    pub passed: bool,
}

/// Everything a scenario produces; nothing here depends on timing.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub tables: Vec<Table>,
    /// Extra JSON files, such as failing-instance dumps.
    pub dumps: Vec<(String, Value)>,
}

impl Outcome {
    pub fn new(
        scenario: &'static str,
        config: impl Serialize,
        results: Value,
        mut assertions: Vec<Assertion>,
        tables: Vec<Table>,
    ) -> Self {
        if !tables.is_empty() {
            assertions.push(Assertion::flag("csv_cells_finite", tables.iter().all(Table::all_finite)));
        }
        let passed = assertions.iter().all(|a| a.pass);
        Self {
            report: Report {
                scenario,
                config: to_value(config),
                results,
                assertions,
                passed,
            },
            tables,
            dumps: Vec::new(),
        }
    }

    pub fn with_dump(mut self, name: impl Into<String>, value: Value) -> Self {
        self.dumps.push((name.into(), value));
        self
    }

    pub fn passed(&self) -> bool {
        self.report.passed
    }

    /// Pretty-printed report body with a trailing newline.
    pub fn report_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("report is serializable");
        s.push('\n');
        s
    }

    /// Writes `report.json`, one CSV per table and the dumps into `dir`.
    pub fn write(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), self.report_json())?;
        for t in &self.tables {
            fs::write(dir.join(format!("{}.csv", t.name)), t.to_csv()?)?;
        }
        for (name, v) in &self.dumps {
            let mut s = serde_json::to_string_pretty(v).expect("dump is serializable");
            s.push('\n');
            fs::write(dir.join(format!("{name}.json")), s)?;
        }
        Ok(())
    }
}

pub fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("serializable value")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_seventeen_digits_and_lf() {
        let mut t = Table::new("t", vec!["id", "x"]);
        t.push(vec!["a".into(), 0.1.into()]);
        t.push(vec![Cell::Int(3), 1.0.into()]);
        assert_eq!(t.to_csv().unwrap(), "id,x\na,1.0000000000000001e-1\n3,1.0000000000000000e0\n");
        let back: f64 = "1.0000000000000001e-1".parse().unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn non_finite_cells_fail_the_report() {
        let mut t = Table::new("t", vec!["x"]);
        t.push(vec![f64::NAN.into()]);
        let o = Outcome::new("demo", serde_json::json!({}), Value::Null, vec![], vec![t]);
        assert!(!o.passed());
    }

    #[test]
    fn assertion_residuals() {
        let a = Assertion::le("x", 1.0, 2.0, 0.0);
        assert!(a.pass && a.residual == 1.0);
        assert!(!Assertion::lt("y", 1.0, 1.0, 0.0).pass);
        assert!(Assertion::close("z", 1.0, 1.0 + 1e-12, 1e-10).pass);
        assert!(!Assertion::none("n", 2).pass);
    }
}
