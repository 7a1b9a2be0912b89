//! Report primitives: measured values with their tolerances, experiment
//! reports, and the JSON / CSV emitters.
//!
//! Every number that reaches a report file carries the tolerance it was
//! computed at; the CSV is a fixed-schema flat table
//! `experiment,parameter,lhs,rhs,ratio,pass` suitable for plotting tools.

use crate::error::Result;
use std::io::Write;
use std::path::Path;

/// A measured value together with the numerical tolerance it was computed
/// at. Mesh discretization error is tracked separately by the stability
/// experiments, not here.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Measured {
    pub value: f64,
    pub tol: f64,
}

impl Measured {
    pub fn new(value: f64, tol: f64) -> Measured {
        Measured { value, tol }
    }

    /// Exact closed-form quantities: tolerance at rounding scale.
    pub fn exact(value: f64) -> Measured {
        Measured { value, tol: 1e-12 }
    }
}

/// One row of an inequality experiment: `pass` iff `lhs <= rhs`, where `rhs`
/// already includes the suite constant and the weight-bracket power.
#[derive(Debug, Clone, serde::Serialize)]
pub struct InequalityEntry {
    pub parameter: String,
    pub lhs: Measured,
    pub rhs: Measured,
    /// Normalized ratio `lhs / (bracket^exponent * base)`; pass iff this is
    /// at most the configured suite constant.
    pub ratio: Measured,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
}

/// Outcome of one inequality experiment over a suite of test functions.
#[derive(Debug, Clone, serde::Serialize)]
pub struct InequalityReport {
    pub experiment: String,
    /// Input echo: exponents, weight, constants.
    pub params: serde_json::Value,
    /// The weight-bracket power multiplying the right-hand side.
    pub constant_used: Measured,
    pub exponent_used: f64,
    pub entries: Vec<InequalityEntry>,
    pub pass: bool,
}

impl InequalityReport {
    pub fn rows(&self) -> Vec<CsvRow> {
        self.entries
            .iter()
            .map(|e| CsvRow {
                experiment: self.experiment.clone(),
                parameter: e.parameter.clone(),
                lhs: e.lhs.value,
                rhs: e.rhs.value,
                ratio: e.ratio.value,
                pass: e.pass,
            })
            .collect()
    }
}

/// One CSV record; the header is fixed.
#[derive(Debug, Clone)]
pub struct CsvRow {
    pub experiment: String,
    pub parameter: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
}

pub const CSV_HEADER: &str = "experiment,parameter,lhs,rhs,ratio,pass";

/// RFC 4180 quoting: wrap fields containing commas, quotes or newlines.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Shortest round-trip float formatting; deterministic for a given binary.
fn csv_float(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v}")
    }
}

/// Write `results.csv` (UTF-8, RFC 4180, fixed header row).
pub fn write_csv(path: &Path, rows: &[CsvRow]) -> Result<()> {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push_str("\r\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\r\n",
            csv_field(&r.experiment),
            csv_field(&r.parameter),
            csv_float(r.lhs),
            csv_float(r.rhs),
            csv_float(r.ratio),
            r.pass
        ));
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

/// Write `report.json` (pretty-printed, key order fixed by declaration).
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    let text = serde_json::to_string_pretty(value)?;
    file.write_all(text.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("q\"q"), "\"q\"\"q\"");
    }

    #[test]
    fn float_formatting_round_trips() {
        for v in [0.1, 1.0 / 3.0, 2.0 / 3.0f64.sqrt(), 1e-300] {
            assert_eq!(csv_float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(csv_float(f64::INFINITY), "inf");
    }
}
