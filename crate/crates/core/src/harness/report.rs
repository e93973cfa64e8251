use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::run::{ExperimentReport, SampleDump};

/// Output encodings of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    name: &'a str,
    kind: &'a str,
    lhs: Option<f64>,
    rhs: Option<f64>,
    target: Option<f64>,
    estimate: Option<f64>,
    se: Option<f64>,
    z: Option<f64>,
    pass: bool,
}

fn io(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

/// Writes the report. CSV holds one row per check; the detail tables and
/// environment block only appear in JSON.
pub fn emit(report: &ExperimentReport, format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, report).map_err(io)?;
            writeln!(out).map_err(io)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for c in &report.checks {
                w.serialize(CsvRow {
                    name: &c.name,
                    kind: &c.kind,
                    lhs: c.lhs,
                    rhs: c.rhs,
                    target: c.target,
                    estimate: c.estimate,
                    se: c.se,
                    z: c.z,
                    pass: c.pass,
                })
                .map_err(io)?;
            }
            w.flush().map_err(io)
        }
    }
}

/// Writes raw samples as long-format CSV: `check,sample,column,value`.
pub fn emit_samples(dumps: &[SampleDump], out: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["check", "sample", "column", "value"]).map_err(io)?;
    for d in dumps {
        for (i, row) in d.rows.iter().enumerate() {
            for (col, v) in d.columns.iter().zip(row) {
                w.write_record([d.check.as_str(), &i.to_string(), col, &v.to_string()]).map_err(io)?;
            }
        }
    }
    w.flush().map_err(io)
}

/// Parses a JSON report written by [`emit`].
pub fn parse(text: &str) -> Result<ExperimentReport> {
    serde_json::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))
}
