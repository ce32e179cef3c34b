use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::Format;
use crate::circuit::{Architecture, RouterKind};

pub const CSV_HEADER: &str =
    "architecture,router_kind,n,p_prime,trials,mean_infidelity,ci95_low,ci95_high,analytic_bound,seed";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("row {row}: {reason}")]
    Row { row: usize, reason: String },
}

/// One simulated point. Field order is the CSV column order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub architecture: Architecture,
    pub router_kind: RouterKind,
    pub n: u32,
    pub p_prime: f64,
    pub trials: u64,
    pub mean_infidelity: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub analytic_bound: f64,
    pub seed: u64,
}

impl ReportRow {
    fn check(&self, row: usize) -> Result<(), ReportError> {
        let fail = |reason: &str| Err(ReportError::Row { row, reason: reason.to_string() });
        if !(self.ci95_low <= self.mean_infidelity && self.mean_infidelity <= self.ci95_high) {
            return fail("interval does not bracket the mean");
        }
        if self.analytic_bound.is_nan() || self.analytic_bound < 0.0 {
            return fail("negative analytic bound");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), ReportError> {
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        out.write_record(CSV_HEADER.split(','))?;
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<(), ReportError> {
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }

    pub fn write<W: Write>(&self, format: Format, w: W) -> Result<(), ReportError> {
        match format {
            Format::Csv => self.write_csv(w),
            Format::Json => self.write_json(w),
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Reads CSV with the exact header this module writes.
    pub fn parse_csv(text: &str) -> Result<Self, ReportError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header.join(",") != CSV_HEADER {
            return Err(ReportError::Row { row: 0, reason: format!("unexpected header {:?}", header.join(",")) });
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.deserialize::<ReportRow>().enumerate() {
            let row = rec?;
            row.check(i + 1)?;
            rows.push(row);
        }
        Ok(ExperimentReport { rows })
    }

    pub fn parse_json(text: &str) -> Result<Self, ReportError> {
        let report: ExperimentReport = serde_json::from_str(text)?;
        for (i, r) in report.rows.iter().enumerate() {
            r.check(i + 1)?;
        }
        Ok(report)
    }
}

/// Writes `report` to `path`, or to stdout when `path` is `None`.
pub fn emit_report(report: &ExperimentReport, format: Format, path: Option<&Path>) -> Result<(), ReportError> {
    match path {
        Some(p) => {
            let mut buf = Vec::new();
            report.write(format, &mut buf)?;
            fs::write(p, buf)?;
        }
        None => report.write(format, io::stdout().lock())?,
    }
    Ok(())
}
