//! CSV and JSON report writers.

use std::fs;
use std::path::Path;

use mfl_core::ExponentSet;
use serde::Serialize;

use crate::CliError;

/// One report line; the column order is fixed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub theorem_id: String,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub alpha: Option<f64>,
    /// `inf` or a number.
    pub s: String,
    /// Semicolon separated.
    pub p_list: String,
    pub kappa: Option<f64>,
    pub h: Option<f64>,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub ratio: Option<f64>,
    pub c_emp: Option<f64>,
    pub seed: u64,
}

impl ReportRow {
    /// A row with the exponent columns filled and the measurements blank.
    pub fn for_exponents(theorem_id: impl Into<String>, exps: &ExponentSet, seed: u64) -> Self {
        Self {
            theorem_id: theorem_id.into(),
            m: Some(exps.m()),
            n: Some(exps.n()),
            alpha: Some(exps.alpha()),
            s: format_real(exps.s()),
            p_list: exps.p_list().iter().map(|p| format_real(*p)).collect::<Vec<_>>().join(";"),
            kappa: Some(exps.kappa()),
            h: None,
            lhs: None,
            rhs: None,
            ratio: None,
            c_emp: None,
            seed,
        }
    }

    pub fn bare(theorem_id: impl Into<String>, seed: u64) -> Self {
        Self {
            theorem_id: theorem_id.into(),
            m: None,
            n: None,
            alpha: None,
            s: String::new(),
            p_list: String::new(),
            kappa: None,
            h: None,
            lhs: None,
            rhs: None,
            ratio: None,
            c_emp: None,
            seed,
        }
    }
}

pub fn format_real(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        x.to_string()
    }
}

/// Run-level facts written at the head of `report.json`.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Metadata {
    pub command: String,
    pub seed: u64,
    pub n: usize,
    pub half_width: f64,
    pub points: usize,
    pub corpus_size: usize,
    pub stride: usize,
    pub refine: bool,
    pub warnings: usize,
    pub failures: Vec<String>,
    pub warning_messages: Vec<String>,
    pub refusals: Vec<String>,
    pub exact_cases: usize,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    metadata: &'a Metadata,
    rows: &'a [ReportRow],
}

pub fn csv_string(rows: &[ReportRow]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record([
        "theorem_id", "m", "n", "alpha", "s", "p_list", "kappa", "h", "lhs", "rhs", "ratio", "c_emp", "seed",
    ])?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `report.csv` and `report.json` into `dir`, creating it if needed.
pub fn write_reports(dir: &Path, metadata: &Metadata, rows: &[ReportRow]) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.csv"), csv_string(rows)?)?;
    let json = serde_json::to_string_pretty(&JsonReport { metadata, rows })?;
    fs::write(dir.join("report.json"), json + "\n")?;
    Ok(())
}
