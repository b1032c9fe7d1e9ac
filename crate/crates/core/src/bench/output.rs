use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::empirical::MseRecord;
use super::haar::HaarReport;
use super::sweep::AnalyticRow;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "estimator,component,J,epsilon,n_qubits,N_T,empirical_mse,std_error,analytic_mse,seed";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Argument(format!("unknown format {other:?}"))),
        }
    }
}

/// 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

/// MSE records as CSV; `wall_time` is left out so equal seeds give equal bytes.
pub fn records_to_csv(records: &[MseRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.estimator,
            r.component,
            r.order,
            fmt_opt(r.epsilon),
            r.n_qubits,
            r.n_t,
            fmt_float(r.empirical_mse),
            fmt_float(r.std_error),
            fmt_opt(r.analytic_mse),
            r.seed
        );
    }
    s
}

pub fn analytic_rows_to_csv(rows: &[AnalyticRow]) -> String {
    let mut s = String::from("kind,component,n_qubits,J,N_T,epsilon,value,approx,reference\n");
    for r in rows {
        let kind = match r.kind {
            super::sweep::SweepKind::GdOptVsN => "gd-opt-vs-n",
            super::sweep::SweepKind::NstarVsN => "nstar-vs-n",
        };
        let _ = writeln!(
            s,
            "{kind},{},{},{},{},{},{},{},{}",
            r.component,
            r.n_qubits,
            r.order,
            fmt_opt(r.n_t),
            fmt_opt(r.epsilon),
            fmt_opt(r.value),
            fmt_float(r.approx),
            fmt_opt(r.reference)
        );
    }
    s
}

pub fn haar_to_csv(report: &HaarReport) -> String {
    let mut s = String::from("quantity,estimate,std_error,target,relative_deviation,n_qubits,draws,seed\n");
    for e in &report.entries {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            e.quantity,
            fmt_float(e.estimate),
            fmt_float(e.std_error),
            fmt_float(e.target),
            fmt_float(e.relative_deviation),
            report.n_qubits,
            report.draws,
            report.seed
        );
    }
    s
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Argument(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn emit_results(records: &[MseRecord], path: &Path, format: Format) -> Result<()> {
    let text = match format {
        Format::Csv => records_to_csv(records),
        Format::Json => to_json(records)?,
    };
    write_text(path, &text)
}

pub fn read_json_records(path: &Path) -> Result<Vec<MseRecord>> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::config("records", e.to_string()))
}
