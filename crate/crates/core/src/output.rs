//! Deterministic CSV and JSON emission.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::analysis::SweepRow;
use crate::evolution::SurvivalSeries;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("writing {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("serializing {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

/// C `printf("%.12e")` formatting: `1.000000000000e+00`, `-2.634557130600e-05`.
pub fn fmt_e12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent formatting always has an 'e'");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_e12).unwrap_or_default()
}

fn create_dir_for(path: &Path) -> Result<(), OutputError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| OutputError::Io { path: dir.into(), source })?;
    }
    Ok(())
}

fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), OutputError> {
    create_dir_for(path)?;
    let csv_err = |source| OutputError::Csv { path: path.into(), source };
    let mut writer = csv::Writer::from_path(path).map_err(csv_err)?;
    writer.write_record(header).map_err(csv_err)?;
    for row in rows {
        writer.write_record(row).map_err(csv_err)?;
    }
    writer.flush().map_err(|source| OutputError::Io { path: path.into(), source })
}

/// Uniform samples as `t, p_survival, norm`, plus an `envelope` column
/// `exp(-2 gamma t)` when a rate is given.
pub fn write_series_csv(path: &Path, series: &SurvivalSeries, gamma: Option<f64>) -> Result<(), OutputError> {
    write_samples(path, &series.times, &series.survival, &series.norm, gamma)
}

/// Same layout as [`write_series_csv`] for the samples at `t = nT`.
pub fn write_strobe_csv(path: &Path, series: &SurvivalSeries, gamma: Option<f64>) -> Result<(), OutputError> {
    write_samples(path, &series.strobe_times, &series.strobe_survival, &series.strobe_norm, gamma)
}

fn write_samples(
    path: &Path,
    times: &[f64],
    survival: &[f64],
    norm: &[f64],
    gamma: Option<f64>,
) -> Result<(), OutputError> {
    let mut header = vec!["t", "p_survival", "norm"];
    if gamma.is_some() {
        header.push("envelope");
    }
    let rows: Vec<Vec<String>> = times
        .iter()
        .zip(survival)
        .zip(norm)
        .map(|((&t, &p), &n)| {
            let mut row = vec![fmt_e12(t), fmt_e12(p), fmt_e12(n)];
            if let Some(g) = gamma {
                row.push(fmt_e12((-2.0 * g * t).exp()));
            }
            row
        })
        .collect();
    write_rows(path, &header, &rows)
}

pub const SWEEP_HEADER: [&str; 9] =
    ["omega", "chi", "gamma_pole", "pole_re", "gamma_fit", "r_squared", "replica_flag_B", "replica_flag_A", "status"];

pub fn sweep_record(row: &SweepRow) -> Vec<String> {
    vec![
        fmt_e12(row.omega),
        fmt_e12(row.chi),
        fmt_opt(row.gamma_pole),
        fmt_opt(row.pole_re),
        fmt_opt(row.gamma_fit),
        fmt_opt(row.r_squared),
        u8::from(row.replica_flag_b).to_string(),
        u8::from(row.replica_flag_a).to_string(),
        row.status.clone(),
    ]
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<(), OutputError> {
    let records: Vec<Vec<String>> = rows.iter().map(sweep_record).collect();
    write_rows(path, &SWEEP_HEADER, &records)
}

/// Arbitrary table with preformatted cells.
pub fn write_table_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), OutputError> {
    write_rows(path, header, rows)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), OutputError> {
    create_dir_for(path)?;
    let text = serde_json::to_string_pretty(value).map_err(|source| OutputError::Json { path: path.into(), source })?;
    fs::write(path, text + "\n").map_err(|source| OutputError::Io { path: path.into(), source })
}
