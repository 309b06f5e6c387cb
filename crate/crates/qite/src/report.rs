//! Per-step CSV and entropy matrices derived from solve reports.

use std::path::Path;

use qite_core::solver::SolveReport;

use crate::error::{CliError, CliResult};
use crate::json::fmt_f64;

fn writer(path: &Path) -> CliResult<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Data(format!("{}: {other:?}", path.display())),
    }
}

fn bond_headers(n: usize) -> impl Iterator<Item = String> {
    (0..n.saturating_sub(1)).map(|b| format!("S_{b}"))
}

/// One row per recorded step: energy, sample statistics, best cost,
/// cumulative entanglement and per-bond entropies.
pub fn write_steps_csv(path: &Path, report: &SolveReport) -> CliResult<()> {
    let mut w = writer(path)?;
    let mut header: Vec<String> = [
        "step",
        "energy",
        "sample_mean",
        "sample_variance",
        "best_cost",
        "cumulative_entropy",
        "max_bond_dim",
        "max_discarded_weight",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(bond_headers(report.n));
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for s in &report.steps {
        let mut row = vec![
            s.step.to_string(),
            fmt_f64(s.energy),
            fmt_f64(s.sample_mean),
            fmt_f64(s.sample_variance),
            fmt_f64(s.best_cost),
            fmt_f64(s.cumulative_entropy),
            s.max_bond_dim.to_string(),
            fmt_f64(s.max_discarded_weight),
        ];
        row.extend(s.bond_entropies.iter().map(|&e| fmt_f64(e)));
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Steps × bonds entropy matrix with the normalized cumulative column.
pub fn entropy_matrix(report: &SolveReport) -> CliResult<Vec<(usize, f64, Vec<f64>)>> {
    if report.steps.is_empty() {
        return Err(CliError::Data("report has no step records".into()));
    }
    let bonds = report.n.saturating_sub(1);
    report
        .steps
        .iter()
        .map(|s| {
            if s.bond_entropies.len() != bonds {
                return Err(CliError::Data(format!(
                    "step {} has {} bond entropies, expected {bonds}",
                    s.step,
                    s.bond_entropies.len()
                )));
            }
            Ok((s.step, s.cumulative_entropy, s.bond_entropies.clone()))
        })
        .collect()
}

pub fn write_entropy_csv(path: &Path, report: &SolveReport) -> CliResult<()> {
    let rows = entropy_matrix(report)?;
    let mut w = writer(path)?;
    let mut header = vec!["step".to_string(), "cumulative_entropy".to_string()];
    header.extend(bond_headers(report.n));
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for (step, a, bonds) in rows {
        let mut row = vec![step.to_string(), fmt_f64(a)];
        row.extend(bonds.iter().map(|&e| fmt_f64(e)));
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
