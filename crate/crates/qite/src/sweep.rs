//! Grid runs over bond dimension, architecture, ordering and seed.

use qite_core::mps::TruncationPolicy;
use qite_core::ordering::OrderingKind;
use qite_core::solver::{solve, SolveStatus, SolverConfig};
use qite_core::swap_network::Architecture;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::problem_file::Instance;

#[derive(Clone, Debug)]
pub struct SweepGrid {
    pub chis: Vec<usize>,
    pub architectures: Vec<Architecture>,
    pub orderings: Vec<OrderingKind>,
    pub seeds: Vec<u64>,
    /// Step size, step limit, sample count, cutoff and stop ratio shared by
    /// every cell.
    pub base: SolverConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub chi: usize,
    pub architecture: Architecture,
    pub ordering: OrderingKind,
}

impl SweepGrid {
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &chi in &self.chis {
            for &architecture in &self.architectures {
                for &ordering in &self.orderings {
                    out.push(Cell { chi, architecture, ordering });
                }
            }
        }
        out
    }

    pub fn config(&self, cell: Cell, seed: u64) -> CliResult<SolverConfig> {
        let truncation = TruncationPolicy::new(cell.chi, self.base.truncation.sv_cutoff())?;
        let cfg = SolverConfig {
            truncation,
            architecture: cell.architecture,
            ordering: cell.ordering,
            ordering_seed: seed,
            seed,
            ..self.base.clone()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Rejects grids that cannot run on the given instances.
    pub fn validate(&self, instances: &[(String, Instance)]) -> CliResult<()> {
        if self.chis.is_empty() || self.architectures.is_empty() || self.orderings.is_empty() {
            return Err(CliError::Config("sweep grid has an empty axis".into()));
        }
        if self.seeds.is_empty() {
            return Err(CliError::Config("sweep needs at least one seed".into()));
        }
        for cell in self.cells() {
            self.config(cell, 0)?;
        }
        if self.orderings.contains(&OrderingKind::Hierarchical) {
            if let Some((name, _)) = instances.iter().find(|(_, i)| i.portfolio.is_none()) {
                return Err(CliError::Config(format!(
                    "hierarchical ordering needs portfolio instances; {name} is not one"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub instance: String,
    pub n: usize,
    pub chi: usize,
    pub architecture: Architecture,
    pub ordering: OrderingKind,
    pub seed: u64,
    pub status: String,
    pub best_cost: Option<f64>,
    pub approximation_ratio: Option<f64>,
    pub error: Option<f64>,
    pub steps: usize,
    pub seconds_per_step: f64,
    pub message: String,
}

impl RunRow {
    pub fn failed(&self) -> bool {
        self.status == "failed"
    }
}

fn run_one(name: &str, inst: &Instance, grid: &SweepGrid, cell: Cell, seed: u64) -> RunRow {
    let mut row = RunRow {
        instance: name.to_string(),
        n: inst.model.n(),
        chi: cell.chi,
        architecture: cell.architecture,
        ordering: cell.ordering,
        seed,
        status: "failed".into(),
        best_cost: None,
        approximation_ratio: None,
        error: None,
        steps: 0,
        seconds_per_step: 0.0,
        message: String::new(),
    };
    let cfg = match grid.config(cell, seed) {
        Ok(c) => SolverConfig { hierarchy: inst.hierarchy(), ..c },
        Err(e) => {
            row.message = e.to_string();
            return row;
        }
    };
    match solve(&inst.model, &cfg, inst.reference_cost) {
        Ok(report) => {
            row.steps = report.steps_run();
            let elapsed = report.steps.last().map_or(0.0, |s| s.elapsed_seconds);
            row.seconds_per_step = if row.steps > 0 { elapsed / row.steps as f64 } else { 0.0 };
            match &report.status {
                SolveStatus::Failed { message } => row.message = message.clone(),
                status => {
                    row.status = match status {
                        SolveStatus::Converged { .. } => "converged",
                        _ => "max_steps",
                    }
                    .into();
                    row.best_cost = Some(report.best_cost);
                    row.approximation_ratio = report.approximation_ratio;
                    row.error = report.error;
                }
            }
        }
        Err(e) => row.message = e.to_string(),
    }
    row
}

/// Worker count from `QITE_THREADS`, if set.
pub fn threads_from_env() -> CliResult<Option<usize>> {
    match std::env::var("QITE_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("QITE_THREADS='{v}' is not a positive integer"))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs every (instance, cell, seed) combination. Rows come back in grid
/// order regardless of the worker count.
pub fn run_sweep(
    instances: &[(String, Instance)],
    grid: &SweepGrid,
    threads: Option<usize>,
) -> CliResult<Vec<RunRow>> {
    grid.validate(instances)?;
    let mut jobs = Vec::new();
    for (k, _) in instances.iter().enumerate() {
        for cell in grid.cells() {
            for &seed in &grid.seeds {
                jobs.push((k, cell, seed));
            }
        }
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    let rows = pool.install(|| {
        jobs.par_iter()
            .map(|&(k, cell, seed)| {
                let (name, inst) = &instances[k];
                let row = run_one(name, inst, grid, cell, seed);
                if row.failed() {
                    log::warn!("{name} {cell:?} seed {seed} failed: {}", row.message);
                }
                row
            })
            .collect()
    });
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    pub instance: String,
    pub chi: usize,
    pub architecture: Architecture,
    pub ordering: OrderingKind,
    pub runs: usize,
    pub failures: usize,
    pub mean_error: Option<f64>,
    pub sd_error: Option<f64>,
    pub mean_ar: Option<f64>,
    pub sd_ar: Option<f64>,
    pub mean_steps: Option<f64>,
    pub sd_steps: Option<f64>,
    pub mean_seconds_per_step: Option<f64>,
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_sd(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (Some(mean), Some(sd))
}

/// One row per (instance, cell), aggregating over seeds. Failed runs are
/// counted but excluded from the statistics.
pub fn aggregate(runs: &[RunRow]) -> Vec<CellRow> {
    let mut out: Vec<CellRow> = Vec::new();
    let mut groups: Vec<Vec<&RunRow>> = Vec::new();
    for r in runs {
        let key = |c: &CellRow| {
            c.instance == r.instance && c.chi == r.chi && c.architecture == r.architecture && c.ordering == r.ordering
        };
        let idx = match out.iter().position(key) {
            Some(i) => i,
            None => {
                out.push(CellRow {
                    instance: r.instance.clone(),
                    chi: r.chi,
                    architecture: r.architecture,
                    ordering: r.ordering,
                    runs: 0,
                    failures: 0,
                    mean_error: None,
                    sd_error: None,
                    mean_ar: None,
                    sd_ar: None,
                    mean_steps: None,
                    sd_steps: None,
                    mean_seconds_per_step: None,
                });
                groups.push(Vec::new());
                out.len() - 1
            }
        };
        groups[idx].push(r);
    }
    for (row, group) in out.iter_mut().zip(&groups) {
        let ok: Vec<&&RunRow> = group.iter().filter(|r| !r.failed()).collect();
        row.runs = group.len();
        row.failures = group.len() - ok.len();
        let errors: Vec<f64> = ok.iter().filter_map(|r| r.error).collect();
        let ars: Vec<f64> = ok.iter().filter_map(|r| r.approximation_ratio).collect();
        let steps: Vec<f64> = ok.iter().map(|r| r.steps as f64).collect();
        let times: Vec<f64> = ok.iter().map(|r| r.seconds_per_step).collect();
        (row.mean_error, row.sd_error) = mean_sd(&errors);
        (row.mean_ar, row.sd_ar) = mean_sd(&ars);
        (row.mean_steps, row.sd_steps) = mean_sd(&steps);
        row.mean_seconds_per_step = mean_sd(&times).0;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub chi: usize,
    pub architecture: Architecture,
    pub ordering: OrderingKind,
    pub instances: usize,
    pub mean_error: Option<f64>,
    pub mean_ar: Option<f64>,
    pub mean_steps: Option<f64>,
    pub mean_seconds_per_step: Option<f64>,
}

/// Per-cell means of the instance rows.
pub fn summarize(cells: &[CellRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(usize, Architecture, OrderingKind)> = Vec::new();
    for c in cells {
        let k = (c.chi, c.architecture, c.ordering);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(chi, architecture, ordering)| {
            let rows: Vec<&CellRow> = cells
                .iter()
                .filter(|c| c.chi == chi && c.architecture == architecture && c.ordering == ordering)
                .collect();
            let avg = |f: fn(&CellRow) -> Option<f64>| {
                mean_sd(&rows.iter().filter_map(|r| f(r)).collect::<Vec<_>>()).0
            };
            SummaryRow {
                chi,
                architecture,
                ordering,
                instances: rows.len(),
                mean_error: avg(|r| r.mean_error),
                mean_ar: avg(|r| r.mean_ar),
                mean_steps: avg(|r| r.mean_steps),
                mean_seconds_per_step: avg(|r| r.mean_seconds_per_step),
            }
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(crate::json::fmt_f64).unwrap_or_default()
}

pub fn write_runs_csv(path: &std::path::Path, rows: &[RunRow]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| crate::report::csv_error(path, e))?;
    let header = [
        "instance", "n", "chi", "arch", "ordering", "seed", "status", "best_cost",
        "approximation_ratio", "error", "steps", "seconds_per_step", "message",
    ];
    w.write_record(header).map_err(|e| crate::report::csv_error(path, e))?;
    for r in rows {
        w.write_record([
            r.instance.clone(),
            r.n.to_string(),
            r.chi.to_string(),
            r.architecture.short_name().to_string(),
            r.ordering.name().to_string(),
            r.seed.to_string(),
            r.status.clone(),
            opt(r.best_cost),
            opt(r.approximation_ratio),
            opt(r.error),
            r.steps.to_string(),
            crate::json::fmt_f64(r.seconds_per_step),
            r.message.clone(),
        ])
        .map_err(|e| crate::report::csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_cells_csv(path: &std::path::Path, rows: &[CellRow]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| crate::report::csv_error(path, e))?;
    let header = [
        "instance", "chi", "arch", "ordering", "runs", "failures", "mean_error", "sd_error",
        "mean_ar", "sd_ar", "mean_steps", "sd_steps", "mean_seconds_per_step",
    ];
    w.write_record(header).map_err(|e| crate::report::csv_error(path, e))?;
    for r in rows {
        w.write_record([
            r.instance.clone(),
            r.chi.to_string(),
            r.architecture.short_name().to_string(),
            r.ordering.name().to_string(),
            r.runs.to_string(),
            r.failures.to_string(),
            opt(r.mean_error),
            opt(r.sd_error),
            opt(r.mean_ar),
            opt(r.sd_ar),
            opt(r.mean_steps),
            opt(r.sd_steps),
            opt(r.mean_seconds_per_step),
        ])
        .map_err(|e| crate::report::csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_summary_csv(path: &std::path::Path, rows: &[SummaryRow]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| crate::report::csv_error(path, e))?;
    let header = [
        "chi", "arch", "ordering", "instances", "mean_error", "mean_ar", "mean_steps",
        "mean_seconds_per_step",
    ];
    w.write_record(header).map_err(|e| crate::report::csv_error(path, e))?;
    for r in rows {
        w.write_record([
            r.chi.to_string(),
            r.architecture.short_name().to_string(),
            r.ordering.name().to_string(),
            r.instances.to_string(),
            opt(r.mean_error),
            opt(r.mean_ar),
            opt(r.mean_steps),
            opt(r.mean_seconds_per_step),
        ])
        .map_err(|e| crate::report::csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
