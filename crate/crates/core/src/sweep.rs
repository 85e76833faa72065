//! ε-sweeps and the two summary tables.
//!
//! Every member run writes its full outputs into `eps_<ε>/` under the
//! sweep directory. Members may run concurrently; rows are always
//! assembled in the order of `epsilons`, so tables do not depend on
//! scheduling.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::analysis::RunSummary;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::output::{fmt_f64, member_dir, write_run_outputs, RunStatus};
use crate::solver::run_simulation;

/// Interface widths of the standard sweep, largest first.
pub const DEFAULT_EPSILONS: [f64; 5] = [0.025, 0.01, 0.007, 0.005, 0.003];

pub const TABLE1_FILE: &str = "table1.csv";
pub const TABLE2_FILE: &str = "table2.csv";

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub epsilons: Vec<f64>,
    pub base: RunConfig,
    pub output_dir: PathBuf,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() {
            return Err(Error::InvalidConfig("sweep needs at least one epsilon".into()));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
            return Err(Error::InvalidConfig(format!("sweep epsilon {e} must be positive")));
        }
        if self.epsilons.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidConfig(format!(
                "sweep epsilons must be strictly decreasing, got {:?}",
                self.epsilons
            )));
        }
        for &e in &self.epsilons {
            self.base.with_epsilon(e).validate()?;
        }
        Ok(())
    }
}

/// Runs one configuration and writes its outputs into `dir`.
pub fn run_to_dir(cfg: &RunConfig, dir: &Path) -> Result<(RunSummary, RunStatus)> {
    let record = run_simulation(cfg)?;
    let summary = record.summarize();
    let status = write_run_outputs(dir, &record, &summary)?;
    Ok((summary, status))
}

/// Runs every member with at most `parallel` runs at a time.
pub fn run_sweep(spec: &SweepSpec, parallel: usize) -> Result<Vec<RunSummary>> {
    spec.validate()?;
    std::fs::create_dir_all(&spec.output_dir)?;
    let run_one = |&eps: &f64| -> Result<RunSummary> {
        let cfg = spec.base.with_epsilon(eps);
        log::info!("sweep member epsilon = {eps}");
        run_to_dir(&cfg, &member_dir(&spec.output_dir, eps)).map(|(s, _)| s)
    };
    if parallel <= 1 {
        return spec.epsilons.iter().map(run_one).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| spec.epsilons.par_iter().map(run_one).collect())
}

/// One row of the dip location table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    pub epsilon: f64,
    pub t_min: Option<f64>,
    pub r_min: Option<f64>,
    pub sigma_min: Option<f64>,
    /// `t_min` minus the previous row's `t_min`.
    pub dt_min: Option<f64>,
    pub diverged: bool,
}

pub fn table1_rows(summaries: &[RunSummary]) -> Vec<Table1Row> {
    let mut prev: Option<f64> = None;
    summaries
        .iter()
        .map(|s| {
            let t_min = s.dip.map(|d| d.t_min);
            let dt_min = match (prev, t_min) {
                (Some(a), Some(b)) => Some(b - a),
                _ => None,
            };
            prev = t_min;
            Table1Row {
                epsilon: s.epsilon,
                t_min,
                r_min: s.dip.map(|d| d.r_min),
                sigma_min: s.dip.map(|d| d.sigma_min),
                dt_min,
                diverged: s.diverged(),
            }
        })
        .collect()
}

/// One row of the jump comparison table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table2Row {
    pub epsilon: f64,
    pub r1: Option<f64>,
    pub v1: Option<f64>,
    pub r2: Option<f64>,
    pub v2: Option<f64>,
    pub sigma_an: Option<f64>,
    pub sigma_cal: Option<f64>,
    pub gap: Option<f64>,
    pub diverged: bool,
}

pub fn table2_rows(summaries: &[RunSummary]) -> Vec<Table2Row> {
    summaries
        .iter()
        .map(|s| {
            let j = s.jump;
            Table2Row {
                epsilon: s.epsilon,
                r1: j.map(|j| j.r1),
                v1: j.map(|j| j.v1),
                r2: j.map(|j| j.r2),
                v2: j.map(|j| j.v2),
                sigma_an: j.map(|j| j.sigma_an),
                sigma_cal: j.map(|j| j.sigma_cal),
                gap: j.map(|j| j.gap()),
                diverged: s.diverged(),
            }
        })
        .collect()
}

fn cell(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

pub fn write_table1(path: &Path, rows: &[Table1Row]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["epsilon", "t_min", "r_min", "sigma_min", "dt_min", "diverged"])?;
    for r in rows {
        w.write_record([
            fmt_f64(r.epsilon),
            cell(r.t_min),
            cell(r.r_min),
            cell(r.sigma_min),
            cell(r.dt_min),
            u8::from(r.diverged).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_table2(path: &Path, rows: &[Table2Row]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "epsilon", "r1", "v1", "r2", "v2", "sigma_an", "sigma_cal", "gap", "diverged",
    ])?;
    for r in rows {
        w.write_record([
            fmt_f64(r.epsilon),
            cell(r.r1),
            cell(r.v1),
            cell(r.r2),
            cell(r.v2),
            cell(r.sigma_an),
            cell(r.sigma_cal),
            cell(r.gap),
            u8::from(r.diverged).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the sweep and writes `table1.csv`.
pub fn cmd_table1(spec: &SweepSpec, parallel: usize) -> Result<Vec<Table1Row>> {
    let summaries = run_sweep(spec, parallel)?;
    let rows = table1_rows(&summaries);
    write_table1(&spec.output_dir.join(TABLE1_FILE), &rows)?;
    Ok(rows)
}

/// Runs the sweep and writes `table2.csv`.
pub fn cmd_table2(spec: &SweepSpec, parallel: usize) -> Result<Vec<Table2Row>> {
    let summaries = run_sweep(spec, parallel)?;
    let rows = table2_rows(&summaries);
    write_table2(&spec.output_dir.join(TABLE2_FILE), &rows)?;
    Ok(rows)
}
