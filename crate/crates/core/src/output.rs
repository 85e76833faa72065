//! CSV and JSON emission of run results.
//!
//! CSV files have a one-line header, comma separators and LF line
//! endings. Numbers are written with 17 significant digits
//! (`{:.16e}`), which round-trips every `f64` exactly. Missing values
//! (a boundary after confluence) are empty cells.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{JumpComparison, RunSummary};
use crate::config::RunConfig;
use crate::diagnostics::{BoundaryTrack, VelocityFit};
use crate::error::{Error, Result};
use crate::model::{theta_from_sigma, TemperatureModelParams};
use crate::numerics::RadialMesh;
use crate::solver::{RunRecord, Snapshot, Termination};

pub const BOUNDARY_TRACK_FILE: &str = "boundary_track.csv";
pub const PROBES_FILE: &str = "probes.csv";
pub const DIP_REPORT_FILE: &str = "dip_report.json";
pub const RUN_META_FILE: &str = "run_meta.json";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

/// Columns `t, r1, r2`.
pub fn write_boundary_track(path: &Path, track: &BoundaryTrack) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["t", "r1", "r2"])?;
    for ((t, r1), r2) in track.times.iter().zip(&track.r1).zip(&track.r2) {
        w.write_record([fmt_f64(*t), fmt_opt(*r1), fmt_opt(*r2)])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `t`, then `sigma@R` and `u@R` for each probe radius `R`.
pub fn write_probes(path: &Path, record: &RunRecord) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["t".to_string()];
    for p in &record.probes {
        header.push(format!("sigma@{}", p.radius));
        header.push(format!("u@{}", p.radius));
    }
    w.write_record(&header)?;
    for (k, t) in record.times.iter().enumerate() {
        let mut row = vec![fmt_f64(*t)];
        for p in &record.probes {
            row.push(fmt_f64(p.sigma[k]));
            row.push(fmt_f64(p.u[k]));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn snapshot_file_name(requested: f64) -> String {
    format!("snapshot_t{requested}.csv")
}

/// Columns `r, u, sigma, theta`.
pub fn write_snapshot(path: &Path, snapshot: &Snapshot, mesh: &RadialMesh) -> Result<()> {
    let theta = theta_from_sigma(&snapshot.fields.sigma, mesh)?;
    let mut w = csv_writer(path)?;
    w.write_record(["r", "u", "sigma", "theta"])?;
    for (i, r) in mesh.nodes().enumerate() {
        w.write_record([
            fmt_f64(r),
            fmt_f64(snapshot.fields.u[i]),
            fmt_f64(snapshot.fields.sigma[i]),
            fmt_f64(theta[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Contents of `dip_report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DipReportFile {
    pub found: bool,
    pub r_min: Option<f64>,
    pub t_min: Option<f64>,
    pub sigma_min: Option<f64>,
    pub amplitude: Option<f64>,
    pub onset_time: Option<f64>,
    pub width: Option<f64>,
    pub confluence_time: Option<f64>,
}

impl DipReportFile {
    pub fn from_summary(summary: &RunSummary) -> Self {
        let d = summary.dip;
        Self {
            found: d.is_some(),
            r_min: d.map(|d| d.r_min),
            t_min: d.map(|d| d.t_min),
            sigma_min: d.map(|d| d.sigma_min),
            amplitude: d.map(|d| d.amplitude),
            onset_time: d.map(|d| d.onset_time),
            width: d.and_then(|d| d.width),
            confluence_time: summary.track.confluence_time,
        }
    }
}

/// Contents of `run_meta.json`: the resolved config plus run status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub version: String,
    pub status: RunStatus,
    pub config: RunConfig,
    pub termination: Termination,
    pub steps_completed: usize,
    pub under_resolved: bool,
    pub dominance_lost_steps: usize,
    pub dominance_lost_near_confluence: usize,
    pub spurious_crossing_levels: usize,
    pub confluence_time: Option<f64>,
    pub confluence_radius: Option<f64>,
    pub velocity_fit_r1: Option<VelocityFit>,
    pub velocity_fit_r2: Option<VelocityFit>,
    pub jump: Option<JumpComparison>,
    pub initial_temperature: TemperatureModelParams,
    pub snapshots: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Diverged,
}

impl RunStatus {
    /// Process exit code: 0 clean, 2 diverged.
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Completed => 0,
            Self::Diverged => 2,
        }
    }
}

impl RunMeta {
    pub fn new(record: &RunRecord, summary: &RunSummary) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            status: if summary.diverged() {
                RunStatus::Diverged
            } else {
                RunStatus::Completed
            },
            config: record.config.clone(),
            termination: record.termination.clone(),
            steps_completed: summary.steps_completed,
            under_resolved: summary.under_resolved,
            dominance_lost_steps: summary.dominance_lost_steps,
            dominance_lost_near_confluence: summary.dominance_lost_near_confluence,
            spurious_crossing_levels: summary.track.spurious_levels,
            confluence_time: summary.track.confluence_time,
            confluence_radius: summary.track.confluence_radius,
            velocity_fit_r1: summary.fits.map(|f| f.0),
            velocity_fit_r2: summary.fits.map(|f| f.1),
            jump: summary.jump,
            initial_temperature: record.initial_temperature,
            snapshots: record.snapshots.iter().map(|s| snapshot_file_name(s.requested)).collect(),
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes every output file of one run into `dir` and returns the run status.
pub fn write_run_outputs(dir: &Path, record: &RunRecord, summary: &RunSummary) -> Result<RunStatus> {
    fs::create_dir_all(dir)?;
    write_boundary_track(&dir.join(BOUNDARY_TRACK_FILE), &summary.track)?;
    write_probes(&dir.join(PROBES_FILE), record)?;
    for s in &record.snapshots {
        write_snapshot(&dir.join(snapshot_file_name(s.requested)), s, &record.mesh)?;
    }
    write_json(&dir.join(DIP_REPORT_FILE), &DipReportFile::from_summary(summary))?;
    let meta = RunMeta::new(record, summary);
    write_json(&dir.join(RUN_META_FILE), &meta)?;
    Ok(meta.status)
}

/// A parsed CSV file: header plus numeric cells (`None` for empty cells).
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// Reads a CSV written by this module. Non-numeric cells are an error.
pub fn read_csv(path: &Path) -> Result<CsvTable> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|cell| {
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse::<f64>()
                        .map(Some)
                        .map_err(|_| Error::Parse(format!("non-numeric cell `{cell}` in {}", path.display())))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(CsvTable { header, rows })
}

/// Directory name of one sweep member.
pub fn member_dir(root: &Path, epsilon: f64) -> PathBuf {
    root.join(format!("eps_{epsilon}"))
}
