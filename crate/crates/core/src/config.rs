//! Run configuration, its defaults and the key-value file grammar.
//!
//! A config file is TOML. Keys may sit at the top level or inside any
//! one-level section (`[mesh]`, `[physics]`, ...); sections are flattened,
//! so a key name means the same thing wherever it appears. A JSON file
//! (such as a `run_meta.json` written by a previous run) is accepted too:
//! its `config` object is used when present.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::RadialMesh;

/// Boundary condition applied at both ends of the shell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// `u = +1`, or `σ` pinned to its initial endpoint values.
    Dirichlet,
    /// Zero radial derivative (mirror ghost node).
    Neumann,
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Dirichlet => "dirichlet",
            Self::Neumann => "neumann",
        })
    }
}

/// Orientation of the gradient jump `[∂σ/∂r]` at a free boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpOrientation {
    /// `σ_r(r_i + 0) − σ_r(r_i − 0)`; the orientation the phase field
    /// equations themselves produce.
    RightMinusLeft,
    /// `σ_r(r_i − 0) − σ_r(r_i + 0)`.
    LeftMinusRight,
}

impl JumpOrientation {
    pub fn sign(self) -> f64 {
        match self {
            Self::RightMinusLeft => 1.0,
            Self::LeftMinusRight => -1.0,
        }
    }
}

/// Every parameter of a single simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Interface width parameter ε.
    pub epsilon: f64,
    /// Coupling constant ϰ.
    pub kappa: f64,
    pub r_inner: f64,
    pub r_outer: f64,
    /// Mesh spacing.
    pub h: f64,
    /// Time step.
    pub tau: f64,
    pub t_end: f64,
    /// Initial free boundary radii.
    pub r1_0: f64,
    pub r2_0: f64,
    /// Initial free boundary velocities `dr/dt`.
    pub v1_0: f64,
    pub v2_0: f64,
    /// Curvature coefficient of the initial temperature between the
    /// boundaries; `None` selects the default construction.
    pub dip_depth: Option<f64>,
    pub stefan_jump_orientation: JumpOrientation,
    pub bc_u: BoundaryCondition,
    pub bc_sigma: BoundaryCondition,
    pub probe_radii: Vec<f64>,
    pub snapshot_times: Vec<f64>,
    /// Radial window in which σ is retained at every step.
    pub retain_r_min: f64,
    pub retain_r_max: f64,
    /// Onset threshold for the dip, as a multiple of the baseline rate.
    pub onset_factor: f64,
    /// The dip is searched for from this fraction of the confluence time on.
    pub dip_search_start: f64,
    /// Velocity fit window as fractions of the confluence time.
    pub fit_window_start: f64,
    pub fit_window_end: f64,
    /// `max|u|` above which a run is declared diverged.
    pub divergence_threshold: f64,
}

pub const DEFAULT_KAPPA: f64 = std::f64::consts::SQRT_2 / 3.0;

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.025,
            kappa: DEFAULT_KAPPA,
            r_inner: 1.0,
            r_outer: 2.0,
            h: 1e-3,
            tau: 1e-5,
            t_end: 0.12,
            r1_0: 1.25,
            r2_0: 1.75,
            v1_0: 2.5,
            v2_0: -3.0,
            dip_depth: None,
            stefan_jump_orientation: JumpOrientation::RightMinusLeft,
            bc_u: BoundaryCondition::Dirichlet,
            bc_sigma: BoundaryCondition::Dirichlet,
            probe_radii: vec![1.15, 1.42],
            snapshot_times: vec![0.0, 0.05, 0.082],
            retain_r_min: 1.35,
            retain_r_max: 1.50,
            onset_factor: 5.0,
            dip_search_start: 0.5,
            fit_window_start: 0.2,
            fit_window_end: 0.7,
            divergence_threshold: 2.0,
        }
    }
}

/// Names accepted in config files and `--set` overrides.
pub const VALID_KEYS: &[&str] = &[
    "epsilon",
    "kappa",
    "r_inner",
    "r_outer",
    "h",
    "tau",
    "t_end",
    "r1_0",
    "r2_0",
    "v1_0",
    "v2_0",
    "dip_depth",
    "stefan_jump_orientation",
    "bc_u",
    "bc_sigma",
    "probe_radii",
    "snapshot_times",
    "retain_r_min",
    "retain_r_max",
    "onset_factor",
    "dip_search_start",
    "fit_window_start",
    "fit_window_end",
    "divergence_threshold",
];

impl RunConfig {
    pub fn mesh(&self) -> Result<RadialMesh> {
        RadialMesh::new(self.r_inner, self.r_outer, self.h)
    }

    /// Number of time steps needed to reach `t_end`.
    pub fn n_steps(&self) -> usize {
        let q = self.t_end / self.tau;
        let r = q.round();
        if (q - r).abs() <= 1e-9 * r.max(1.0) {
            r as usize
        } else {
            q.ceil() as usize
        }
    }

    /// Fewer than three mesh nodes across the width ε.
    pub fn is_under_resolved(&self) -> bool {
        self.epsilon / self.h < 3.0 - 1e-9
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let finite = [
            ("epsilon", self.epsilon),
            ("kappa", self.kappa),
            ("tau", self.tau),
            ("t_end", self.t_end),
            ("r1_0", self.r1_0),
            ("r2_0", self.r2_0),
            ("v1_0", self.v1_0),
            ("v2_0", self.v2_0),
            ("onset_factor", self.onset_factor),
            ("divergence_threshold", self.divergence_threshold),
        ];
        if let Some((k, v)) = finite.iter().find(|(_, v)| !v.is_finite()) {
            return bad(format!("{k} must be finite, got {v}"));
        }
        if self.epsilon <= 0.0 {
            return bad(format!("epsilon > 0 violated (epsilon = {})", self.epsilon));
        }
        let mesh = self.mesh()?;
        if !(mesh.r_inner() < self.r1_0 && self.r1_0 < self.r2_0 && self.r2_0 < mesh.r_outer()) {
            return bad(format!(
                "r_inner < r1_0 < r2_0 < r_outer violated ({} < {} < {} < {})",
                mesh.r_inner(),
                self.r1_0,
                self.r2_0,
                mesh.r_outer()
            ));
        }
        if self.tau <= 0.0 {
            return bad(format!("tau > 0 violated (tau = {})", self.tau));
        }
        if self.t_end < 0.0 {
            return bad(format!("t_end >= 0 violated (t_end = {})", self.t_end));
        }
        if mesh.r_inner() <= 0.0 {
            return bad("r_inner must be positive (σ/r is undefined at r = 0)".into());
        }
        if self.retain_r_min > self.retain_r_max {
            return bad(format!(
                "retain_r_min <= retain_r_max violated ({} > {})",
                self.retain_r_min, self.retain_r_max
            ));
        }
        if !(0.0 <= self.fit_window_start && self.fit_window_start < self.fit_window_end) {
            return bad(format!(
                "0 <= fit_window_start < fit_window_end violated ({}, {})",
                self.fit_window_start, self.fit_window_end
            ));
        }
        if !(0.0..=1.0).contains(&self.dip_search_start) {
            return bad(format!("0 <= dip_search_start <= 1 violated ({})", self.dip_search_start));
        }
        if self.onset_factor <= 0.0 {
            return bad(format!("onset_factor > 0 violated ({})", self.onset_factor));
        }
        if self.divergence_threshold <= 1.0 {
            return bad(format!(
                "divergence_threshold > 1 violated ({})",
                self.divergence_threshold
            ));
        }
        if let Some(r) = self.probe_radii.iter().find(|r| !(mesh.r_inner()..=mesh.r_outer()).contains(*r)) {
            return bad(format!("probe radius {r} lies outside the mesh"));
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return bad(format!("snapshot time {t} must be finite and non-negative"));
        }
        Ok(())
    }

    /// Loads a config file and applies `key=value` overrides on top.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)?;
            let is_json = path
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("json"));
            let entries = if is_json {
                json_entries(&text)?
            } else {
                toml_entries(&text)?
            };
            table.extend(entries);
        }
        for item in overrides {
            let (k, v) = parse_override(item)?;
            check_key(&k)?;
            table.insert(k, v);
        }
        let value = toml::Value::Table(table.into_iter().collect());
        let cfg: RunConfig = value
            .try_into()
            .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = toml_entries(text)?.into_iter().collect();
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Copy with a different ε.
    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self {
            epsilon,
            ..self.clone()
        }
    }
}

fn check_key(key: &str) -> Result<()> {
    if VALID_KEYS.contains(&key) {
        Ok(())
    } else {
        Err(Error::UnknownKey {
            key: key.to_string(),
            valid: VALID_KEYS.join(", "),
        })
    }
}

fn toml_entries(text: &str) -> Result<Vec<(String, toml::Value)>> {
    let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
    let mut out = Vec::new();
    for (k, v) in doc {
        match v {
            toml::Value::Table(section) if !VALID_KEYS.contains(&k.as_str()) => {
                for (k, v) in section {
                    check_key(&k)?;
                    out.push((k, v));
                }
            }
            v => {
                check_key(&k)?;
                out.push((k, v));
            }
        }
    }
    Ok(out)
}

fn json_entries(text: &str) -> Result<Vec<(String, toml::Value)>> {
    let doc: serde_json::Value = serde_json::from_str(text)?;
    let obj = match doc.get("config") {
        Some(cfg) => cfg.clone(),
        None => doc,
    };
    let serde_json::Value::Object(map) = obj else {
        return Err(Error::Parse("JSON config must be an object".into()));
    };
    let mut out = Vec::new();
    for (k, v) in map {
        check_key(&k)?;
        if v.is_null() {
            continue;
        }
        let v = toml::Value::try_from(&v).map_err(|e| Error::Parse(e.to_string()))?;
        out.push((k, v));
    }
    Ok(out)
}

fn parse_override(item: &str) -> Result<(String, toml::Value)> {
    let (k, v) = item
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("override `{item}` is not of the form key=value")))?;
    let k = k.trim().to_string();
    let v = v.trim();
    let value = match format!("x = {v}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("x").expect("key present"),
        Err(_) => toml::Value::String(v.to_string()),
    };
    Ok((k, value))
}
