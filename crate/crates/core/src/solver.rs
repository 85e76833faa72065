//! Split implicit time stepping.
//!
//! Each step first advances the order function with the linearized
//! implicit scheme
//!
//! ```text
//! ε (u' − u)/τ − ε D₂u' − 2ε D₁u' / r = (1/ε) [u' − u³ − 3u² (u' − u)] + ϰ σ / r
//! ```
//!
//! and then the temperature with
//!
//! ```text
//! (σ' − σ)/τ − D₂σ' = −r (u' − u)/τ
//! ```
//!
//! using the `u'` just computed. Both are tridiagonal and solved by sweep.

use serde::{Deserialize, Serialize};

use crate::config::{BoundaryCondition, RunConfig};
use crate::diagnostics::{find_zero_crossings, track_boundaries, BoundaryTrack, FieldHistory};
use crate::error::{Error, Result};
use crate::model::{FieldPair, TemperatureModelParams};
use crate::numerics::{sweep_solve, RadialMesh, TridiagonalSystem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub step_index: usize,
    pub time: f64,
    pub max_abs_u: f64,
    pub max_abs_sigma: f64,
    pub u_linear_system_dominant: bool,
    pub diverged: bool,
}

/// Assembles the order function system for one step.
pub fn order_function_system(
    u_k: &[f64],
    sigma_k: &[f64],
    cfg: &RunConfig,
    mesh: &RadialMesh,
) -> Result<TridiagonalSystem> {
    let n = mesh.n_nodes();
    check_len(u_k, n, "u")?;
    check_len(sigma_k, n, "sigma")?;
    let eps = cfg.epsilon;
    let h = mesh.h();
    let diff = eps / (h * h);
    let time = eps / cfg.tau;

    let mut lower = vec![0.0; n - 1];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n - 1];
    let mut rhs = vec![0.0; n];

    let inv_eps = 1.0 / eps;
    let eps_h = eps / h;
    let row = |i: usize| {
        let inv_r = 1.0 / mesh.node(i);
        let u = u_k[i];
        let u2 = u * u;
        let adv = eps_h * inv_r;
        let d = time + 2.0 * diff + (3.0 * u2 - 1.0) * inv_eps;
        let b = time * u + 2.0 * u2 * u * inv_eps + cfg.kappa * sigma_k[i] * inv_r;
        (-diff + adv, d, -diff - adv, b)
    };

    for i in 1..n - 1 {
        let (l, d, up, b) = row(i);
        lower[i - 1] = l;
        diag[i] = d;
        upper[i] = up;
        rhs[i] = b;
    }
    match cfg.bc_u {
        BoundaryCondition::Dirichlet => {
            // u keeps its initial endpoint values
            diag[0] = 1.0;
            upper[0] = 0.0;
            rhs[0] = u_k[0];
            diag[n - 1] = 1.0;
            lower[n - 2] = 0.0;
            rhs[n - 1] = u_k[n - 1];
        }
        BoundaryCondition::Neumann => {
            // mirror ghost node: u[-1] = u[1], u[n] = u[n-2]
            let (l, d, up, b) = row(0);
            diag[0] = d;
            upper[0] = l + up;
            rhs[0] = b;
            let (l, d, up, b) = row(n - 1);
            diag[n - 1] = d;
            lower[n - 2] = l + up;
            rhs[n - 1] = b;
        }
    }
    TridiagonalSystem::new(lower, diag, upper, rhs)
}

/// Advances `u` by one step; returns `u_{k+1}` and whether the system was
/// diagonally dominant.
pub fn step_order_function(
    u_k: &[f64],
    sigma_k: &[f64],
    cfg: &RunConfig,
    mesh: &RadialMesh,
) -> Result<(Vec<f64>, bool)> {
    let sys = order_function_system(u_k, sigma_k, cfg, mesh)?;
    let dominant = sys.is_dominant();
    Ok((sweep_solve(&sys)?, dominant))
}

/// Assembles the temperature system for one step. `boundary` holds the
/// Dirichlet values at the two ends.
pub fn temperature_system(
    sigma_k: &[f64],
    u_k: &[f64],
    u_k1: &[f64],
    cfg: &RunConfig,
    mesh: &RadialMesh,
    boundary: (f64, f64),
) -> Result<TridiagonalSystem> {
    let n = mesh.n_nodes();
    check_len(sigma_k, n, "sigma")?;
    check_len(u_k, n, "u_k")?;
    check_len(u_k1, n, "u_k1")?;
    let h = mesh.h();
    let diff = 1.0 / (h * h);
    let time = 1.0 / cfg.tau;

    let mut lower = vec![-diff; n - 1];
    let mut diag = vec![time + 2.0 * diff; n];
    let mut upper = vec![-diff; n - 1];
    let rhs_at = |i: usize| time * sigma_k[i] - mesh.node(i) * (u_k1[i] - u_k[i]) * time;
    let mut rhs: Vec<f64> = (0..n).map(rhs_at).collect();

    match cfg.bc_sigma {
        BoundaryCondition::Dirichlet => {
            diag[0] = 1.0;
            upper[0] = 0.0;
            rhs[0] = boundary.0;
            diag[n - 1] = 1.0;
            lower[n - 2] = 0.0;
            rhs[n - 1] = boundary.1;
        }
        BoundaryCondition::Neumann => {
            upper[0] = -2.0 * diff;
            lower[n - 2] = -2.0 * diff;
        }
    }
    TridiagonalSystem::new(lower, diag, upper, rhs)
}

/// Advances `σ` by one step given `u` before and after the step.
pub fn step_temperature(
    sigma_k: &[f64],
    u_k: &[f64],
    u_k1: &[f64],
    cfg: &RunConfig,
    mesh: &RadialMesh,
    boundary: (f64, f64),
) -> Result<Vec<f64>> {
    let sys = temperature_system(sigma_k, u_k, u_k1, cfg, mesh, boundary)?;
    sweep_solve(&sys)
}

fn check_len(v: &[f64], n: usize, what: &str) -> Result<()> {
    if v.len() == n {
        Ok(())
    } else {
        Err(Error::Shape(format!("{what} has {} entries, mesh has {n}", v.len())))
    }
}

/// Full fields at one requested time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    /// Requested time.
    pub requested: f64,
    pub fields: FieldPair,
}

/// Time series at one probe radius.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSeries {
    pub radius: f64,
    pub u: Vec<f64>,
    pub sigma: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    Diverged { step: usize, time: f64 },
    StepFailed { step: usize, time: f64, message: String },
}

/// Everything one run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub config: RunConfig,
    pub mesh: RadialMesh,
    pub initial_temperature: TemperatureModelParams,
    /// Time of every recorded level, starting at 0.
    pub times: Vec<f64>,
    /// Sorted zero crossings of `u` at every recorded level.
    pub crossings: Vec<Vec<f64>>,
    pub probes: Vec<ProbeSeries>,
    /// σ on the retention window at every recorded level.
    pub sigma_window: FieldHistory,
    pub snapshots: Vec<Snapshot>,
    pub steps: Vec<StepReport>,
    pub termination: Termination,
}

impl RunRecord {
    pub fn diverged(&self) -> bool {
        !matches!(self.termination, Termination::Completed)
    }

    /// Steps whose order function system lost diagonal dominance.
    pub fn dominance_lost_steps(&self) -> impl Iterator<Item = &StepReport> {
        self.steps.iter().filter(|s| !s.u_linear_system_dominant)
    }

    pub fn track(&self) -> BoundaryTrack {
        track_boundaries(&self.times, &self.crossings)
    }
}

/// Runs the split scheme from the initial data up to `t_end`, stopping
/// early on divergence.
pub fn run_simulation(cfg: &RunConfig) -> Result<RunRecord> {
    cfg.validate()?;
    if cfg.is_under_resolved() {
        log::warn!(
            "epsilon/h = {:.3} < 3: transition zone is under-resolved",
            cfg.epsilon / cfg.h
        );
    }
    let mesh = cfg.mesh()?;
    let initial_temperature = TemperatureModelParams::from_config(cfg)?;
    let mut fields = FieldPair::initial(cfg, &mesh)?;
    let n = mesh.n_nodes();
    let boundary = (fields.sigma[0], fields.sigma[n - 1]);
    let n_steps = cfg.n_steps();

    let window = mesh.index_range(cfg.retain_r_min, cfg.retain_r_max);
    let window_radii: Vec<f64> = window.clone().map(|i| mesh.node(i)).collect();
    let mut sigma_window = FieldHistory::with_capacity(window_radii, n_steps + 1);

    let mut probes: Vec<ProbeSeries> = cfg
        .probe_radii
        .iter()
        .map(|&radius| ProbeSeries {
            radius,
            u: Vec::with_capacity(n_steps + 1),
            sigma: Vec::with_capacity(n_steps + 1),
        })
        .collect();

    let mut snapshot_due: Vec<(f64, bool)> = cfg.snapshot_times.iter().map(|&t| (t, false)).collect();
    let mut snapshots = Vec::new();

    let mut times = Vec::with_capacity(n_steps + 1);
    let mut crossings = Vec::with_capacity(n_steps + 1);
    let mut steps = Vec::with_capacity(n_steps);

    let mut record_level = |fields: &FieldPair,
                            times: &mut Vec<f64>,
                            crossings: &mut Vec<Vec<f64>>,
                            sigma_window: &mut FieldHistory,
                            probes: &mut Vec<ProbeSeries>,
                            snapshots: &mut Vec<Snapshot>| {
        times.push(fields.time);
        crossings.push(find_zero_crossings(&fields.u, &mesh));
        sigma_window.push_row(fields.time, &fields.sigma[window.clone()]);
        for p in probes.iter_mut() {
            p.u.push(mesh.interpolate(&fields.u, p.radius));
            p.sigma.push(mesh.interpolate(&fields.sigma, p.radius));
        }
        for (t, done) in snapshot_due.iter_mut() {
            if !*done && fields.time >= *t - 0.5 * cfg.tau {
                *done = true;
                snapshots.push(Snapshot {
                    requested: *t,
                    fields: fields.clone(),
                });
            }
        }
    };

    record_level(&fields, &mut times, &mut crossings, &mut sigma_window, &mut probes, &mut snapshots);

    let mut termination = Termination::Completed;
    for step in 1..=n_steps {
        let time = step as f64 * cfg.tau;
        let advanced = step_order_function(&fields.u, &fields.sigma, cfg, &mesh).and_then(|(u_next, dominant)| {
            let sigma_next = step_temperature(&fields.sigma, &fields.u, &u_next, cfg, &mesh, boundary)?;
            Ok((u_next, sigma_next, dominant))
        });
        let (u_next, sigma_next, dominant) = match advanced {
            Ok(v) => v,
            Err(e) => {
                let err = Error::StepFailed {
                    step,
                    source: Box::new(e),
                };
                log::warn!("{err}");
                termination = Termination::StepFailed {
                    step,
                    time,
                    message: err.to_string(),
                };
                break;
            }
        };
        let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| if x.is_finite() { m.max(x.abs()) } else { f64::INFINITY });
        let max_abs_u = max_abs(&u_next);
        let max_abs_sigma = max_abs(&sigma_next);
        let diverged = !(max_abs_u <= cfg.divergence_threshold) || !max_abs_sigma.is_finite();
        steps.push(StepReport {
            step_index: step,
            time,
            max_abs_u,
            max_abs_sigma,
            u_linear_system_dominant: dominant,
            diverged,
        });
        if diverged {
            log::warn!("run diverged at step {step} (t = {time}, max|u| = {max_abs_u})");
            termination = Termination::Diverged { step, time };
            break;
        }
        fields = FieldPair {
            u: u_next,
            sigma: sigma_next,
            time,
        };
        record_level(&fields, &mut times, &mut crossings, &mut sigma_window, &mut probes, &mut snapshots);
    }

    let lost = steps.iter().filter(|s| !s.u_linear_system_dominant).count();
    if lost > 0 {
        log::warn!("order function system lost diagonal dominance on {lost} of {} steps", steps.len());
    }

    Ok(RunRecord {
        config: cfg.clone(),
        mesh,
        initial_temperature,
        times,
        crossings,
        probes,
        sigma_window,
        snapshots,
        steps,
        termination,
    })
}
