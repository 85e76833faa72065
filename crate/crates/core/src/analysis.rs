//! Post-run summary: boundary track, dip, velocity fits and the jump
//! comparison, computed from a finished [`RunRecord`].

use serde::{Deserialize, Serialize};

use crate::diagnostics::{analytic_jump, detect_dip, estimate_velocity, BoundaryTrack, DipOutcome, DipReport, VelocityFit};
use crate::solver::{RunRecord, Termination};

/// Closed-form jump against the measured dip amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpComparison {
    /// Boundary radii at the end of the fit window.
    pub r1: f64,
    pub r2: f64,
    pub v1: f64,
    pub v2: f64,
    /// `|analytic_jump(r1, v1, r2, v2)|`.
    pub sigma_an: f64,
    /// Measured dip amplitude.
    pub sigma_cal: f64,
}

impl JumpComparison {
    pub fn gap(&self) -> f64 {
        (self.sigma_an - self.sigma_cal).abs()
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub epsilon: f64,
    pub track: BoundaryTrack,
    pub dip: Option<DipReport>,
    pub fits: Option<(VelocityFit, VelocityFit)>,
    pub jump: Option<JumpComparison>,
    pub termination: Termination,
    pub steps_completed: usize,
    pub dominance_lost_steps: usize,
    /// Dominance losses from the start of the dip search window on.
    pub dominance_lost_near_confluence: usize,
    pub under_resolved: bool,
}

impl RunSummary {
    pub fn diverged(&self) -> bool {
        !matches!(self.termination, Termination::Completed)
    }
}

impl RunRecord {
    /// Start of the time window searched for the dip.
    fn dip_search_from(&self, track: &BoundaryTrack) -> f64 {
        let end = self.times.last().copied().unwrap_or(0.0);
        let reference = track.confluence_time.unwrap_or(end);
        self.config.dip_search_start * reference
    }

    /// Dip over the retention window, from `dip_search_start · t*` on.
    pub fn dip(&self) -> DipOutcome {
        let track = self.track();
        self.dip_with_track(&track)
    }

    fn dip_with_track(&self, track: &BoundaryTrack) -> DipOutcome {
        let cfg = &self.config;
        let end = self.times.last().copied().unwrap_or(0.0);
        detect_dip(
            &self.sigma_window,
            (cfg.retain_r_min, cfg.retain_r_max),
            (self.dip_search_from(track), end),
            cfg.onset_factor,
        )
    }

    pub fn summarize(&self) -> RunSummary {
        let cfg = &self.config;
        let track = self.track();
        let dip = self.dip_with_track(&track).report().copied();
        let fits = track.confluence_time.and_then(|ts| {
            let window = (cfg.fit_window_start * ts, cfg.fit_window_end * ts);
            let f1 = estimate_velocity(&track.r1_series(), window).ok()?;
            let f2 = estimate_velocity(&track.r2_series(), window).ok()?;
            Some((f1, f2, window.1))
        });
        let jump = match (fits, dip) {
            (Some((f1, f2, t_end)), Some(d)) => track.last_pair_before(t_end).map(|(_, r1, r2)| JumpComparison {
                r1,
                r2,
                v1: f1.slope,
                v2: f2.slope,
                sigma_an: analytic_jump(r1, f1.slope, r2, f2.slope).abs(),
                sigma_cal: d.amplitude,
            }),
            _ => None,
        };
        let from = self.dip_search_from(&track);
        RunSummary {
            epsilon: cfg.epsilon,
            dip,
            fits: fits.map(|(a, b, _)| (a, b)),
            jump,
            termination: self.termination.clone(),
            steps_completed: self.times.len().saturating_sub(1),
            dominance_lost_steps: self.dominance_lost_steps().count(),
            dominance_lost_near_confluence: self.dominance_lost_steps().filter(|s| s.time >= from).count(),
            under_resolved: cfg.is_under_resolved(),
            track,
        }
    }
}
