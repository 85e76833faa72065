//! Free boundary tracking and temperature dip measurement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::RadialMesh;

/// A scalar field sampled on fixed radii at a sequence of times,
/// stored row by row (one row per time).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FieldHistory {
    radii: Vec<f64>,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl FieldHistory {
    pub fn new(radii: Vec<f64>) -> Self {
        Self::with_capacity(radii, 0)
    }

    pub fn with_capacity(radii: Vec<f64>, rows: usize) -> Self {
        let cap = radii.len() * rows;
        Self {
            radii,
            times: Vec::with_capacity(rows),
            values: Vec::with_capacity(cap),
        }
    }

    /// Builds a history by evaluating `f(r, t)` on a grid.
    pub fn from_fn(radii: Vec<f64>, times: &[f64], f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = Self::with_capacity(radii, times.len());
        for &t in times {
            let row: Vec<f64> = out.radii.iter().map(|&r| f(r, t)).collect();
            out.push_row(t, &row);
        }
        out
    }

    pub fn push_row(&mut self, time: f64, row: &[f64]) {
        assert_eq!(row.len(), self.radii.len(), "row length must match radii");
        self.times.push(time);
        self.values.extend_from_slice(row);
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let m = self.radii.len();
        &self.values[k * m..(k + 1) * m]
    }

    pub fn value(&self, k: usize, j: usize) -> f64 {
        self.values[k * self.radii.len() + j]
    }

    /// Time series at radius index `j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.times.len()).map(|k| self.value(k, j)).collect()
    }

    /// Same history with every value shifted by `c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            radii: self.radii.clone(),
            times: self.times.clone(),
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }
}

/// Zero crossings of `u`, linearly interpolated between nodes, ascending.
pub fn find_zero_crossings(u: &[f64], mesh: &RadialMesh) -> Vec<f64> {
    debug_assert_eq!(u.len(), mesh.n_nodes());
    let h = mesh.h();
    let mut out: Vec<f64> = Vec::new();
    let mut push = |r: f64| {
        if out.last().is_none_or(|&last| r > last) {
            out.push(r);
        }
    };
    for (i, w) in u.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        if a == 0.0 {
            push(mesh.node(i));
        } else if a * b < 0.0 {
            push(mesh.node(i) + h * a / (a - b));
        }
    }
    if u.last() == Some(&0.0) {
        push(mesh.node(u.len() - 1));
    }
    out
}

/// Trajectories of the inner and outer free boundary.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundaryTrack {
    pub times: Vec<f64>,
    pub r1: Vec<Option<f64>>,
    pub r2: Vec<Option<f64>>,
    /// First recorded time with fewer than two crossings.
    pub confluence_time: Option<f64>,
    /// Midpoint `(r1 + r2)/2` at the last level before confluence.
    pub confluence_radius: Option<f64>,
    /// Levels with more than two crossings (outermost pair kept).
    pub spurious_levels: usize,
}

impl BoundaryTrack {
    pub fn r1_series(&self) -> Vec<(f64, f64)> {
        series(&self.times, &self.r1)
    }

    pub fn r2_series(&self) -> Vec<(f64, f64)> {
        series(&self.times, &self.r2)
    }

    /// Last recorded `(t, r1, r2)` with both boundaries present and `t ≤ t_max`.
    pub fn last_pair_before(&self, t_max: f64) -> Option<(f64, f64, f64)> {
        self.times
            .iter()
            .zip(self.r1.iter().zip(&self.r2))
            .filter(|(t, _)| **t <= t_max)
            .rev()
            .filter_map(|(&t, (a, b))| Some((t, (*a)?, (*b)?)))
            .next()
    }
}

fn series(times: &[f64], r: &[Option<f64>]) -> Vec<(f64, f64)> {
    times
        .iter()
        .zip(r)
        .filter_map(|(&t, r)| r.map(|r| (t, r)))
        .collect()
}

/// Pairs the crossings at each level into `(r1, r2)` until the count first
/// drops below two.
pub fn track_boundaries(times: &[f64], crossings: &[Vec<f64>]) -> BoundaryTrack {
    assert_eq!(times.len(), crossings.len());
    let mut track = BoundaryTrack {
        times: times.to_vec(),
        r1: Vec::with_capacity(times.len()),
        r2: Vec::with_capacity(times.len()),
        ..Default::default()
    };
    let mut last_mid = None;
    for (&t, c) in times.iter().zip(crossings) {
        if track.confluence_time.is_some() {
            track.r1.push(None);
            track.r2.push(None);
            continue;
        }
        if c.len() < 2 {
            track.confluence_time = Some(t);
            track.confluence_radius = last_mid;
            track.r1.push(None);
            track.r2.push(None);
            continue;
        }
        if c.len() > 2 {
            track.spurious_levels += 1;
        }
        let (a, b) = (c[0], c[c.len() - 1]);
        last_mid = Some(0.5 * (a + b));
        track.r1.push(Some(a));
        track.r2.push(Some(b));
    }
    if track.spurious_levels > 0 {
        log::warn!(
            "{} levels had more than two zero crossings; kept the outermost pair",
            track.spurious_levels
        );
    }
    track
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the fit residuals.
    pub rms: f64,
    pub samples: usize,
}

/// Least squares line through the `(t, r)` samples with `t` in `window`.
pub fn estimate_velocity(samples: &[(f64, f64)], window: (f64, f64)) -> Result<VelocityFit> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .collect();
    let n = pts.len();
    if n < 3 {
        return Err(Error::TooFewSamples(n));
    }
    let nf = n as f64;
    let t_mean = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let r_mean = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut stt, mut str_) = (0.0, 0.0);
    for &(t, r) in &pts {
        stt += (t - t_mean) * (t - t_mean);
        str_ += (t - t_mean) * (r - r_mean);
    }
    if stt == 0.0 {
        return Err(Error::TooFewSamples(1));
    }
    let slope = str_ / stt;
    let intercept = r_mean - slope * t_mean;
    let rms = (pts
        .iter()
        .map(|&(t, r)| {
            let e = r - (r_mean + slope * (t - t_mean));
            e * e
        })
        .sum::<f64>()
        / nf)
        .sqrt();
    Ok(VelocityFit {
        slope,
        intercept,
        rms,
        samples: n,
    })
}

/// Limiting temperature jump at the contact point, `−(r1 v1 − r2 v2)/2`.
pub fn analytic_jump(r1: f64, v1: f64, r2: f64, v2: f64) -> f64 {
    -(2.0 * r1 * v1 - 2.0 * r2 * v2) / 4.0
}

/// Location and size of the temperature dip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipReport {
    pub r_min: f64,
    pub t_min: f64,
    pub sigma_min: f64,
    /// `σ(r_min, onset_time) − σ_min`.
    pub amplitude: f64,
    pub onset_time: f64,
    /// Full width of the dip in time at half amplitude, when the signal
    /// recovers above half amplitude inside the window.
    pub width: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DipOutcome {
    Found(DipReport),
    /// The minimum sits on the edge of the time window: the signal is
    /// monotone there.
    NoDip,
}

impl DipOutcome {
    pub fn report(&self) -> Option<&DipReport> {
        match self {
            Self::Found(r) => Some(r),
            Self::NoDip => None,
        }
    }
}

/// Finds the minimum of `σ` over the samples inside both windows and
/// measures the amplitude of the drop that leads to it.
///
/// The onset is the start of the last episode before `t_min` in which σ at
/// `r_min` falls faster than `onset_factor × median |Δσ/Δt|`, the median
/// taken over the first half of the samples between the start of the
/// window and `t_min`.
pub fn detect_dip(
    history: &FieldHistory,
    r_window: (f64, f64),
    t_window: (f64, f64),
    onset_factor: f64,
) -> DipOutcome {
    let cols: Vec<usize> = (0..history.radii().len())
        .filter(|&j| (r_window.0..=r_window.1).contains(&history.radii()[j]))
        .collect();
    let rows: Vec<usize> = (0..history.times().len())
        .filter(|&k| (t_window.0..=t_window.1).contains(&history.times()[k]))
        .collect();
    if cols.is_empty() || rows.len() < 3 {
        return DipOutcome::NoDip;
    }

    // earliest t, then smallest r on ties
    let mut best: Option<(usize, usize, f64)> = None;
    for &k in &rows {
        for &j in &cols {
            let v = history.value(k, j);
            if best.is_none_or(|(_, _, b)| v < b) {
                best = Some((k, j, v));
            }
        }
    }
    let (k_min, j_min, sigma_min) = best.expect("non-empty windows");
    let first = rows[0];
    let last = *rows.last().expect("non-empty");
    if k_min == first || k_min == last {
        return DipOutcome::NoDip;
    }

    let times = history.times();
    // rate of decrease, positive while σ falls
    let drop_rate = |k: usize| {
        let dt = times[k] - times[k - 1];
        (history.value(k - 1, j_min) - history.value(k, j_min)) / dt
    };
    let baseline_end = first + (k_min - first) / 2;
    let mut rates: Vec<f64> = (first + 1..=baseline_end.max(first + 1))
        .map(|k| drop_rate(k).abs())
        .collect();
    rates.sort_by(f64::total_cmp);
    let median = rates[rates.len() / 2];
    let threshold = onset_factor * median;

    // last fast-dropping sample before the minimum, then back to the start
    // of that fast episode
    let mut k_onset = first;
    if let Some(k_fast) = (first + 1..=k_min).rev().find(|&k| drop_rate(k) > threshold) {
        k_onset = (first + 1..=k_fast)
            .rev()
            .find(|&k| drop_rate(k) <= threshold)
            .unwrap_or(first);
    }
    let k_onset = k_onset.min(k_min - 1);
    let sigma_onset = history.value(k_onset, j_min);
    let amplitude = (sigma_onset - sigma_min).abs();
    if !(sigma_onset > sigma_min) {
        return DipOutcome::NoDip;
    }

    let width = half_width(history, j_min, k_min, &rows, sigma_min + 0.5 * amplitude);

    DipOutcome::Found(DipReport {
        r_min: history.radii()[j_min],
        t_min: times[k_min],
        sigma_min,
        amplitude,
        onset_time: times[k_onset],
        width,
    })
}

fn half_width(history: &FieldHistory, j: usize, k_min: usize, rows: &[usize], level: f64) -> Option<f64> {
    let t = history.times();
    let v = |k: usize| history.value(k, j);
    let cross = |a: usize, b: usize| {
        let (va, vb) = (v(a), v(b));
        t[a] + (t[b] - t[a]) * (level - va) / (vb - va)
    };
    let first = rows[0];
    let last = *rows.last()?;
    let left = (first..k_min).rev().find(|&k| v(k) >= level).map(|k| cross(k, k + 1))?;
    let right = (k_min + 1..=last).find(|&k| v(k) >= level).map(|k| cross(k - 1, k))?;
    Some(right - left)
}
