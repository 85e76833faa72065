//! Field containers and initial data.
//!
//! The initial order function is the two-kink profile
//! `u0 = 1 + tanh((r1 − r)/ε) + tanh((r − r2)/ε)`. The initial temperature
//! is piecewise: parabolic between the boundaries, affine outside. Its
//! values at the boundaries follow the Gibbs–Thomson law
//! `σ/r = ±(r' + 2/r)` and the kinks of the affine pieces follow the
//! Stefan law `[σ_r] = ±2 r r'`, so the data is fixed by the two boundary
//! radii, their two velocities and one curvature coefficient.

use serde::{Deserialize, Serialize};

use crate::config::{JumpOrientation, RunConfig};
use crate::error::{Error, Result};
use crate::numerics::RadialMesh;

/// `u` and `σ` on the mesh at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub u: Vec<f64>,
    pub sigma: Vec<f64>,
    pub time: f64,
}

impl FieldPair {
    pub fn initial(cfg: &RunConfig, mesh: &RadialMesh) -> Result<Self> {
        let params = TemperatureModelParams::from_config(cfg)?;
        Ok(Self {
            u: build_u0(mesh, cfg.r1_0, cfg.r2_0, cfg.epsilon)?,
            sigma: build_sigma0(mesh, &params),
            time: 0.0,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.sigma).all(|v| v.is_finite())
    }
}

/// `u0(r) = 1 + tanh((r1_0 − r)/ε) + tanh((r − r2_0)/ε)` at every node.
pub fn build_u0(mesh: &RadialMesh, r1_0: f64, r2_0: f64, epsilon: f64) -> Result<Vec<f64>> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidConfig(format!("epsilon must be positive, got {epsilon}")));
    }
    check_boundaries(mesh, r1_0, r2_0)?;
    Ok(mesh
        .nodes()
        .map(|r| 1.0 + ((r1_0 - r) / epsilon).tanh() + ((r - r2_0) / epsilon).tanh())
        .collect())
}

fn check_boundaries(mesh: &RadialMesh, r1: f64, r2: f64) -> Result<()> {
    if mesh.r_inner() < r1 && r1 < r2 && r2 < mesh.r_outer() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "boundaries must satisfy {} < r1 < r2 < {}, got r1 = {r1}, r2 = {r2}",
            mesh.r_inner(),
            mesh.r_outer()
        )))
    }
}

/// Piecewise initial temperature.
///
/// ```text
/// r < r1:        s1 + slope1 (r − r1)
/// r1 ≤ r ≤ r2:   s1 (r2 − r)/L + s2 (r − r1)/L + A (r1 − r)(r − r2)/L
/// r > r2:        s2 + slope2 (r − r2)
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperatureModelParams {
    pub r1: f64,
    pub r2: f64,
    /// σ at `r1` and `r2`.
    pub s1: f64,
    pub s2: f64,
    /// Curvature coefficient `A` of the interior parabola.
    pub dip_depth: f64,
    /// Slope of the affine piece left of `r1` (the outer slope coefficient
    /// of the model temperature is its negative).
    pub gamma1_plus: f64,
    /// Slope of the affine piece right of `r2`.
    pub gamma2_plus: f64,
}

impl TemperatureModelParams {
    /// Builds the profile from boundary radii and velocities.
    ///
    /// `dip_depth = None` uses `A = s1 + s2`.
    pub fn new(
        r1: f64,
        r2: f64,
        v1: f64,
        v2: f64,
        dip_depth: Option<f64>,
        orientation: JumpOrientation,
    ) -> Self {
        let s1 = gibbs_thomson_sigma(1, r1, v1);
        let s2 = gibbs_thomson_sigma(2, r2, v2);
        let len = r2 - r1;
        let a = dip_depth.unwrap_or(s1 + s2);
        // interior slopes at the two ends of the parabola
        let inner1 = (s2 - s1) / len + a;
        let inner2 = (s2 - s1) / len - a;
        // Stefan kinks: right − left = +2 r1 v1 at r1, −2 r2 v2 at r2
        let sign = orientation.sign();
        let gamma1_plus = inner1 - sign * stefan_jump(1, r1, v1);
        let gamma2_plus = inner2 + sign * stefan_jump(2, r2, v2);
        Self {
            r1,
            r2,
            s1,
            s2,
            dip_depth: a,
            gamma1_plus,
            gamma2_plus,
        }
    }

    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        let mesh = cfg.mesh()?;
        check_boundaries(&mesh, cfg.r1_0, cfg.r2_0)?;
        Ok(Self::new(
            cfg.r1_0,
            cfg.r2_0,
            cfg.v1_0,
            cfg.v2_0,
            cfg.dip_depth,
            cfg.stefan_jump_orientation,
        ))
    }

    pub fn evaluate(&self, r: f64) -> f64 {
        let Self { r1, r2, s1, s2, .. } = *self;
        if r < r1 {
            s1 + self.gamma1_plus * (r - r1)
        } else if r > r2 {
            s2 + self.gamma2_plus * (r - r2)
        } else {
            let len = r2 - r1;
            s1 * (r2 - r) / len + s2 * (r - r1) / len + self.dip_depth * (r1 - r) * (r - r2) / len
        }
    }
}

/// `σ = r θ` on boundary `i` from `θ = (−1)^(i+1) (v + 2/r)`.
pub fn gibbs_thomson_sigma(i: u8, r: f64, v: f64) -> f64 {
    let s = r * v + 2.0;
    if i == 1 {
        s
    } else {
        -s
    }
}

/// `(−1)^(i+1) 2 r v`.
pub fn stefan_jump(i: u8, r: f64, v: f64) -> f64 {
    let j = 2.0 * r * v;
    if i == 1 {
        j
    } else {
        -j
    }
}

/// Evaluates the piecewise profile at every node.
pub fn build_sigma0(mesh: &RadialMesh, params: &TemperatureModelParams) -> Vec<f64> {
    mesh.nodes().map(|r| params.evaluate(r)).collect()
}

/// `θ = σ / r` nodewise.
pub fn theta_from_sigma(sigma: &[f64], mesh: &RadialMesh) -> Result<Vec<f64>> {
    if sigma.len() != mesh.n_nodes() {
        return Err(Error::Shape(format!(
            "{} values on a {}-node mesh",
            sigma.len(),
            mesh.n_nodes()
        )));
    }
    if mesh.r_inner() <= 0.0 {
        return Err(Error::InvalidMesh("θ = σ/r needs all nodes at r > 0".into()));
    }
    Ok(sigma.iter().zip(mesh.nodes()).map(|(s, r)| s / r).collect())
}
