//! Radial phase field simulator for the confluence of two free boundaries.
//!
//! The crate integrates the spherically symmetric phase field system
//!
//! ```text
//! σ_t − σ_rr = −r u_t
//! ε (u_t − u_rr − 2 u_r / r) = (u − u³)/ε + ϰ σ / r
//! ```
//!
//! on a shell `R1 ≤ r ≤ R2`, where `u` is the order function and `σ = r θ`
//! the transformed temperature. Both equations are advanced with implicit
//! Euler steps that reduce to tridiagonal systems. The diagnostics module
//! tracks the two free boundaries (zero crossings of `u`), measures the
//! temperature dip that forms where they meet and compares its amplitude
//! with the closed-form jump `−(r1 r1' − r2 r2')/2`.

pub mod analysis;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod model;
pub mod numerics;
pub mod output;
pub mod solver;
pub mod sweep;

pub use analysis::{JumpComparison, RunSummary};
pub use config::{BoundaryCondition, JumpOrientation, RunConfig};
pub use diagnostics::{
    analytic_jump, detect_dip, estimate_velocity, find_zero_crossings, track_boundaries,
    BoundaryTrack, DipOutcome, DipReport, VelocityFit,
};
pub use error::{Error, Result};
pub use model::{build_sigma0, build_u0, theta_from_sigma, FieldPair, TemperatureModelParams};
pub use numerics::{sweep_solve, RadialMesh, TridiagonalSystem};
pub use solver::{run_simulation, step_order_function, step_temperature, RunRecord, StepReport};
