//! Uniform radial mesh and the tridiagonal sweep solver.

mod mesh;
mod tridiag;

pub use mesh::RadialMesh;
pub use tridiag::{sweep_solve, TridiagonalSystem, PIVOT_FLOOR};
