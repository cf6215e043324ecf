//! Finite element solver for a time-dependent Maxwell–Schrödinger system
//! under the temporal gauge with a divergence penalty term.
//!
//! Space is discretized with H¹-conforming Lagrange elements (degree 1 or 2)
//! on a structured tetrahedral mesh of the unit cube; time stepping uses a
//! decoupled Crank–Nicolson scheme that solves the Maxwell and Schrödinger
//! updates alternately. The discrete scheme conserves the wave-function mass
//! exactly and the discrete energy whenever the Maxwell source vanishes.

pub mod assembly;
pub mod config;
pub mod elements;
pub mod linalg;
pub mod mesh;
pub mod mms;
pub mod norms;
pub mod output;
pub mod presets;
pub mod space;
pub mod stepper;

pub use config::SimulationConfig;
pub use mesh::{build_unit_cube_mesh, Mesh};
