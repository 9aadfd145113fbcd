//! N-body dynamics in spaces of constant curvature κ: the 3-sphere (κ > 0),
//! Euclidean space (κ = 0) and the hyperbolic 3-space (κ < 0), embedded in
//! a 4-dimensional Euclidean or Minkowski ambient space.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: curvature, ambient vectors, frames, distances, stereographic charts.
//! - [`potentials`]: the cotangent, chordal and stereographic force functions.
//! - [`dynamics`]: equations of motion in five formulations.
//! - [`integrators`]: RK4 / Dormand–Prince stepping with constraint projection.
//! - [`conserved`]: energy, angular and hybrid momenta, integral audits.
//! - [`scenario`]: scenario files, the flat-to-curved lift, sweeps and output.

pub mod conserved;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod integrators;
pub mod potentials;
pub mod scenario;

pub use dynamics::{Formulation, SystemState};
pub use error::{Error, Result, SingularKind};
pub use geometry::{AmbientVec, Curvature, Frame};
pub use potentials::MassList;
