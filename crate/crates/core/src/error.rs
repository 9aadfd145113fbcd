use thiserror::Error;

use crate::dynamics::Formulation;
use crate::geometry::Frame;

/// Which singular configuration a pair of bodies is approaching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SingularKind {
    CollisionNear,
    AntipodalNear,
}

impl std::fmt::Display for SingularKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SingularKind::CollisionNear => f.write_str("CollisionNear"),
            SingularKind::AntipodalNear => f.write_str("AntipodalNear"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("negative squared separation {value:e}: points are off the hyperboloid")]
    NegativeSeparationSquare { value: f64 },
    #[error("inverse-trig argument {value} outside its domain beyond tolerance: points are off the manifold")]
    OffManifold { value: f64 },
    #[error("frame shift is undefined at zero curvature")]
    ZeroCurvatureShift,
    #[error("operation requires nonzero curvature")]
    ZeroCurvature,
    #[error("point maps to the projection pole")]
    AtProjectionPole,
    #[error("point lies on or outside the Poincare disk of radius {radius}")]
    OutsideDisk { radius: f64 },
    #[error("conformal metric is singular at this point")]
    SingularMetric,
    #[error("singular configuration between bodies {i} and {j}")]
    SingularConfiguration { i: usize, j: usize },
    #[error("collision between bodies {i} and {j} (separation {separation:e})")]
    Collision { i: usize, j: usize, separation: f64 },
    #[error("bodies {i} and {j} are antipodal")]
    AntipodalSingularity { i: usize, j: usize },
    #[error("state is in the {found:?} frame but {expected:?} is required")]
    FrameMismatch { expected: Frame, found: Frame },
    #[error("formulation {formulation:?} is not valid at kappa = {kappa}")]
    FormulationInvalidAtKappa { formulation: Formulation, kappa: f64 },
    #[error("invalid masses: {0}")]
    InvalidMasses(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("constraint residual {residual:e} for body {body} exceeds tolerance")]
    ConstraintViolation { body: usize, residual: f64 },
    #[error("flat_positions[{body}]: lift out of range, kappa*rho^2 = {value} >= 1")]
    LiftOutOfRange { body: usize, value: f64 },
    #[error("{field}: {message}")]
    InvalidScenario { field: String, message: String },
    #[error("scenario parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("singularity reached ({kind}) at t = {time}")]
    SingularityReached { kind: SingularKind, time: f64 },
    #[error("adaptive step {step:e} underflowed at t = {time}")]
    StepUnderflow { step: f64, time: f64 },
    #[error("maximum number of steps ({0}) exceeded")]
    MaxStepsExceeded(usize),
    #[error("non-finite value encountered at t = {time}")]
    NonFinite { time: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
