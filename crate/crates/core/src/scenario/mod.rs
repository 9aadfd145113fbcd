//! Scenario files, the flat-to-curved lift, and scenario-level runs.
//!
//! A scenario is a strict JSON document (unknown keys are rejected):
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "name": "two_body_flat",
//!   "masses": [1.0, 1.0],
//!   "flat_positions": [[-0.5, 0, 0], [0.5, 0, 0]],
//!   "flat_velocities": [[0, -0.7071067811865476, 0], [0, 0.7071067811865476, 0]],
//!   "kappa": 0.0,
//!   "formulation": "unified",
//!   "integrator": { "scheme": "adaptive_rk45", "rel_tol": 1e-10 },
//!   "t_end": 10.0,
//!   "sample_dt": 0.1
//! }
//! ```
//!
//! `formulation` and `integrator` are optional; omitted integrator keys take
//! their defaults.

mod output;
mod sweep;

pub use output::{write_trajectory, OutputFormat, TrajectoryRecord};
pub use sweep::{
    compare_formulations, curvature_sweep, flat_distance, write_sweep_summary, Comparison,
    SweepReport, SweepRow, MOMENTUM_TOL,
};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{Formulation, SystemState};
use crate::error::{Error, Result};
use crate::geometry::{AmbientVec, Curvature, Frame};
use crate::integrators::{integrate, IntegratorConfig, Trajectory};
use crate::potentials::MassList;

pub const FORMAT_VERSION: u32 = 1;

fn default_formulation() -> Formulation {
    Formulation::Unified
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub format_version: u32,
    pub name: String,
    pub masses: Vec<f64>,
    pub flat_positions: Vec<[f64; 3]>,
    pub flat_velocities: Vec<[f64; 3]>,
    pub kappa: f64,
    #[serde(default = "default_formulation")]
    pub formulation: Formulation,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    pub t_end: f64,
    pub sample_dt: f64,
}

fn field_err(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::InvalidScenario {
        field: field.into(),
        message: message.into(),
    }
}

impl Scenario {
    /// Parses and validates a scenario document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let sc: Scenario = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Canonical pretty-printed form; parsing it back gives the same scenario.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(field_err(
                "format_version",
                format!("unsupported version {} (expected {FORMAT_VERSION})", self.format_version),
            ));
        }
        let n = self.masses.len();
        if n == 0 {
            return Err(field_err("masses", "at least one body is required"));
        }
        for (i, m) in self.masses.iter().enumerate() {
            if !(m.is_finite() && *m > 0.0) {
                return Err(field_err(format!("masses[{i}]"), "must be positive and finite"));
            }
        }
        for (name, list) in [
            ("flat_positions", &self.flat_positions),
            ("flat_velocities", &self.flat_velocities),
        ] {
            if list.len() != n {
                return Err(field_err(name, format!("has {} entries, masses has {n}", list.len())));
            }
            for (i, v) in list.iter().enumerate() {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(field_err(format!("{name}[{i}]"), "must be finite"));
                }
            }
        }
        if !self.kappa.is_finite() {
            return Err(field_err("kappa", "must be finite"));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(field_err("t_end", "must be positive"));
        }
        if !(self.sample_dt > 0.0 && self.sample_dt <= self.t_end) {
            return Err(field_err("sample_dt", "must lie in (0, t_end]"));
        }
        self.integrator
            .validate()
            .map_err(|e| field_err("integrator", e.to_string()))?;
        self.formulation
            .check_curvature(Curvature::new(self.kappa))
            .map_err(|e| field_err("formulation", e.to_string()))?;
        if self.formulation == Formulation::Intrinsic2D
            && self
                .flat_positions
                .iter()
                .chain(&self.flat_velocities)
                .any(|v| v[2] != 0.0)
        {
            return Err(field_err(
                "formulation",
                "intrinsic_2d needs planar data (all z components zero)",
            ));
        }
        self.initial_state_at(self.kappa)?;
        Ok(())
    }

    /// Lifted initial state at curvature κ, in the North-Pole frame.
    pub fn initial_state_at(&self, kappa: f64) -> Result<SystemState> {
        let c = Curvature::new(kappa);
        let masses = MassList::new(self.masses.clone()).map_err(|e| field_err("masses", e.to_string()))?;
        let mut positions = Vec::with_capacity(self.masses.len());
        let mut velocities = Vec::with_capacity(self.masses.len());
        for (i, (p, v)) in self.flat_positions.iter().zip(&self.flat_velocities).enumerate() {
            let (lp, lv) = lift_to_curvature(*p, *v, c).map_err(|e| match e {
                Error::LiftOutOfRange { value, .. } => Error::LiftOutOfRange { body: i, value },
                other => other,
            })?;
            positions.push(lp);
            velocities.push(lv);
        }
        SystemState::new(masses, positions, velocities, 0.0, c, Frame::NorthPole)
    }

    /// Initial state in the frame `form` integrates in.
    pub fn initial_state_for(&self, kappa: f64, form: Formulation) -> Result<SystemState> {
        self.initial_state_at(kappa)?.to_frame(form.frame())
    }
}

/// Vertical lift of flat data: keeps `(x, y, z)` and solves the two
/// constraints for `ω` and `ω̇`, taking the root that vanishes at κ = 0.
pub fn lift_to_curvature(
    flat_pos: [f64; 3],
    flat_vel: [f64; 3],
    c: Curvature,
) -> Result<(AmbientVec, AmbientVec)> {
    if c.is_flat() {
        return Ok((AmbientVec::from_xyz(flat_pos, 0.0), AmbientVec::from_xyz(flat_vel, 0.0)));
    }
    let rho2: f64 = flat_pos.iter().map(|x| x * x).sum();
    let krho2 = c.kappa() * rho2;
    if krho2 >= 1.0 {
        return Err(Error::LiftOutOfRange { body: 0, value: krho2 });
    }
    let sa = c.sqrt_abs();
    let omega = -c.sigma() * sa * rho2 / (1.0 + (1.0 - krho2).sqrt());
    let radial: f64 = flat_pos.iter().zip(&flat_vel).map(|(x, v)| x * v).sum();
    let omega_dot = -c.sigma() * sa * radial / (1.0 + sa * omega);
    Ok((AmbientVec::from_xyz(flat_pos, omega), AmbientVec::from_xyz(flat_vel, omega_dot)))
}

/// Lifts the scenario at its own κ and integrates it.
pub fn run_scenario(sc: &Scenario) -> Result<Trajectory> {
    run_at(sc, sc.kappa, sc.formulation)
}

pub(crate) fn run_at(sc: &Scenario, kappa: f64, form: Formulation) -> Result<Trajectory> {
    let s0 = sc.initial_state_for(kappa, form)?;
    integrate(&s0, form, &sc.integrator, sc.t_end, sc.sample_dt)
}
