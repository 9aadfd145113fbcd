//! Right-hand sides of the equations of motion.
//!
//! Five formulations share the same geometry and force primitives:
//!
//! | formulation           | frame     | curvature |
//! |-----------------------|-----------|-----------|
//! | `Unified`             | NorthPole | any κ     |
//! | `CenteredExtrinsic`   | Centered  | κ ≠ 0     |
//! | `NorthPoleExtrinsic`  | NorthPole | κ ≠ 0     |
//! | `Intrinsic2D`         | Centered  | κ ≠ 0     |
//! | `Newtonian`           | NorthPole | κ = 0     |
//!
//! `Unified` is the production path. The others are kept as independent
//! cross-checks: on constraint-satisfying states they agree with it.

mod intrinsic;
mod state;

pub use intrinsic::{accel_intrinsic_2d, section_coordinates, state_from_section};
pub use state::{SystemState, STATE_CONSTRAINT_TOL};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{signed_dot, AmbientVec, Curvature, Frame};
use crate::potentials::{checked_pair, chordal_accel_terms, cotangent_gradient, MassList};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    Unified,
    CenteredExtrinsic,
    NorthPoleExtrinsic,
    #[serde(rename = "intrinsic_2d")]
    Intrinsic2D,
    Newtonian,
}

impl Formulation {
    pub const ALL: [Formulation; 5] = [
        Formulation::Unified,
        Formulation::CenteredExtrinsic,
        Formulation::NorthPoleExtrinsic,
        Formulation::Intrinsic2D,
        Formulation::Newtonian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Formulation::Unified => "unified",
            Formulation::CenteredExtrinsic => "centered_extrinsic",
            Formulation::NorthPoleExtrinsic => "north_pole_extrinsic",
            Formulation::Intrinsic2D => "intrinsic_2d",
            Formulation::Newtonian => "newtonian",
        }
    }

    /// Frame the formulation's state vectors are expressed in.
    pub fn frame(self) -> Frame {
        match self {
            Formulation::CenteredExtrinsic | Formulation::Intrinsic2D => Frame::Centered,
            Formulation::Unified | Formulation::NorthPoleExtrinsic | Formulation::Newtonian => {
                Frame::NorthPole
            }
        }
    }

    pub fn check_curvature(self, c: Curvature) -> Result<()> {
        let ok = match self {
            Formulation::Unified => true,
            Formulation::Newtonian => c.is_flat(),
            _ => !c.is_flat(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::FormulationInvalidAtKappa {
                formulation: self,
                kappa: c.kappa(),
            })
        }
    }
}

impl std::str::FromStr for Formulation {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        match norm.as_str() {
            "unified" => Ok(Formulation::Unified),
            "centered_extrinsic" | "centered" => Ok(Formulation::CenteredExtrinsic),
            "north_pole_extrinsic" | "northpole_extrinsic" | "north_pole" => {
                Ok(Formulation::NorthPoleExtrinsic)
            }
            "intrinsic2_d" | "intrinsic2d" | "intrinsic_2d" | "intrinsic" => {
                Ok(Formulation::Intrinsic2D)
            }
            "newtonian" => Ok(Formulation::Newtonian),
            _ => Err(format!("unknown formulation `{s}`")),
        }
    }
}

/// Unified equations in North-Pole coordinates, valid for every κ:
/// `r̈_i = Σ_j m_j [r_j − (1 − κr²/2) r_i + r² P/2] / [r³ (1 − κr²/4)^{3/2}]
///        − (ṙ_i·ṙ_i)(κ r_i + P)`, with `P = (0,0,0,σ|κ|^{1/2})`.
pub(crate) fn unified_rhs(
    masses: &MassList,
    c: Curvature,
    pos: &[AmbientVec],
    vel: &[AmbientVec],
) -> Result<Vec<AmbientVec>> {
    let mut acc = chordal_accel_terms(pos, masses, c, Frame::NorthPole)?;
    let pole = c.pole_vector();
    for ((a, r), v) in acc.iter_mut().zip(pos).zip(vel) {
        let speed2 = signed_dot(v, v, c);
        *a -= speed2 * (c.kappa() * *r + pole);
    }
    Ok(acc)
}

/// Centered extrinsic equations `q̈_i = ∇_i U / m_i − κ (q̇_i·q̇_i) q_i`.
pub(crate) fn centered_rhs(
    masses: &MassList,
    c: Curvature,
    pos: &[AmbientVec],
    vel: &[AmbientVec],
) -> Result<Vec<AmbientVec>> {
    let grad = cotangent_gradient(pos, masses, c)?;
    Ok(grad
        .iter()
        .zip(pos)
        .zip(vel)
        .enumerate()
        .map(|(i, ((g, q), v))| (1.0 / masses[i]) * *g - (c.kappa() * signed_dot(v, v, c)) * *q)
        .collect())
}

/// North-Pole extrinsic equations obtained by substituting `w = ω + |κ|^{-1/2}`
/// into the centered system, with
/// `C_ij = κ q̄^{ij} + |κ|^{1/2}(ω_i + ω_j) + 1` playing the role of `κ q^{ij}`.
pub(crate) fn northpole_extrinsic_rhs(
    masses: &MassList,
    c: Curvature,
    pos: &[AmbientVec],
    vel: &[AmbientVec],
) -> Result<Vec<AmbientVec>> {
    let radius = c.radius()?;
    let k = c.kappa();
    let s = c.sqrt_abs();
    let s3 = s * s * s;
    let n = pos.len();
    // the w row uses ω + |κ|^{-1/2}, i.e. the centered w-coordinate
    let lifted = |p: &AmbientVec| AmbientVec::new(p.x, p.y, p.z, p.w + radius);
    let mut acc = vec![AmbientVec::ZERO; n];
    for i in 0..n {
        for j in (i + 1)..n {
            checked_pair(&pos[i], &pos[j], i, j, c)?;
            let cij = k * signed_dot(&pos[i], &pos[j], c) + s * (pos[i].w + pos[j].w) + 1.0;
            let den = (1.0 - cij * cij).abs().powf(1.5);
            let coef = s3 / den;
            let (li, lj) = (lifted(&pos[i]), lifted(&pos[j]));
            acc[i] += (masses[j] * coef) * (lj - cij * li);
            acc[j] += (masses[i] * coef) * (li - cij * lj);
        }
    }
    for ((a, p), v) in acc.iter_mut().zip(pos).zip(vel) {
        let speed2 = signed_dot(v, v, c);
        *a -= (k * speed2) * lifted(p);
    }
    Ok(acc)
}

/// Newton's equations `r̈_i = Σ_j m_j (r_j − r_i) / r_ij³`.
pub(crate) fn newtonian_rhs(masses: &MassList, pos: &[AmbientVec]) -> Result<Vec<AmbientVec>> {
    let c = Curvature::flat();
    let n = pos.len();
    let mut acc = vec![AmbientVec::ZERO; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (r, margin) = checked_pair(&pos[i], &pos[j], i, j, c)?;
            let coef = 1.0 / (r * (r * r) * margin.powf(1.5));
            acc[i] += (masses[j] * coef) * (pos[j] - pos[i]);
            acc[j] += (masses[i] * coef) * (pos[i] - pos[j]);
        }
    }
    Ok(acc)
}

/// Dispatches to the extrinsic right-hand side of `form` on raw slices.
pub(crate) fn extrinsic_rhs(
    form: Formulation,
    masses: &MassList,
    c: Curvature,
    pos: &[AmbientVec],
    vel: &[AmbientVec],
) -> Result<Vec<AmbientVec>> {
    match form {
        Formulation::Unified => unified_rhs(masses, c, pos, vel),
        Formulation::CenteredExtrinsic => centered_rhs(masses, c, pos, vel),
        Formulation::NorthPoleExtrinsic => northpole_extrinsic_rhs(masses, c, pos, vel),
        Formulation::Newtonian => newtonian_rhs(masses, pos),
        Formulation::Intrinsic2D => Err(Error::InvalidState(
            "the intrinsic formulation works in conformal coordinates".into(),
        )),
    }
}

fn prepare(s: &SystemState, form: Formulation) -> Result<()> {
    form.check_curvature(s.curvature)?;
    s.require_frame(form.frame())
}

pub fn accel_unified(s: &SystemState) -> Result<Vec<AmbientVec>> {
    prepare(s, Formulation::Unified)?;
    unified_rhs(&s.masses, s.curvature, &s.positions, &s.velocities)
}

pub fn accel_centered(s: &SystemState) -> Result<Vec<AmbientVec>> {
    prepare(s, Formulation::CenteredExtrinsic)?;
    centered_rhs(&s.masses, s.curvature, &s.positions, &s.velocities)
}

pub fn accel_northpole_extrinsic(s: &SystemState) -> Result<Vec<AmbientVec>> {
    prepare(s, Formulation::NorthPoleExtrinsic)?;
    northpole_extrinsic_rhs(&s.masses, s.curvature, &s.positions, &s.velocities)
}

pub fn accel_newtonian(s: &SystemState) -> Result<Vec<AmbientVec>> {
    prepare(s, Formulation::Newtonian)?;
    if s.positions.iter().chain(&s.velocities).any(|p| p.w != 0.0) {
        return Err(Error::InvalidState(
            "flat states must have zero w-components".into(),
        ));
    }
    newtonian_rhs(&s.masses, &s.positions)
}

/// Acceleration of an extrinsic formulation, in that formulation's frame.
pub fn acceleration(form: Formulation, s: &SystemState) -> Result<Vec<AmbientVec>> {
    match form {
        Formulation::Unified => accel_unified(s),
        Formulation::CenteredExtrinsic => accel_centered(s),
        Formulation::NorthPoleExtrinsic => accel_northpole_extrinsic(s),
        Formulation::Newtonian => accel_newtonian(s),
        Formulation::Intrinsic2D => {
            prepare(s, form)?;
            let (zs, zdots) = section_coordinates(s)?;
            let zdd = accel_intrinsic_2d(&zs, &zdots, &s.masses, s.curvature)?;
            intrinsic::ambient_acceleration(&zs, &zdots, &zdd, s.curvature)
        }
    }
}
