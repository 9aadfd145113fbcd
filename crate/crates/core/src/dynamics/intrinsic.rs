//! Equations of motion for bodies confined to a 2D great section, written in
//! the complex conformal coordinate `z = u + iv` of the stereographic model.
//!
//! The section is the ambient hyperplane `z = 0` (ambient z-component, not
//! the complex coordinate), embedded through
//! [`section_point`](crate::geometry::section_point).

use num_complex::Complex64;

use super::SystemState;
use crate::error::{Error, Result};
use crate::geometry::{
    section_ambient, section_point, stereo_lift, stereo_lift_jet, stereo_project_jet, AmbientVec,
    Curvature, Frame,
};
use crate::potentials::{stereo_potential_dzbar, MassList};

const SECTION_TOL: f64 = 1e-10;

/// `m_i z̈_i = (κ|z_i|² + 1)²/2 · ∂W_κ/∂z̄_i + 2κ m_i z̄_i ż_i² / (κ|z_i|² + 1)`.
///
/// The velocity term is the geodesic term of the conformal metric
/// `4|dz|²/(1 + κ|z|²)²`.
pub fn accel_intrinsic_2d(
    zs: &[Complex64],
    zdots: &[Complex64],
    masses: &MassList,
    c: Curvature,
) -> Result<Vec<Complex64>> {
    if zdots.len() != zs.len() {
        return Err(Error::InvalidState("coordinate/velocity length mismatch".into()));
    }
    let grad = stereo_potential_dzbar(zs, masses, c)?;
    let k = c.kappa();
    Ok(zs
        .iter()
        .zip(zdots)
        .zip(&grad)
        .enumerate()
        .map(|(i, ((z, zd), g))| {
            let f = k * z.norm_sqr() + 1.0;
            0.5 * f * f * g / masses[i] + 2.0 * k * z.conj() * zd * zd / f
        })
        .collect())
}

/// Conformal coordinates and velocities of a centered-frame state whose
/// bodies all lie on the section (ambient z-components zero).
pub fn section_coordinates(s: &SystemState) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    s.require_frame(Frame::Centered)?;
    let c = s.curvature;
    let mut zs = Vec::with_capacity(s.len());
    let mut zdots = Vec::with_capacity(s.len());
    for (q, v) in s.positions.iter().zip(&s.velocities) {
        let scale = 1.0 + q.euclidean_norm() + v.euclidean_norm();
        if q.z.abs() > SECTION_TOL * scale || v.z.abs() > SECTION_TOL * scale {
            return Err(Error::InvalidState(
                "intrinsic formulation needs all bodies on the z = 0 section".into(),
            ));
        }
        let p = section_point(q, c);
        let pd = section_point(v, c);
        let (z, zd, _) = stereo_project_jet(p, pd, [0.0; 3], c)?;
        zs.push(z);
        zdots.push(zd);
    }
    Ok((zs, zdots))
}

/// Centered-frame state built by lifting conformal coordinates back to the
/// section of the 3-manifold.
pub fn state_from_section(
    zs: &[Complex64],
    zdots: &[Complex64],
    masses: &MassList,
    c: Curvature,
    time: f64,
) -> Result<SystemState> {
    let mut positions = Vec::with_capacity(zs.len());
    let mut velocities = Vec::with_capacity(zs.len());
    for (z, zd) in zs.iter().zip(zdots) {
        let (p, pd) = stereo_lift_jet(*z, *zd, c)?;
        positions.push(section_ambient(p, c));
        velocities.push(section_ambient(pd, c));
    }
    SystemState::new_unchecked(
        masses.clone(),
        positions,
        velocities,
        time,
        c,
        Frame::Centered,
    )
}

/// Ambient acceleration of the lifted motion given `(z, ż, z̈)`.
pub(crate) fn ambient_acceleration(
    zs: &[Complex64],
    zdots: &[Complex64],
    zdds: &[Complex64],
    c: Curvature,
) -> Result<Vec<AmbientVec>> {
    let k = c.kappa();
    let zeta_scale = c.sigma() / c.sqrt_abs();
    zs.iter()
        .zip(zdots)
        .zip(zdds)
        .map(|((z, zd), zdd)| {
            stereo_lift(z.re, z.im, c)?;
            let rho2_d = 2.0 * (z.conj() * zd).re;
            let rho2_dd = 2.0 * (z.conj() * zdd).re + 2.0 * zd.norm_sqr();
            let den = 1.0 + k * z.norm_sqr();
            let den_d = k * rho2_d;
            let den_dd = k * rho2_dd;
            let comp = |u: f64, ud: f64, udd: f64| {
                2.0 * udd / den - 4.0 * ud * den_d / (den * den) - 2.0 * u * den_dd / (den * den)
                    + 4.0 * u * den_d * den_d / (den * den * den)
            };
            let xdd = comp(z.re, zd.re, zdd.re);
            let ydd = comp(z.im, zd.im, zdd.im);
            let zeta_dd = zeta_scale
                * (2.0 * den_dd / (den * den) - 4.0 * den_d * den_d / (den * den * den));
            Ok(section_ambient([xdd, ydd, zeta_dd], c))
        })
        .collect()
}
