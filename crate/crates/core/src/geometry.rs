//! Signature-aware linear algebra on the ambient space ℝ⁴ / ℝ^{3,1}.
//!
//! Points of the curvature-κ 3-manifold live in a four-component ambient
//! space. For κ ≥ 0 the inner product is Euclidean; for κ < 0 it is the
//! Lorentz form with the fourth component carrying the minus sign. Two
//! coordinate frames are used throughout the crate:
//!
//! * [`Frame::Centered`]: origin at the centre of the sphere/hyperboloid,
//!   constraint `κ q·q = 1`. Undefined for κ = 0.
//! * [`Frame::NorthPole`]: origin shifted to `(0, 0, 0, |κ|^{-1/2})`,
//!   constraint `κ r·r + 2|κ|^{1/2} ω = 0`. Valid for every κ.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance beyond which inverse trig/hyperbolic arguments are
/// treated as off-manifold data instead of round-off.
pub const CLAMP_TOL: f64 = 1e-9;

/// Gaussian curvature κ together with its sign and `|κ|^{1/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curvature {
    kappa: f64,
    sigma: f64,
    sqrt_abs: f64,
}

impl Curvature {
    pub fn new(kappa: f64) -> Self {
        assert!(kappa.is_finite(), "curvature must be finite");
        let sigma = if kappa >= 0.0 { 1.0 } else { -1.0 };
        Self {
            kappa,
            sigma,
            sqrt_abs: kappa.abs().sqrt(),
        }
    }

    pub fn flat() -> Self {
        Self::new(0.0)
    }

    #[inline]
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// +1 for κ ≥ 0, −1 for κ < 0.
    #[inline]
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    #[inline]
    pub fn sqrt_abs(&self) -> f64 {
        self.sqrt_abs
    }

    #[inline]
    pub fn is_flat(&self) -> bool {
        self.kappa == 0.0
    }

    /// Radius scale `|κ|^{-1/2}`, the distance from the centre to the North Pole.
    pub fn radius(&self) -> Result<f64> {
        if self.is_flat() {
            Err(Error::ZeroCurvature)
        } else {
            Ok(1.0 / self.sqrt_abs)
        }
    }

    /// The fixed vector `(0, 0, 0, σ|κ|^{1/2})` of the unified equations.
    #[inline]
    pub fn pole_vector(&self) -> AmbientVec {
        AmbientVec::new(0.0, 0.0, 0.0, self.sigma * self.sqrt_abs)
    }
}

/// A vector of the four-dimensional ambient space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AmbientVec {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub w: f64,
}

impl AmbientVec {
    pub const ZERO: AmbientVec = AmbientVec {
        x: 0.0,
        y: 0.0,
        z: 0.0,
        w: 0.0,
    };

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64, w: f64) -> Self {
        Self { x, y, z, w }
    }

    pub fn from_xyz(xyz: [f64; 3], w: f64) -> Self {
        Self::new(xyz[0], xyz[1], xyz[2], w)
    }

    #[inline]
    pub fn xyz(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn to_array(&self) -> [f64; 4] {
        [self.x, self.y, self.z, self.w]
    }

    #[inline]
    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    /// Dot product of the x, y, z block only.
    #[inline]
    pub fn dot3(&self, other: &AmbientVec) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Euclidean (+,+,+,+) norm, independent of curvature.
    pub fn euclidean_norm(&self) -> f64 {
        (self.dot3(self) + self.w * self.w).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs()).max(self.w.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite() && self.w.is_finite()
    }
}

impl Add for AmbientVec {
    type Output = AmbientVec;
    #[inline]
    fn add(self, o: AmbientVec) -> AmbientVec {
        AmbientVec::new(self.x + o.x, self.y + o.y, self.z + o.z, self.w + o.w)
    }
}

impl Sub for AmbientVec {
    type Output = AmbientVec;
    #[inline]
    fn sub(self, o: AmbientVec) -> AmbientVec {
        AmbientVec::new(self.x - o.x, self.y - o.y, self.z - o.z, self.w - o.w)
    }
}

impl Mul<AmbientVec> for f64 {
    type Output = AmbientVec;
    #[inline]
    fn mul(self, v: AmbientVec) -> AmbientVec {
        AmbientVec::new(self * v.x, self * v.y, self * v.z, self * v.w)
    }
}

impl Neg for AmbientVec {
    type Output = AmbientVec;
    #[inline]
    fn neg(self) -> AmbientVec {
        AmbientVec::new(-self.x, -self.y, -self.z, -self.w)
    }
}

impl AddAssign for AmbientVec {
    #[inline]
    fn add_assign(&mut self, o: AmbientVec) {
        *self = *self + o;
    }
}

impl SubAssign for AmbientVec {
    #[inline]
    fn sub_assign(&mut self, o: AmbientVec) {
        *self = *self - o;
    }
}

/// Coordinate frame of extrinsic state vectors. Always carried explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Centered,
    NorthPole,
}

impl Frame {
    pub fn check_valid(self, c: Curvature) -> Result<()> {
        if self == Frame::Centered && c.is_flat() {
            Err(Error::ZeroCurvature)
        } else {
            Ok(())
        }
    }
}

/// `a.x b.x + a.y b.y + a.z b.z + σ a.w b.w`.
#[inline]
pub fn signed_dot(a: &AmbientVec, b: &AmbientVec, c: Curvature) -> f64 {
    a.x * b.x + a.y * b.y + a.z * b.z + c.sigma() * a.w * b.w
}

/// Chordal separation r_ij in the ambient space.
///
/// κ > 0: Euclidean norm in ℝ⁴. κ = 0: Euclidean norm of the xyz block.
/// κ < 0: Minkowski pseudo-norm, whose radicand is non-negative for points
/// of the same hyperboloid sheet.
pub fn pair_separation(a: &AmbientVec, b: &AmbientVec, c: Curvature) -> Result<f64> {
    let d = *a - *b;
    let spatial = d.dot3(&d);
    if c.kappa() > 0.0 {
        Ok((spatial + d.w * d.w).sqrt())
    } else if c.is_flat() {
        Ok(spatial.sqrt())
    } else {
        let sq = spatial - d.w * d.w;
        if sq >= 0.0 {
            Ok(sq.sqrt())
        } else if -sq <= CLAMP_TOL * (spatial + d.w * d.w) {
            Ok(0.0)
        } else {
            Err(Error::NegativeSeparationSquare { value: sq })
        }
    }
}

/// Geodesic (arc) distance between two centered-frame points, or the
/// Euclidean distance when κ = 0.
///
/// The cos⁻¹/cosh⁻¹ argument `κ a·b` is checked against its domain with
/// relative tolerance [`CLAMP_TOL`]. Close to the diagonal the equivalent
/// half-chord form `2|κ|^{-1/2} asin(h)(sinh⁻¹(h))` with `h = |κ|^{1/2} r / 2`
/// is used because cos⁻¹ loses half the digits there.
pub fn geodesic_distance(a: &AmbientVec, b: &AmbientVec, c: Curvature) -> Result<f64> {
    if c.is_flat() {
        return pair_separation(a, b, c);
    }
    let k = c.kappa();
    let arg = k * signed_dot(a, b, c);
    let scale = c.sqrt_abs();
    if k > 0.0 {
        if arg.abs() > 1.0 + CLAMP_TOL {
            return Err(Error::OffManifold { value: arg });
        }
        let arg = arg.clamp(-1.0, 1.0);
        if arg > 0.5 {
            let half_chord = 0.5 * scale * pair_separation(a, b, c)?;
            Ok(2.0 * half_chord.min(1.0).asin() / scale)
        } else {
            Ok(arg.acos() / scale)
        }
    } else {
        if arg < 1.0 - CLAMP_TOL {
            return Err(Error::OffManifold { value: arg });
        }
        let arg = arg.max(1.0);
        if arg < 2.0 {
            let half_chord = 0.5 * scale * pair_separation(a, b, c)?;
            Ok(2.0 * half_chord.asinh() / scale)
        } else {
            Ok(arg.acosh() / scale)
        }
    }
}

/// North-Pole frame constraint residuals `(κ r² + 2|κ|^{1/2} ω, σ|κ|^{1/2} r·ṙ + ω̇)`.
///
/// Both vanish on the manifold and its tangent bundle, and identically at
/// κ = 0 when ω = ω̇ = 0. The second residual equals `κ q·q̇ / |κ|^{1/2}`
/// in centered coordinates.
pub fn constraint_residuals_northpole(
    pos: &AmbientVec,
    vel: &AmbientVec,
    c: Curvature,
) -> (f64, f64) {
    let s = c.sqrt_abs();
    let r1 = c.kappa() * signed_dot(pos, pos, c) + 2.0 * s * pos.w;
    let r2 = c.sigma() * s * signed_dot(pos, vel, c) + vel.w;
    (r1, r2)
}

/// Centered frame constraint residuals expressed on the same scale as
/// [`constraint_residuals_northpole`]: `(κ q² − 1, σ|κ|^{1/2} q·q̇)`.
pub fn constraint_residuals_centered(
    pos: &AmbientVec,
    vel: &AmbientVec,
    c: Curvature,
) -> Result<(f64, f64)> {
    if c.is_flat() {
        return Err(Error::ZeroCurvature);
    }
    let r1 = c.kappa() * signed_dot(pos, pos, c) - 1.0;
    let r2 = c.sigma() * c.sqrt_abs() * signed_dot(pos, vel, c);
    Ok((r1, r2))
}

/// Centered → North-Pole: `ω = w − |κ|^{-1/2}`.
pub fn frame_shift(pos_centered: &AmbientVec, c: Curvature) -> Result<AmbientVec> {
    if c.is_flat() {
        return Err(Error::ZeroCurvatureShift);
    }
    let mut p = *pos_centered;
    p.w -= 1.0 / c.sqrt_abs();
    Ok(p)
}

/// North-Pole → Centered: `w = ω + |κ|^{-1/2}`.
pub fn frame_unshift(pos_northpole: &AmbientVec, c: Curvature) -> Result<AmbientVec> {
    if c.is_flat() {
        return Err(Error::ZeroCurvatureShift);
    }
    let mut p = *pos_northpole;
    p.w += 1.0 / c.sqrt_abs();
    Ok(p)
}

const POLE_TOL: f64 = 1e-12;

fn require_curved(c: Curvature) -> Result<()> {
    if c.is_flat() {
        Err(Error::ZeroCurvature)
    } else {
        Ok(())
    }
}

/// Stereographic projection of a point `(𝔵, 𝔶, 𝔷)` of the 2D manifold
/// `𝔵² + 𝔶² + σ𝔷² = κ⁻¹` onto the plane `𝔷 = 0`.
pub fn stereo_project(p: [f64; 3], c: Curvature) -> Result<(f64, f64)> {
    require_curved(c)?;
    let den = 1.0 - c.sigma() * c.sqrt_abs() * p[2];
    if den.abs() < POLE_TOL {
        return Err(Error::AtProjectionPole);
    }
    Ok((p[0] / den, p[1] / den))
}

/// Inverse stereographic projection from the conformal plane/disk.
pub fn stereo_lift(u: f64, v: f64, c: Curvature) -> Result<[f64; 3]> {
    require_curved(c)?;
    let k = c.kappa();
    let rho2 = u * u + v * v;
    let den = 1.0 + k * rho2;
    if k < 0.0 && den <= POLE_TOL {
        return Err(Error::OutsideDisk {
            radius: 1.0 / c.sqrt_abs(),
        });
    }
    let s = c.sqrt_abs();
    let zeta = (k * rho2 - 1.0) / (s * s * s * rho2 + c.sigma() * s);
    Ok([2.0 * u / den, 2.0 * v / den, zeta])
}

/// Conformal factor `4 / [1 + κ(u² + v²)]²` of the stereographic model.
pub fn conformal_factor(u: f64, v: f64, c: Curvature) -> Result<f64> {
    let den = 1.0 + c.kappa() * (u * u + v * v);
    if den.abs() < POLE_TOL {
        return Err(Error::SingularMetric);
    }
    Ok(4.0 / (den * den))
}

/// Second-order jet of the stereographic projection: maps a point with
/// velocity and acceleration on the 2D manifold to `(z, ż, z̈)` in the
/// complex conformal coordinate `z = u + iv`.
pub fn stereo_project_jet(
    p: [f64; 3],
    pdot: [f64; 3],
    pddot: [f64; 3],
    c: Curvature,
) -> Result<(Complex64, Complex64, Complex64)> {
    require_curved(c)?;
    let s = c.sigma() * c.sqrt_abs();
    let den = 1.0 - s * p[2];
    if den.abs() < POLE_TOL {
        return Err(Error::AtProjectionPole);
    }
    let d1 = -s * pdot[2];
    let d2 = -s * pddot[2];
    let inv = 1.0 / den;
    let comp = |x: f64, xd: f64, xdd: f64| {
        let val = x * inv;
        let vel = xd * inv - x * d1 * inv * inv;
        let acc = xdd * inv - 2.0 * xd * d1 * inv * inv - x * d2 * inv * inv
            + 2.0 * x * d1 * d1 * inv * inv * inv;
        (val, vel, acc)
    };
    let (u, ud, udd) = comp(p[0], pdot[0], pddot[0]);
    let (v, vd, vdd) = comp(p[1], pdot[1], pddot[1]);
    Ok((
        Complex64::new(u, v),
        Complex64::new(ud, vd),
        Complex64::new(udd, vdd),
    ))
}

/// First-order jet of the inverse projection: `(z, ż) ↦ (p, ṗ)`.
pub fn stereo_lift_jet(z: Complex64, zdot: Complex64, c: Curvature) -> Result<([f64; 3], [f64; 3])> {
    let p = stereo_lift(z.re, z.im, c)?;
    let k = c.kappa();
    let den = 1.0 + k * z.norm_sqr();
    let drho2 = 2.0 * (z.re * zdot.re + z.im * zdot.im);
    let dx = 2.0 * zdot.re / den - 2.0 * z.re * k * drho2 / (den * den);
    let dy = 2.0 * zdot.im / den - 2.0 * z.im * k * drho2 / (den * den);
    let dzeta = 2.0 * c.sqrt_abs() * drho2 / (den * den);
    Ok((p, [dx, dy, dzeta]))
}

/// Embedding of the 2D section used by the intrinsic formulation: the
/// ambient point `(x, y, 0, w)` corresponds to `p = (x, y, −σw)`, which puts
/// the North Pole at the centre `z = 0` of the conformal model for both
/// signs of κ.
pub fn section_point(q: &AmbientVec, c: Curvature) -> [f64; 3] {
    [q.x, q.y, -c.sigma() * q.w]
}

/// Inverse of [`section_point`].
pub fn section_ambient(p: [f64; 3], c: Curvature) -> AmbientVec {
    AmbientVec::new(p[0], p[1], 0.0, -c.sigma() * p[2])
}
