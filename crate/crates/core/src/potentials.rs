//! Force functions of the curved N-body problem and their gradients.
//!
//! Three equivalent forms are provided:
//!
//! * the cotangent form `U_κ`, written with the ambient inner products of
//!   centered-frame positions;
//! * the chordal form `V_κ`, which only depends on the chordal separations
//!   `r_ij` and therefore makes sense for every κ, including κ = 0;
//! * the stereographic form `W_κ` for the 2D problem in the conformal model.
//!
//! Pairs are always visited in lexicographic `(i < j)` order and each pair
//! term is added to both bodies, so results are bit-reproducible for a fixed
//! body ordering.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{pair_separation, signed_dot, stereo_lift, AmbientVec, Curvature, Frame};

/// Pairs closer than this chordal separation are collisions.
pub const COLLISION_RADIUS: f64 = 1e-8;
/// For κ > 0, pairs with `1 − κ r²/4` below this are antipodal.
pub const ANTIPODAL_MARGIN: f64 = 1e-12;

/// Strictly positive body masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MassList(Vec<f64>);

impl MassList {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidMasses("no bodies".into()));
        }
        if let Some((i, m)) = masses
            .iter()
            .enumerate()
            .find(|(_, m)| !(m.is_finite() && **m > 0.0))
        {
            return Err(Error::InvalidMasses(format!(
                "mass {i} is {m}; masses must be positive and finite"
            )));
        }
        Ok(Self(masses))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl std::ops::Index<usize> for MassList {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for MassList {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        MassList::new(v)
    }
}

impl From<MassList> for Vec<f64> {
    fn from(m: MassList) -> Vec<f64> {
        m.0
    }
}

/// Per-pair quantities of the chordal force function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTerms {
    pub i: usize,
    pub j: usize,
    /// Chordal separation r_ij.
    pub separation: f64,
    /// Ambient inner product q_i · q_j (frame dependent).
    pub dot: f64,
    /// This pair's share of `V_κ`.
    pub contribution: f64,
}

/// Chordal separation of a pair after checking both singularities.
/// Returns `(r, 1 − κ r²/4)`.
pub(crate) fn checked_pair(
    a: &AmbientVec,
    b: &AmbientVec,
    i: usize,
    j: usize,
    c: Curvature,
) -> Result<(f64, f64)> {
    let r = pair_separation(a, b, c)?;
    if r < COLLISION_RADIUS {
        return Err(Error::Collision { i, j, separation: r });
    }
    let margin = 1.0 - 0.25 * c.kappa() * r * r;
    if c.kappa() > 0.0 && margin < ANTIPODAL_MARGIN {
        return Err(Error::AntipodalSingularity { i, j });
    }
    Ok((r, margin))
}

fn check_lengths(states: &[AmbientVec], masses: &MassList) -> Result<()> {
    if states.len() != masses.len() {
        return Err(Error::InvalidState(format!(
            "{} positions for {} masses",
            states.len(),
            masses.len()
        )));
    }
    Ok(())
}

fn map_singular(e: Error) -> Error {
    match e {
        Error::Collision { i, j, .. } | Error::AntipodalSingularity { i, j } => {
            Error::SingularConfiguration { i, j }
        }
        other => other,
    }
}

/// Cotangent force function written with ambient inner products:
/// `Σ m_i m_j |κ|^{1/2} κq^{ij} / |(κq_i²)(κq_j²) − (κq^{ij})²|^{1/2}`.
///
/// Positions are centered-frame points of the curvature-κ manifold.
pub fn cotangent_potential(states: &[AmbientVec], masses: &MassList, c: Curvature) -> Result<f64> {
    if c.is_flat() {
        return Err(Error::ZeroCurvature);
    }
    check_lengths(states, masses)?;
    let k = c.kappa();
    let mut total = 0.0;
    for i in 0..states.len() {
        let kqi = k * signed_dot(&states[i], &states[i], c);
        for j in (i + 1)..states.len() {
            checked_pair(&states[i], &states[j], i, j, c).map_err(map_singular)?;
            let kqj = k * signed_dot(&states[j], &states[j], c);
            let kqij = k * signed_dot(&states[i], &states[j], c);
            let den = (kqi * kqj - kqij * kqij).abs().sqrt();
            total += masses[i] * masses[j] * c.sqrt_abs() * kqij / den;
        }
    }
    Ok(total)
}

/// Per-pair terms of the chordal force function, in `(i < j)` order.
pub fn chordal_pair_terms(
    states: &[AmbientVec],
    masses: &MassList,
    c: Curvature,
    frame: Frame,
) -> Result<Vec<PairTerms>> {
    frame.check_valid(c)?;
    check_lengths(states, masses)?;
    let k = c.kappa();
    let n = states.len();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let (r, margin) = checked_pair(&states[i], &states[j], i, j, c)?;
            let contribution = masses[i] * masses[j] * (1.0 - 0.5 * k * r * r) / (r * margin.sqrt());
            out.push(PairTerms {
                i,
                j,
                separation: r,
                dot: signed_dot(&states[i], &states[j], c),
                contribution,
            });
        }
    }
    Ok(out)
}

/// Chordal force function
/// `V_κ = Σ m_i m_j (1 − κr_ij²/2) / [r_ij (1 − κr_ij²/4)^{1/2}]`,
/// valid in either frame since it only depends on the separations.
/// At κ = 0 it is exactly the Newtonian `Σ m_i m_j / r_ij`.
pub fn chordal_potential(
    states: &[AmbientVec],
    masses: &MassList,
    c: Curvature,
    frame: Frame,
) -> Result<f64> {
    Ok(chordal_pair_terms(states, masses, c, frame)?
        .iter()
        .map(|p| p.contribution)
        .sum())
}

/// Gravitational part of the chordal equations of motion, per body:
/// `Σ_{j≠i} m_j [x_j − (1 − κr²/2) x_i (+ r² P/2)] / [r³ (1 − κr²/4)^{3/2}]`
/// where `P = (0,0,0,σ|κ|^{1/2})` enters only in the North-Pole frame.
pub fn chordal_accel_terms(
    states: &[AmbientVec],
    masses: &MassList,
    c: Curvature,
    frame: Frame,
) -> Result<Vec<AmbientVec>> {
    frame.check_valid(c)?;
    check_lengths(states, masses)?;
    let k = c.kappa();
    let pole = match frame {
        Frame::NorthPole => c.pole_vector(),
        Frame::Centered => AmbientVec::ZERO,
    };
    let n = states.len();
    let mut acc = vec![AmbientVec::ZERO; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (r, margin) = checked_pair(&states[i], &states[j], i, j, c)?;
            let r2 = r * r;
            let coef = 1.0 / (r * r2 * margin.powf(1.5));
            let shrink = 1.0 - 0.5 * k * r2;
            let lift = (0.5 * r2) * pole;
            let toward_j = states[j] - shrink * states[i] + lift;
            let toward_i = states[i] - shrink * states[j] + lift;
            acc[i] += (masses[j] * coef) * toward_j;
            acc[j] += (masses[i] * coef) * toward_i;
        }
    }
    Ok(acc)
}

/// Gradient of the cotangent force function on the manifold:
/// `∇_i U = Σ_{j≠i} m_i m_j |κ|^{3/2} [q_j − (κq^{ij}) q_i] / |1 − (κq^{ij})²|^{3/2}`.
///
/// Each row is tangent to the manifold at `q_i` (`q_i · ∇_i U = 0`).
pub fn cotangent_gradient(
    states: &[AmbientVec],
    masses: &MassList,
    c: Curvature,
) -> Result<Vec<AmbientVec>> {
    if c.is_flat() {
        return Err(Error::ZeroCurvature);
    }
    check_lengths(states, masses)?;
    let k = c.kappa();
    let s3 = c.sqrt_abs().powi(3);
    let n = states.len();
    let mut grad = vec![AmbientVec::ZERO; n];
    for i in 0..n {
        for j in (i + 1)..n {
            checked_pair(&states[i], &states[j], i, j, c)?;
            let kqij = k * signed_dot(&states[i], &states[j], c);
            let den = (1.0 - kqij * kqij).abs().powf(1.5);
            let coef = masses[i] * masses[j] * s3 / den;
            grad[i] += coef * (states[j] - kqij * states[i]);
            grad[j] += coef * (states[i] - kqij * states[j]);
        }
    }
    Ok(grad)
}

fn check_in_disk(zs: &[Complex64], c: Curvature) -> Result<()> {
    if c.kappa() < 0.0 {
        let lim = 1.0 / c.kappa().abs();
        if zs.iter().any(|z| z.norm_sqr() >= lim) {
            return Err(Error::OutsideDisk {
                radius: lim.sqrt(),
            });
        }
    }
    Ok(())
}

/// Checks every pair for singularities by lifting to the 2D manifold.
fn check_stereo_pairs(zs: &[Complex64], c: Curvature) -> Result<()> {
    let lifted = zs
        .iter()
        .map(|z| stereo_lift(z.re, z.im, c).map(|p| AmbientVec::new(p[0], p[1], 0.0, p[2])))
        .collect::<Result<Vec<_>>>()?;
    for i in 0..lifted.len() {
        for j in (i + 1)..lifted.len() {
            checked_pair(&lifted[i], &lifted[j], i, j, c).map_err(map_singular)?;
        }
    }
    Ok(())
}

/// Pair coefficients `(B_ij, A_ij)` of the stereographic force function.
fn stereo_ab(zi: Complex64, zj: Complex64, inv_k: f64) -> (f64, f64) {
    let ni = zi.norm_sqr();
    let nj = zj.norm_sqr();
    let cross = 2.0 * (zi * zj.conj()).re;
    let b = 2.0 * inv_k * cross + (ni - inv_k) * (nj - inv_k);
    let a = (ni + inv_k) * (nj + inv_k);
    (b, a)
}

/// Stereographic force function
/// `W_κ = Σ |κ|^{1/2} m_i m_j B_ij / |A_ij² − B_ij²|^{1/2}`
/// for bodies on the 2D manifold given by conformal coordinates `z = u + iv`.
pub fn stereo_potential(zs: &[Complex64], masses: &MassList, c: Curvature) -> Result<f64> {
    if c.is_flat() {
        return Err(Error::ZeroCurvature);
    }
    if zs.len() != masses.len() {
        return Err(Error::InvalidState("coordinate/mass length mismatch".into()));
    }
    check_in_disk(zs, c)?;
    check_stereo_pairs(zs, c)?;
    let inv_k = 1.0 / c.kappa();
    let mut total = 0.0;
    for i in 0..zs.len() {
        for j in (i + 1)..zs.len() {
            let (b, a) = stereo_ab(zs[i], zs[j], inv_k);
            total += c.sqrt_abs() * masses[i] * masses[j] * b / (a * a - b * b).abs().sqrt();
        }
    }
    Ok(total)
}

/// Wirtinger derivatives `∂W_κ/∂z̄_i`, with `∂/∂z̄ = (∂_u + i∂_v)/2`.
///
/// Differentiating a pair term gives
/// `|κ|^{1/2} m_i m_j σ A (A ∂B − B ∂A) / [σ(A² − B²)]^{3/2}`, and
/// `A ∂B − B ∂A` factors as `2κ⁻² (|z_j|² + κ⁻¹)(z_j − z_i)(κ z_i z̄_j + 1)`.
pub fn stereo_potential_dzbar(
    zs: &[Complex64],
    masses: &MassList,
    c: Curvature,
) -> Result<Vec<Complex64>> {
    if c.is_flat() {
        return Err(Error::ZeroCurvature);
    }
    if zs.len() != masses.len() {
        return Err(Error::InvalidState("coordinate/mass length mismatch".into()));
    }
    check_in_disk(zs, c)?;
    check_stereo_pairs(zs, c)?;
    let k = c.kappa();
    let inv_k = 1.0 / k;
    let sigma = c.sigma();
    let n = zs.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (b, a) = stereo_ab(zs[i], zs[j], inv_k);
            let d = sigma * (a * a - b * b);
            let scale = c.sqrt_abs() * masses[i] * masses[j] * sigma * a / d.powf(1.5);
            let common = 2.0 * inv_k * inv_k;
            let ei = common
                * (zs[j].norm_sqr() + inv_k)
                * (zs[j] - zs[i])
                * (k * zs[i] * zs[j].conj() + 1.0);
            let ej = common
                * (zs[i].norm_sqr() + inv_k)
                * (zs[i] - zs[j])
                * (k * zs[j] * zs[i].conj() + 1.0);
            out[i] += scale * ei;
            out[j] += scale * ej;
        }
    }
    Ok(out)
}
