//! First integrals: energy, the six wedge (angular) momenta, the North-Pole
//! hybrid momenta, and the flat-only linear momentum and centre-of-mass
//! integrals.

use serde::{Deserialize, Serialize};

use crate::dynamics::SystemState;
use crate::error::{Error, Result};
use crate::geometry::{signed_dot, Frame};
use crate::potentials::chordal_potential;

/// `H = T − V`. In the North-Pole frame the kinetic term carries the
/// prefactor `κr² + 2|κ|^{1/2}ω + 1`; in the centered frame it carries `κq²`.
/// Both prefactors equal 1 on the constraint set.
pub fn energy(s: &SystemState) -> Result<f64> {
    let c = s.curvature;
    let kinetic: f64 = s
        .positions
        .iter()
        .zip(&s.velocities)
        .enumerate()
        .map(|(i, (p, v))| {
            let pre = match s.frame {
                Frame::NorthPole => c.kappa() * signed_dot(p, p, c) + 2.0 * c.sqrt_abs() * p.w + 1.0,
                Frame::Centered => c.kappa() * signed_dot(p, p, c),
            };
            0.5 * s.masses[i] * pre * signed_dot(v, v, c)
        })
        .sum();
    Ok(kinetic - chordal_potential(&s.positions, &s.masses, c, s.frame)?)
}

/// `(c_wx, c_wy, c_wz, c_xy, c_xz, c_yz)` with `c_ab = Σ m_i (a_i ḃ_i − ȧ_i b_i)`.
pub fn wedge_momenta(s: &SystemState) -> Result<[f64; 6]> {
    if !s.curvature.is_flat() {
        s.require_frame(Frame::Centered)?;
    }
    let mut c = [0.0; 6];
    for (i, (q, v)) in s.positions.iter().zip(&s.velocities).enumerate() {
        let m = s.masses[i];
        let (q, v) = (q.to_array(), v.to_array());
        let (x, y, z, w) = (0, 1, 2, 3);
        for (slot, (a, b)) in [(w, x), (w, y), (w, z), (x, y), (x, z), (y, z)]
            .into_iter()
            .enumerate()
        {
            c[slot] += m * (q[a] * v[b] - v[a] * q[b]);
        }
    }
    Ok(c)
}

/// `Σ m_i ẋ_i + |κ|^{1/2} Σ m_i (ω_i ẋ_i − ω̇_i x_i)` and its y, z analogues.
pub fn hybrid_momenta(s: &SystemState) -> Result<[f64; 3]> {
    s.require_frame(Frame::NorthPole)?;
    let sa = s.curvature.sqrt_abs();
    let mut out = [0.0; 3];
    for (i, (p, v)) in s.positions.iter().zip(&s.velocities).enumerate() {
        let m = s.masses[i];
        let (pa, va) = (p.xyz(), v.xyz());
        for k in 0..3 {
            out[k] += m * va[k];
        }
        if sa != 0.0 {
            for k in 0..3 {
                out[k] += sa * (m * (p.w * va[k] - v.w * pa[k]));
            }
        }
    }
    Ok(out)
}

/// Linear momentum `a = Σ m_i ṙ_i` and centre-of-mass offset `Σ m_i r_i − a t`
/// on the xyz block. Conserved only at κ = 0.
pub fn flat_only_integrals(s: &SystemState) -> ([f64; 3], [f64; 3]) {
    let mut a = [0.0; 3];
    let mut com = [0.0; 3];
    for (i, (p, v)) in s.positions.iter().zip(&s.velocities).enumerate() {
        let m = s.masses[i];
        let (pa, va) = (p.xyz(), v.xyz());
        for k in 0..3 {
            a[k] += m * va[k];
            com[k] += m * pa[k];
        }
    }
    let b = [0, 1, 2].map(|k| com[k] - a[k] * s.time);
    (a, b)
}

/// All integrals of one state, evaluated in the frames they are defined in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservedReport {
    pub energy: f64,
    pub wedge: [f64; 6],
    pub hybrid_momentum: [f64; 3],
    pub linear_momentum: [f64; 3],
    pub center_of_mass: [f64; 3],
    /// Whether linear momentum and centre of mass are first integrals (κ = 0).
    pub flat_integrals_conserved: bool,
}

impl ConservedReport {
    pub fn evaluate(s: &SystemState) -> Result<Self> {
        let (centered, northpole) = if s.curvature.is_flat() {
            (s.clone(), s.clone())
        } else {
            (s.to_frame(Frame::Centered)?, s.to_frame(Frame::NorthPole)?)
        };
        let (linear_momentum, center_of_mass) = flat_only_integrals(s);
        Ok(Self {
            energy: energy(s)?,
            wedge: wedge_momenta(&centered)?,
            hybrid_momentum: hybrid_momenta(&northpole)?,
            linear_momentum,
            center_of_mass,
            flat_integrals_conserved: s.curvature.is_flat(),
        })
    }
}

/// Largest deviation of each integral from its initial value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DriftSummary {
    /// Relative to `|H(0)|` (absolute when `H(0) = 0`).
    pub energy: f64,
    pub wedge: [f64; 6],
    pub hybrid_momentum: [f64; 3],
    pub linear_momentum: [f64; 3],
    pub center_of_mass: [f64; 3],
}

impl DriftSummary {
    pub fn from_reports(reports: &[ConservedReport]) -> Self {
        let Some(first) = reports.first() else {
            return Self::default();
        };
        let mut d = Self::default();
        let e_scale = if first.energy == 0.0 { 1.0 } else { first.energy.abs() };
        let upd = |dst: &mut [f64], now: &[f64], init: &[f64]| {
            for ((d, a), b) in dst.iter_mut().zip(now).zip(init) {
                *d = d.max((a - b).abs());
            }
        };
        for r in reports {
            d.energy = d.energy.max((r.energy - first.energy).abs() / e_scale);
            upd(&mut d.wedge, &r.wedge, &first.wedge);
            upd(&mut d.hybrid_momentum, &r.hybrid_momentum, &first.hybrid_momentum);
            upd(&mut d.linear_momentum, &r.linear_momentum, &first.linear_momentum);
            upd(&mut d.center_of_mass, &r.center_of_mass, &first.center_of_mass);
        }
        d
    }

    /// Largest drift among the six wedge and three hybrid momenta.
    pub fn max_wedge(&self) -> f64 {
        self.wedge
            .iter()
            .chain(&self.hybrid_momentum)
            .fold(0.0, |m, x| m.max(*x))
    }

    pub fn max_linear_momentum(&self) -> f64 {
        self.linear_momentum.iter().fold(0.0, |m, x| m.max(*x))
    }

    pub fn max_center_of_mass(&self) -> f64 {
        self.center_of_mass.iter().fold(0.0, |m, x| m.max(*x))
    }
}

/// Default relative threshold below which an integral counts as conserved.
pub const AUDIT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub name: String,
    pub initial: f64,
    pub max_drift: f64,
    /// Whether theory says this quantity is a first integral at this κ.
    pub expected: bool,
    /// Whether the measured drift is below the audit threshold.
    pub observed: bool,
}

/// Count of integrals observed to be conserved along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralAudit {
    pub kappa: f64,
    pub rows: Vec<AuditRow>,
    pub conserved: usize,
    /// 10 at κ = 0, 7 otherwise.
    pub expected: usize,
}

impl IntegralAudit {
    /// Audits a sequence of reports. At κ = 0 the hybrid momenta coincide
    /// with linear momentum, so only the latter is listed; at κ ≠ 0 the
    /// hybrid rows stand for `|κ|^{1/2} c_w•`.
    pub fn from_reports(kappa: f64, reports: &[ConservedReport], tol: f64) -> Result<Self> {
        let first = reports
            .first()
            .ok_or_else(|| Error::InvalidState("no samples to audit".into()))?;
        let flat = kappa == 0.0;
        let mut rows = Vec::new();
        let mut push = |name: &str, expected: bool, get: &dyn Fn(&ConservedReport) -> f64, relative: bool| {
            let init = get(first);
            let drift = reports.iter().fold(0.0f64, |m, r| m.max((get(r) - init).abs()));
            let scale = if relative { init.abs().max(f64::MIN_POSITIVE) } else { 1.0f64.max(init.abs()) };
            let measured = if relative { drift / scale } else { drift };
            rows.push(AuditRow {
                name: name.to_string(),
                initial: init,
                max_drift: measured,
                expected,
                observed: measured <= tol * if relative { 1.0 } else { scale },
            });
        };
        push("energy", true, &|r| r.energy, true);
        for (k, name) in ["c_xy", "c_xz", "c_yz"].iter().enumerate() {
            push(name, true, &|r| r.wedge[3 + k], false);
        }
        if !flat {
            for (k, name) in ["hybrid_x", "hybrid_y", "hybrid_z"].iter().enumerate() {
                push(name, true, &|r| r.hybrid_momentum[k], false);
            }
        }
        for (k, name) in ["momentum_x", "momentum_y", "momentum_z"].iter().enumerate() {
            push(name, flat, &|r| r.linear_momentum[k], false);
        }
        for (k, name) in ["com_x", "com_y", "com_z"].iter().enumerate() {
            push(name, flat, &|r| r.center_of_mass[k], false);
        }
        let conserved = rows.iter().filter(|r| r.observed).count();
        Ok(Self {
            kappa,
            rows,
            conserved,
            expected: if flat { 10 } else { 7 },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{frame_shift, AmbientVec, Curvature};
    use crate::potentials::MassList;

    fn ms(v: &[f64]) -> MassList {
        MassList::new(v.to_vec()).unwrap()
    }

    #[test]
    fn flat_pair_at_rest_has_energy_minus_one() {
        let s = SystemState::new(
            ms(&[1.0, 1.0]),
            vec![AmbientVec::new(0.0, 0.0, 0.0, 0.0), AmbientVec::new(1.0, 0.0, 0.0, 0.0)],
            vec![AmbientVec::ZERO; 2],
            0.0,
            Curvature::flat(),
            Frame::NorthPole,
        )
        .unwrap();
        assert_eq!(energy(&s).unwrap(), -1.0);
        assert_eq!(wedge_momenta(&s).unwrap(), [0.0; 6]);
    }

    #[test]
    fn single_body_wedge() {
        let s = SystemState::new(
            ms(&[1.0]),
            vec![AmbientVec::new(1.0, 0.0, 0.0, 0.0)],
            vec![AmbientVec::new(0.0, 1.0, 0.0, 0.0)],
            0.0,
            Curvature::new(1.0),
            Frame::Centered,
        )
        .unwrap();
        assert_eq!(wedge_momenta(&s).unwrap(), [0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(energy(&s).unwrap(), 0.5);
        assert!(hybrid_momenta(&s).is_err());
        assert!(wedge_momenta(&s.to_frame(Frame::NorthPole).unwrap()).is_err());
    }

    #[test]
    fn hybrid_is_scaled_wedge() {
        for k in [1.0, -0.3] {
            let c = Curvature::new(k);
            let (p, v) = crate::scenario::lift_to_curvature([0.2, -0.4, 0.1], [0.3, 0.2, -0.5], c).unwrap();
            let s = SystemState::new(ms(&[1.3]), vec![p], vec![v], 0.0, c, Frame::NorthPole).unwrap();
            let h = hybrid_momenta(&s).unwrap();
            let w = wedge_momenta(&s.to_frame(Frame::Centered).unwrap()).unwrap();
            for i in 0..3 {
                assert!((h[i] - c.sqrt_abs() * w[i]).abs() < 1e-12);
            }
            let centered = s.to_frame(Frame::Centered).unwrap();
            assert!((energy(&s).unwrap() - energy(&centered).unwrap()).abs() < 1e-14);
            let back = frame_shift(&centered.positions[0], c).unwrap();
            assert!((back - p).max_abs() < 1e-15);
        }
    }

    #[test]
    fn com_offset_subtracts_drift() {
        let s = SystemState::new(
            ms(&[2.0]),
            vec![AmbientVec::new(3.0, 0.0, 0.0, 0.0)],
            vec![AmbientVec::new(1.0, 0.0, 0.0, 0.0)],
            1.5,
            Curvature::flat(),
            Frame::NorthPole,
        )
        .unwrap();
        let (a, b) = flat_only_integrals(&s);
        assert_eq!(a, [2.0, 0.0, 0.0]);
        assert_eq!(b, [3.0, 0.0, 0.0]);
    }

    #[test]
    fn drift_summary_and_audit() {
        let base = ConservedReport {
            energy: -2.0,
            wedge: [0.0; 6],
            hybrid_momentum: [0.0; 3],
            linear_momentum: [0.0; 3],
            center_of_mass: [0.0; 3],
            flat_integrals_conserved: true,
        };
        let mut moved = base.clone();
        moved.energy = -2.0 + 2e-9;
        moved.linear_momentum[1] = 0.5;
        let d = DriftSummary::from_reports(&[base.clone(), moved.clone()]);
        assert!((d.energy - 1e-9).abs() < 1e-15);
        assert_eq!(d.max_linear_momentum(), 0.5);
        let audit = IntegralAudit::from_reports(0.0, &[base.clone(), moved.clone()], AUDIT_TOL).unwrap();
        assert_eq!(audit.expected, 10);
        assert_eq!(audit.conserved, 9);
        let audit = IntegralAudit::from_reports(1.0, &[base, moved], AUDIT_TOL).unwrap();
        assert_eq!(audit.expected, 7);
        assert_eq!(audit.rows.len(), 13);
        assert_eq!(audit.conserved, 12);
    }
}
