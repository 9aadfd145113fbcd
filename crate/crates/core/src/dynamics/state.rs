use crate::error::{Error, Result};
use crate::geometry::{
    constraint_residuals_centered, constraint_residuals_northpole, frame_shift, frame_unshift,
    AmbientVec, Curvature, Frame,
};
use crate::potentials::MassList;

/// Tolerance on constraint residuals for a state to be accepted at a public boundary.
pub const STATE_CONSTRAINT_TOL: f64 = 1e-8;

/// Positions and velocities of all bodies at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub masses: MassList,
    pub positions: Vec<AmbientVec>,
    pub velocities: Vec<AmbientVec>,
    pub time: f64,
    pub curvature: Curvature,
    pub frame: Frame,
}

impl SystemState {
    /// Builds a state and checks it: lengths, finiteness, frame validity,
    /// constraint residuals below [`STATE_CONSTRAINT_TOL`], and ω = ω̇ = 0
    /// exactly for flat North-Pole data.
    pub fn new(
        masses: MassList,
        positions: Vec<AmbientVec>,
        velocities: Vec<AmbientVec>,
        time: f64,
        curvature: Curvature,
        frame: Frame,
    ) -> Result<Self> {
        let s = Self::new_unchecked(masses, positions, velocities, time, curvature, frame)?;
        s.check_constraints(STATE_CONSTRAINT_TOL)?;
        Ok(s)
    }

    /// Like [`SystemState::new`] but without the constraint check.
    pub fn new_unchecked(
        masses: MassList,
        positions: Vec<AmbientVec>,
        velocities: Vec<AmbientVec>,
        time: f64,
        curvature: Curvature,
        frame: Frame,
    ) -> Result<Self> {
        frame.check_valid(curvature)?;
        if positions.len() != masses.len() || velocities.len() != masses.len() {
            return Err(Error::InvalidState(format!(
                "{} masses, {} positions, {} velocities",
                masses.len(),
                positions.len(),
                velocities.len()
            )));
        }
        if !time.is_finite()
            || positions.iter().chain(&velocities).any(|v| !v.is_finite())
        {
            return Err(Error::InvalidState("non-finite component".into()));
        }
        Ok(Self {
            masses,
            positions,
            velocities,
            time,
            curvature,
            frame,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Per-body `(position, velocity)` constraint residuals, on the North-Pole scale.
    pub fn constraint_residuals(&self) -> Vec<(f64, f64)> {
        let c = self.curvature;
        self.positions
            .iter()
            .zip(&self.velocities)
            .map(|(p, v)| match self.frame {
                Frame::NorthPole => {
                    if c.is_flat() {
                        (p.w, v.w)
                    } else {
                        constraint_residuals_northpole(p, v, c)
                    }
                }
                Frame::Centered => {
                    constraint_residuals_centered(p, v, c).expect("centered frame has κ ≠ 0")
                }
            })
            .collect()
    }

    pub fn max_constraint_residual(&self) -> f64 {
        self.constraint_residuals()
            .into_iter()
            .fold(0.0, |m, (a, b)| m.max(a.abs()).max(b.abs()))
    }

    pub fn check_constraints(&self, tol: f64) -> Result<()> {
        let flat_np = self.curvature.is_flat() && self.frame == Frame::NorthPole;
        for (body, (a, b)) in self.constraint_residuals().into_iter().enumerate() {
            let bad = if flat_np {
                a != 0.0 || b != 0.0
            } else {
                a.abs() > tol || b.abs() > tol
            };
            if bad {
                return Err(Error::ConstraintViolation {
                    body,
                    residual: a.abs().max(b.abs()),
                });
            }
        }
        Ok(())
    }

    pub fn require_frame(&self, frame: Frame) -> Result<()> {
        if self.frame == frame {
            Ok(())
        } else {
            Err(Error::FrameMismatch {
                expected: frame,
                found: self.frame,
            })
        }
    }

    /// Re-expresses the state in another frame. Velocities are unchanged by
    /// the shift; positions move along w by `|κ|^{-1/2}`.
    pub fn to_frame(&self, frame: Frame) -> Result<SystemState> {
        if frame == self.frame {
            return Ok(self.clone());
        }
        let c = self.curvature;
        let positions = match frame {
            Frame::NorthPole => self
                .positions
                .iter()
                .map(|p| frame_shift(p, c))
                .collect::<Result<Vec<_>>>()?,
            Frame::Centered => self
                .positions
                .iter()
                .map(|p| frame_unshift(p, c))
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(SystemState {
            positions,
            frame,
            ..self.clone()
        })
    }

    /// Minimum chordal separation over all pairs (infinite for N = 1).
    pub fn min_separation(&self) -> Result<f64> {
        let mut best = f64::INFINITY;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                let r = crate::geometry::pair_separation(
                    &self.positions[i],
                    &self.positions[j],
                    self.curvature,
                )?;
                best = best.min(r);
            }
        }
        Ok(best)
    }
}
