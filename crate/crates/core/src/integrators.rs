//! Time integration: classical RK4 and the Dormand–Prince 5(4) embedded pair,
//! with optional post-step projection back onto the constraint manifold.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conserved::{ConservedReport, DriftSummary};
use crate::dynamics::{
    accel_intrinsic_2d, extrinsic_rhs, section_coordinates, state_from_section, Formulation,
    SystemState,
};
use crate::error::{Error, Result, SingularKind};
use crate::geometry::{pair_separation, signed_dot, AmbientVec, Curvature, Frame};
use crate::potentials::{ANTIPODAL_MARGIN, COLLISION_RADIUS};

/// Pair separation below which a step is flagged as approaching a collision.
pub const NEAR_COLLISION_RADIUS: f64 = 1e-3;
/// `1 − κr²/4` below which a step is flagged as approaching an antipodal pair.
pub const NEAR_ANTIPODAL_MARGIN: f64 = 1e-6;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const UNDERFLOW_RATIO: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[serde(rename = "fixed_rk4")]
    FixedRK4,
    #[serde(rename = "adaptive_rk45")]
    AdaptiveRK45,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    None,
    PostStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    /// Fixed step, or the first trial step of the adaptive scheme.
    pub step: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub projection: Projection,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::AdaptiveRK45,
            step: 1e-2,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            projection: Projection::PostStep,
            max_steps: 10_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn fixed(step: f64) -> Self {
        Self {
            scheme: Scheme::FixedRK4,
            step,
            ..Self::default()
        }
    }

    pub fn adaptive(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn with_projection(self, projection: Projection) -> Self {
        Self { projection, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        if !(self.step.is_finite() && self.step > 0.0) {
            return bad("integrator.step must be positive");
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return bad("integrator.rel_tol must lie in (0, 1)");
        }
        if !(self.abs_tol > 0.0 && self.abs_tol < 1.0) {
            return bad("integrator.abs_tol must lie in (0, 1)");
        }
        if self.max_steps == 0 {
            return bad("integrator.max_steps must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: SystemState,
    pub accepted_step: f64,
    /// Step the error controller proposes next (equal to the step for RK4).
    pub suggested_step: f64,
    pub residual_before: f64,
    pub residual_after: f64,
    pub singular_flag: Option<SingularKind>,
}

impl StepOutcome {
    /// Constraint residual of the returned state.
    pub fn constraint_residual_max(&self) -> f64 {
        self.residual_after
    }
}

/// Advances one accepted step, trying `cfg.step` first.
pub fn step(s: &SystemState, form: Formulation, cfg: &IntegratorConfig) -> Result<StepOutcome> {
    cfg.validate()?;
    check_start(s, form)?;
    step_sized(s, form, cfg, cfg.step)
}

fn check_start(s: &SystemState, form: Formulation) -> Result<()> {
    form.check_curvature(s.curvature)?;
    s.require_frame(form.frame())?;
    if form == Formulation::Intrinsic2D {
        section_coordinates(s)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// phase-space packing

struct System<'a> {
    form: Formulation,
    proto: &'a SystemState,
}

impl System<'_> {
    fn pack(&self, s: &SystemState) -> Result<Vec<f64>> {
        if self.form == Formulation::Intrinsic2D {
            let (zs, zds) = section_coordinates(s)?;
            let mut y = Vec::with_capacity(4 * zs.len());
            y.extend(zs.iter().flat_map(|z| [z.re, z.im]));
            y.extend(zds.iter().flat_map(|z| [z.re, z.im]));
            Ok(y)
        } else {
            let mut y = Vec::with_capacity(8 * s.len());
            y.extend(s.positions.iter().flat_map(|p| p.to_array()));
            y.extend(s.velocities.iter().flat_map(|p| p.to_array()));
            Ok(y)
        }
    }

    fn unpack(&self, y: &[f64], time: f64) -> Result<SystemState> {
        let s = self.proto;
        if self.form == Formulation::Intrinsic2D {
            let (zs, zds) = split_complex(y);
            state_from_section(&zs, &zds, &s.masses, s.curvature, time)
        } else {
            let (p, v) = split_ambient(y);
            SystemState::new_unchecked(s.masses.clone(), p, v, time, s.curvature, s.frame)
        }
    }

    fn rhs(&self, y: &[f64]) -> Result<Vec<f64>> {
        let s = self.proto;
        let half = y.len() / 2;
        let mut out = Vec::with_capacity(y.len());
        out.extend_from_slice(&y[half..]);
        if self.form == Formulation::Intrinsic2D {
            let (zs, zds) = split_complex(y);
            let acc = accel_intrinsic_2d(&zs, &zds, &s.masses, s.curvature)?;
            out.extend(acc.iter().flat_map(|z| [z.re, z.im]));
        } else {
            let (p, v) = split_ambient(y);
            let acc = extrinsic_rhs(self.form, &s.masses, s.curvature, &p, &v)?;
            out.extend(acc.iter().flat_map(|a| a.to_array()));
        }
        if out.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { time: s.time });
        }
        Ok(out)
    }
}

fn split_ambient(y: &[f64]) -> (Vec<AmbientVec>, Vec<AmbientVec>) {
    let half = y.len() / 2;
    let conv = |chunk: &[f64]| AmbientVec::new(chunk[0], chunk[1], chunk[2], chunk[3]);
    (
        y[..half].chunks_exact(4).map(conv).collect(),
        y[half..].chunks_exact(4).map(conv).collect(),
    )
}

fn split_complex(y: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let half = y.len() / 2;
    let conv = |chunk: &[f64]| Complex64::new(chunk[0], chunk[1]);
    (
        y[..half].chunks_exact(2).map(conv).collect(),
        y[half..].chunks_exact(2).map(conv).collect(),
    )
}

fn axpy(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = y.to_vec();
    for &(a, k) in terms {
        if a != 0.0 {
            let ha = h * a;
            for (o, ki) in out.iter_mut().zip(k) {
                *o += ha * ki;
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// schemes

fn rk4(sys: &System, y: &[f64], h: f64) -> Result<Vec<f64>> {
    let k1 = sys.rhs(y)?;
    let k2 = sys.rhs(&axpy(y, h, &[(0.5, &k1)]))?;
    let k3 = sys.rhs(&axpy(y, h, &[(0.5, &k2)]))?;
    let k4 = sys.rhs(&axpy(y, h, &[(1.0, &k3)]))?;
    Ok(axpy(
        y,
        h,
        &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)],
    ))
}

const B5: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One Dormand–Prince trial: returns the 5th-order solution and the error vector.
fn dopri5(sys: &System, y: &[f64], h: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let k1 = sys.rhs(y)?;
    let k2 = sys.rhs(&axpy(y, h, &[(1.0 / 5.0, &k1)]))?;
    let k3 = sys.rhs(&axpy(y, h, &[(3.0 / 40.0, &k1), (9.0 / 40.0, &k2)]))?;
    let k4 = sys.rhs(&axpy(
        y,
        h,
        &[(44.0 / 45.0, &k1), (-56.0 / 15.0, &k2), (32.0 / 9.0, &k3)],
    ))?;
    let k5 = sys.rhs(&axpy(
        y,
        h,
        &[
            (19372.0 / 6561.0, &k1),
            (-25360.0 / 2187.0, &k2),
            (64448.0 / 6561.0, &k3),
            (-212.0 / 729.0, &k4),
        ],
    ))?;
    let k6 = sys.rhs(&axpy(
        y,
        h,
        &[
            (9017.0 / 3168.0, &k1),
            (-355.0 / 33.0, &k2),
            (46732.0 / 5247.0, &k3),
            (49.0 / 176.0, &k4),
            (-5103.0 / 18656.0, &k5),
        ],
    ))?;
    let ks = [&k1, &k2, &k3, &k4, &k5, &k6];
    let terms: Vec<(f64, &[f64])> = B5.iter().zip(ks).map(|(b, k)| (*b, k.as_slice())).collect();
    let y5 = axpy(y, h, &terms);
    let k7 = sys.rhs(&y5)?;
    let mut err = vec![0.0; y.len()];
    for (e, k) in E.iter().zip([&k1, &k2, &k3, &k4, &k5, &k6, &k7]) {
        if *e != 0.0 {
            for (ei, ki) in err.iter_mut().zip(k.iter()) {
                *ei += h * e * ki;
            }
        }
    }
    Ok((y5, err))
}

fn error_norm(y0: &[f64], y1: &[f64], err: &[f64], cfg: &IntegratorConfig) -> f64 {
    let sum: f64 = y0
        .iter()
        .zip(y1)
        .zip(err)
        .map(|((a, b), e)| {
            let scale = cfg.abs_tol + cfg.rel_tol * a.abs().max(b.abs());
            (e / scale).powi(2)
        })
        .sum();
    (sum / y0.len().max(1) as f64).sqrt()
}

fn is_singular_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Collision { .. }
            | Error::AntipodalSingularity { .. }
            | Error::SingularConfiguration { .. }
            | Error::SingularMetric
            | Error::NonFinite { .. }
    )
}

// ---------------------------------------------------------------------------
// projection and singularity monitoring

/// Re-imposes both constraints on every body. Flat and intrinsic states are
/// returned unchanged (they satisfy their constraints identically).
pub fn project(s: &SystemState) -> SystemState {
    let c = s.curvature;
    if c.is_flat() {
        return s.clone();
    }
    let mut out = s.clone();
    for (p, v) in out.positions.iter_mut().zip(out.velocities.iter_mut()) {
        let (np, nv) = match s.frame {
            Frame::Centered => project_centered(*p, *v, c),
            Frame::NorthPole => project_northpole(*p, *v, c),
        };
        *p = np;
        *v = nv;
    }
    out
}

fn project_centered(q: AmbientVec, v: AmbientVec, c: Curvature) -> (AmbientVec, AmbientVec) {
    let k = c.kappa();
    let q = (1.0 / (k * signed_dot(&q, &q, c)).sqrt()) * q;
    let v = v - (k * signed_dot(&q, &v, c)) * q;
    (q, v)
}

/// The centered-frame projection rewritten in North-Pole coordinates so that
/// small ω keeps full relative precision.
fn project_northpole(r: AmbientVec, v: AmbientVec, c: Curvature) -> (AmbientVec, AmbientVec) {
    let sa = c.sqrt_abs();
    let e_w = AmbientVec::new(0.0, 0.0, 0.0, 1.0);
    // κq² − 1 = g, where q is the centered position
    let h = c.sigma() * sa * signed_dot(&r, &r, c) + 2.0 * r.w;
    let g = sa * h;
    let scale = 1.0 / (1.0 + g).sqrt();
    let factor = if g.abs() < 1e-300 {
        -0.5
    } else {
        (-0.5 * g.ln_1p()).exp_m1() / g
    };
    let r = scale * r + (factor * h) * e_w;
    let mu = c.sigma() * sa * signed_dot(&r, &v, c) + v.w;
    let v = v - (sa * mu) * r - mu * e_w;
    (r, v)
}

/// Closest approach to a singular configuration among all pairs:
/// `(min separation, min 1 − κr²/4)`; the margin is `+∞` unless κ > 0.
pub fn singular_margins(s: &SystemState) -> Result<(f64, f64)> {
    let c = s.curvature;
    let mut min_r = f64::INFINITY;
    let mut min_margin = f64::INFINITY;
    for i in 0..s.len() {
        for j in (i + 1)..s.len() {
            let r = pair_separation(&s.positions[i], &s.positions[j], c)?;
            min_r = min_r.min(r);
            if c.kappa() > 0.0 {
                min_margin = min_margin.min(1.0 - c.kappa() * r * r / 4.0);
            }
        }
    }
    Ok((min_r, min_margin))
}

fn classify(s: &SystemState, near: bool) -> Result<Option<SingularKind>> {
    let (r, margin) = singular_margins(s)?;
    let (rc, mc) = if near {
        (NEAR_COLLISION_RADIUS, NEAR_ANTIPODAL_MARGIN)
    } else {
        (COLLISION_RADIUS, ANTIPODAL_MARGIN)
    };
    Ok(if r < rc {
        Some(SingularKind::CollisionNear)
    } else if margin < mc {
        Some(SingularKind::AntipodalNear)
    } else {
        None
    })
}

/// Smallest distance between a pair along the straight segment joining its
/// relative positions at the start and end of a step. Catches bodies that a
/// step carries through each other.
fn swept_min_separation(a: &SystemState, b: &SystemState) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            let d0 = a.positions[j] - a.positions[i];
            let d1 = b.positions[j] - b.positions[i];
            let e = d1 - d0;
            let ee = e.dot3(&e) + e.w * e.w;
            let t = if ee > 0.0 {
                (-(d0.dot3(&e) + d0.w * e.w) / ee).clamp(0.0, 1.0)
            } else {
                0.0
            };
            best = best.min((d0 + t * e).euclidean_norm());
        }
    }
    best
}

fn guess_kind(s: &SystemState) -> SingularKind {
    match singular_margins(s) {
        Ok((r, margin)) if margin < NEAR_ANTIPODAL_MARGIN && r >= NEAR_COLLISION_RADIUS => {
            SingularKind::AntipodalNear
        }
        _ => SingularKind::CollisionNear,
    }
}

// ---------------------------------------------------------------------------
// stepping

/// Advances one accepted step starting from a trial size `h`. The adaptive
/// scheme shrinks `h` until the error test passes; the fixed scheme takes
/// exactly `h`.
pub fn step_sized(
    s: &SystemState,
    form: Formulation,
    cfg: &IntegratorConfig,
    h: f64,
) -> Result<StepOutcome> {
    let sys = System { form, proto: s };
    let y0 = sys.pack(s)?;
    let flagged = classify(s, true)?;
    let (y1, taken, suggested) = match cfg.scheme {
        Scheme::FixedRK4 => match rk4(&sys, &y0, h) {
            Ok(y1) => (y1, h, h),
            Err(e) if is_singular_error(&e) => {
                return Err(Error::SingularityReached {
                    kind: flagged.unwrap_or_else(|| guess_kind(s)),
                    time: s.time,
                })
            }
            Err(e) => return Err(e),
        },
        Scheme::AdaptiveRK45 => adaptive_attempts(&sys, &y0, s, cfg, h, flagged)?,
    };
    let time = s.time + taken;
    let raw = sys.unpack(&y1, time)?;
    let residual_before = raw.max_constraint_residual();
    let state = match cfg.projection {
        Projection::PostStep if form != Formulation::Intrinsic2D => project(&raw),
        _ => raw,
    };
    let residual_after = state.max_constraint_residual();
    if let Some(kind) = classify(&state, false)? {
        return Err(Error::SingularityReached { kind, time });
    }
    if swept_min_separation(s, &state) < COLLISION_RADIUS {
        return Err(Error::SingularityReached {
            kind: SingularKind::CollisionNear,
            time,
        });
    }
    let singular_flag = classify(&state, true)?;
    Ok(StepOutcome {
        state,
        accepted_step: taken,
        suggested_step: suggested,
        residual_before,
        residual_after,
        singular_flag,
    })
}

fn adaptive_attempts(
    sys: &System,
    y0: &[f64],
    s: &SystemState,
    cfg: &IntegratorConfig,
    mut h: f64,
    flagged: Option<SingularKind>,
) -> Result<(Vec<f64>, f64, f64)> {
    let floor = UNDERFLOW_RATIO * s.time.abs().max(1.0);
    let mut last_singular = false;
    loop {
        if h < floor {
            return Err(match (flagged, last_singular) {
                (Some(kind), _) => Error::SingularityReached { kind, time: s.time },
                (None, true) => Error::SingularityReached {
                    kind: guess_kind(s),
                    time: s.time,
                },
                (None, false) => Error::StepUnderflow { step: h, time: s.time },
            });
        }
        match dopri5(sys, y0, h) {
            Ok((y1, err)) => {
                let norm = error_norm(y0, &y1, &err, cfg);
                if norm.is_finite() && norm <= 1.0 {
                    let factor = if norm == 0.0 {
                        MAX_FACTOR
                    } else {
                        (SAFETY * norm.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                    };
                    return Ok((y1, h, h * factor));
                }
                last_singular = false;
                let factor = if norm.is_finite() {
                    (SAFETY * norm.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
                } else {
                    MIN_FACTOR
                };
                h *= factor;
            }
            Err(e) if is_singular_error(&e) => {
                last_singular = true;
                h *= MIN_FACTOR;
            }
            Err(e) => return Err(e),
        }
    }
}

// ---------------------------------------------------------------------------
// trajectories

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub state: SystemState,
    pub conserved: ConservedReport,
    pub constraint_residual_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    Singular { kind: SingularKind, time: f64 },
    Failed { reason: String, time: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub formulation: Formulation,
    pub samples: Vec<Sample>,
    pub termination: Termination,
    pub steps: usize,
    /// Largest constraint residual over all accepted steps (after projection).
    pub max_residual: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &SystemState {
        &self.samples.last().expect("trajectory has an initial sample").state
    }

    pub fn drift(&self) -> DriftSummary {
        let reports: Vec<_> = self.samples.iter().map(|s| s.conserved.clone()).collect();
        DriftSummary::from_reports(&reports)
    }
}

/// Integrates from `s0` to `t_end`, recording samples every `sample_dt`
/// (steps are shortened so that they land on sample times exactly).
/// Singularities and numerical failures end the run early and are recorded
/// in [`Trajectory::termination`]; invalid inputs are returned as errors.
pub fn integrate(
    s0: &SystemState,
    form: Formulation,
    cfg: &IntegratorConfig,
    t_end: f64,
    sample_dt: f64,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_start(s0, form)?;
    if !(t_end.is_finite() && t_end > s0.time) {
        return Err(Error::InvalidConfig("t_end must exceed the start time".into()));
    }
    if !(sample_dt > 0.0 && sample_dt <= t_end - s0.time) {
        return Err(Error::InvalidConfig("sample_dt must lie in (0, t_end − t0]".into()));
    }
    let mut samples = vec![make_sample(s0.clone())?];
    let mut state = s0.clone();
    let mut h = cfg.step;
    let mut steps = 0usize;
    let mut max_residual = s0.max_constraint_residual();
    let mut k = 1usize;
    let t0 = s0.time;
    let n_samples = ((t_end - t0) / sample_dt * (1.0 + 1e-12)).floor() as usize;
    let sample_time = |k: usize| {
        if k > n_samples {
            t_end
        } else {
            (t0 + k as f64 * sample_dt).min(t_end)
        }
    };
    let termination = loop {
        let target = sample_time(k);
        if steps >= cfg.max_steps {
            break Termination::Failed {
                reason: Error::MaxStepsExceeded(cfg.max_steps).to_string(),
                time: state.time,
            };
        }
        let remaining = target - state.time;
        let lands = h >= remaining * (1.0 - 1e-12);
        let trial = if lands { remaining } else { h };
        match step_sized(&state, form, cfg, trial) {
            Ok(out) => {
                steps += 1;
                max_residual = max_residual.max(out.residual_after);
                let landed = lands && out.accepted_step == trial;
                state = out.state;
                if cfg.scheme == Scheme::AdaptiveRK45 {
                    h = if landed { out.suggested_step.max(h) } else { out.suggested_step };
                }
                if landed {
                    state.time = target;
                    samples.push(make_sample(state.clone())?);
                    if target >= t_end {
                        break Termination::Completed;
                    }
                    k += 1;
                }
            }
            Err(Error::SingularityReached { kind, time }) => {
                break Termination::Singular { kind, time };
            }
            Err(e) => {
                break Termination::Failed {
                    reason: e.to_string(),
                    time: state.time,
                }
            }
        }
    };
    if termination != Termination::Completed && samples.last().map(|s| s.state.time) != Some(state.time) {
        samples.push(make_sample(state)?);
    }
    Ok(Trajectory {
        formulation: form,
        samples,
        termination,
        steps,
        max_residual,
    })
}

fn make_sample(state: SystemState) -> Result<Sample> {
    let conserved = ConservedReport::evaluate(&state)?;
    let constraint_residual_max = state.max_constraint_residual();
    Ok(Sample {
        state,
        conserved,
        constraint_residual_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::MassList;

    fn geodesic_state() -> SystemState {
        SystemState::new(
            MassList::new(vec![1.0]).unwrap(),
            vec![AmbientVec::ZERO],
            vec![AmbientVec::new(1.0, 0.0, 0.0, 0.0)],
            0.0,
            Curvature::new(1.0),
            Frame::NorthPole,
        )
        .unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::default().validate().is_ok());
        assert!(IntegratorConfig::fixed(0.0).validate().is_err());
        assert!(IntegratorConfig::adaptive(1.0, 1e-12).validate().is_err());
        let cfg = IntegratorConfig {
            max_steps: 0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn northpole_projection_matches_centered() {
        let c = Curvature::new(-0.7);
        let r = AmbientVec::new(0.3, -0.2, 0.5, -0.04);
        let v = AmbientVec::new(0.1, 0.4, -0.3, 0.2);
        let (rp, vp) = project_northpole(r, v, c);
        let q = crate::geometry::frame_unshift(&r, c).unwrap();
        let (qp, vq) = project_centered(q, v, c);
        let back = crate::geometry::frame_shift(&qp, c).unwrap();
        assert!((back - rp).max_abs() < 1e-14);
        assert!((vq - vp).max_abs() < 1e-14);
        let (a, b) = crate::geometry::constraint_residuals_northpole(&rp, &vp, c);
        assert!(a.abs() < 1e-15 && b.abs() < 1e-15);
    }

    #[test]
    fn projection_is_idempotent_near_pole() {
        let c = Curvature::new(1e-6);
        let (p, v) = crate::scenario::lift_to_curvature([1e-3, 0.0, 0.0], [0.0, 1.0, 0.0], c).unwrap();
        let (p2, v2) = project_northpole(p, v, c);
        assert!((p2 - p).max_abs() < 1e-18);
        assert!((v2 - v).max_abs() < 1e-15);
    }

    #[test]
    fn single_step_on_geodesic() {
        let s = geodesic_state();
        let out = step(&s, Formulation::Unified, &IntegratorConfig::fixed(0.1)).unwrap();
        assert_eq!(out.accepted_step, 0.1);
        assert!((out.state.positions[0].x - 0.1f64.sin()).abs() < 1e-7);
        assert!(out.residual_after < 1e-15);
        assert!(out.singular_flag.is_none());
    }

    #[test]
    fn geodesic_closes_after_full_period() {
        let s = geodesic_state();
        let tau = 2.0 * std::f64::consts::PI;
        let traj = integrate(&s, Formulation::Unified, &IntegratorConfig::default(), tau, tau).unwrap();
        assert_eq!(traj.termination, Termination::Completed);
        assert_eq!(traj.final_state().time, tau);
        assert!((traj.final_state().positions[0] - s.positions[0]).max_abs() < 1e-8);
    }

    #[test]
    fn samples_land_on_requested_times() {
        let s = geodesic_state();
        let traj = integrate(&s, Formulation::Unified, &IntegratorConfig::fixed(0.03), 1.0, 0.25).unwrap();
        let times: Vec<f64> = traj.samples.iter().map(|x| x.state.time).collect();
        assert_eq!(times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn invalid_horizon_is_rejected() {
        let s = geodesic_state();
        let cfg = IntegratorConfig::default();
        assert!(integrate(&s, Formulation::Unified, &cfg, 0.0, 0.1).is_err());
        assert!(integrate(&s, Formulation::Unified, &cfg, 1.0, 2.0).is_err());
        assert!(integrate(&s, Formulation::Newtonian, &cfg, 1.0, 0.1).is_err());
    }
}
