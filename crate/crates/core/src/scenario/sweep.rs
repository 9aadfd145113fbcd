use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_at, Scenario};
use crate::dynamics::{acceleration, Formulation, SystemState};
use crate::error::{Error, Result};
use crate::geometry::{Curvature, Frame};
use crate::integrators::{Termination, Trajectory};

/// Linear-momentum drift (relative to `max(1, |P(0)|)`) below which the sweep
/// reports momentum as conserved.
pub const MOMENTUM_TOL: f64 = 1e-9;
/// Same for the centre-of-mass offset `Σ m r − a t`.
pub const COM_TOL: f64 = 1e-7;

/// Distance between two states on the xyz block of positions and velocities,
/// the coordinates the vertical lift shares across curvatures.
pub fn flat_distance(a: &SystemState, b: &SystemState) -> f64 {
    a.positions
        .iter()
        .zip(&b.positions)
        .chain(a.velocities.iter().zip(&b.velocities))
        .map(|(p, q)| {
            let (p, q) = (p.xyz(), q.xyz());
            (0..3).map(|k| (p[k] - q[k]).powi(2)).sum::<f64>()
        })
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kappa: f64,
    pub formulation: Formulation,
    pub status: String,
    pub energy_drift: f64,
    pub max_wedge_drift: f64,
    pub momentum_conserved: bool,
    pub com_uniform: bool,
    pub final_state_distance_to_flat: f64,
    #[serde(skip)]
    pub trajectory: Option<Trajectory>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub reference: Option<Trajectory>,
}

fn status_of(t: &Termination) -> String {
    match t {
        Termination::Completed => "completed".into(),
        Termination::Singular { kind, .. } => format!("singular:{kind}"),
        Termination::Failed { reason, .. } => format!("failed:{reason}"),
    }
}

fn formulation_at(sc: &Scenario, kappa: f64) -> Formulation {
    if sc.formulation.check_curvature(Curvature::new(kappa)).is_ok() {
        sc.formulation
    } else {
        Formulation::Unified
    }
}

/// Runs `sc` at every κ in parallel and compares each run with a κ = 0
/// reference. A κ whose formulation is undefined there falls back to the
/// unified equations. Failures are recorded per row; the sweep continues.
pub fn curvature_sweep(sc: &Scenario, kappas: &[f64]) -> SweepReport {
    let (reference, runs) = rayon::join(
        || run_at(sc, 0.0, formulation_at(sc, 0.0)).ok(),
        || {
            kappas
                .par_iter()
                .map(|&k| {
                    let form = formulation_at(sc, k);
                    (k, form, run_at(sc, k, form))
                })
                .collect::<Vec<_>>()
        },
    );
    let rows = runs
        .into_iter()
        .map(|(kappa, formulation, run)| match run {
            Ok(traj) => {
                let drift = traj.drift();
                let first = &traj.samples[0].conserved;
                let p_scale = first.linear_momentum.iter().fold(1.0f64, |m, x| m.max(x.abs()));
                let b_scale = first.center_of_mass.iter().fold(1.0f64, |m, x| m.max(x.abs()));
                let distance = match &reference {
                    Some(r)
                        if traj.termination == Termination::Completed
                            && r.termination == Termination::Completed =>
                    {
                        flat_distance(traj.final_state(), r.final_state())
                    }
                    _ => f64::NAN,
                };
                SweepRow {
                    kappa,
                    formulation,
                    status: status_of(&traj.termination),
                    energy_drift: drift.energy,
                    max_wedge_drift: drift.max_wedge(),
                    momentum_conserved: drift.max_linear_momentum() <= MOMENTUM_TOL * p_scale,
                    com_uniform: drift.max_center_of_mass() <= COM_TOL * b_scale,
                    final_state_distance_to_flat: distance,
                    trajectory: Some(traj),
                }
            }
            Err(e) => SweepRow {
                kappa,
                formulation,
                status: format!("invalid:{e}"),
                energy_drift: f64::NAN,
                max_wedge_drift: f64::NAN,
                momentum_conserved: false,
                com_uniform: false,
                final_state_distance_to_flat: f64::NAN,
                trajectory: None,
            },
        })
        .collect();
    SweepReport { rows, reference }
}

/// Writes the sweep summary CSV.
pub fn write_sweep_summary<W: Write>(report: &SweepReport, mut out: W) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(e.to_string());
    writeln!(
        out,
        "kappa,status,energy_drift,max_wedge_drift,momentum_conserved,com_uniform,final_state_distance_to_flat"
    )
    .map_err(io)?;
    for r in &report.rows {
        // statuses may carry free text; keep the CSV one-field-per-column
        let status = r.status.replace([',', '\n'], ";");
        writeln!(
            out,
            "{:.16e},{},{:.16e},{:.16e},{},{},{:.16e}",
            r.kappa,
            status,
            r.energy_drift,
            r.max_wedge_drift,
            r.momentum_conserved,
            r.com_uniform,
            r.final_state_distance_to_flat
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Side-by-side integration of one scenario under two formulations.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub formulation_a: Formulation,
    pub formulation_b: Formulation,
    pub times: Vec<f64>,
    /// Max-norm deviation of the North-Pole-frame states at each common sample.
    pub state_deviation: Vec<f64>,
    /// Max-norm deviation of the two accelerations on the states of run `a`.
    pub rhs_deviation: Vec<f64>,
    pub termination_a: Termination,
    pub termination_b: Termination,
}

impl Comparison {
    pub fn max_state_deviation(&self) -> f64 {
        self.state_deviation.iter().fold(0.0, |m, x| m.max(*x))
    }

    pub fn max_rhs_deviation(&self) -> f64 {
        self.rhs_deviation.iter().fold(0.0, |m, x| m.max(*x))
    }
}

fn state_gap(a: &SystemState, b: &SystemState) -> Result<f64> {
    let a = a.to_frame(Frame::NorthPole)?;
    let b = b.to_frame(Frame::NorthPole)?;
    Ok(a.positions
        .iter()
        .zip(&b.positions)
        .chain(a.velocities.iter().zip(&b.velocities))
        .fold(0.0, |m, (p, q)| m.max((*p - *q).max_abs())))
}

pub fn compare_formulations(sc: &Scenario, a: Formulation, b: Formulation) -> Result<Comparison> {
    let c = Curvature::new(sc.kappa);
    a.check_curvature(c)?;
    b.check_curvature(c)?;
    let (ra, rb) = rayon::join(|| run_at(sc, sc.kappa, a), || run_at(sc, sc.kappa, b));
    let (ra, rb) = (ra?, rb?);
    let mut cmp = Comparison {
        formulation_a: a,
        formulation_b: b,
        times: Vec::new(),
        state_deviation: Vec::new(),
        rhs_deviation: Vec::new(),
        termination_a: ra.termination.clone(),
        termination_b: rb.termination.clone(),
    };
    for (sa, sb) in ra.samples.iter().zip(&rb.samples) {
        if sa.state.time != sb.state.time {
            break;
        }
        cmp.times.push(sa.state.time);
        cmp.state_deviation.push(state_gap(&sa.state, &sb.state)?);
        let on_b = sa.state.to_frame(b.frame())?;
        let acc_a = acceleration(a, &sa.state)?;
        let acc_b = acceleration(b, &on_b)?;
        let gap = acc_a
            .iter()
            .zip(&acc_b)
            .fold(0.0f64, |m, (x, y)| m.max((*x - *y).max_abs()));
        cmp.rhs_deviation.push(gap);
    }
    Ok(cmp)
}
