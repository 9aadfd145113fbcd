//! Trajectory persistence: CSV and JSON lines.
//!
//! CSV header: `time`, then per body `b{i}_x b{i}_y b{i}_z b{i}_w b{i}_vx
//! b{i}_vy b{i}_vz b{i}_vw`, then `energy mom_wx mom_wy mom_wz mom_xy mom_xz
//! mom_yz residual`. Floats are written with 17 significant digits, so every
//! value reads back bit-exact.
//!
//! Positions and velocities are in the frame the formulation integrates in.
//! For North-Pole runs the `mom_w•` columns hold the hybrid momenta
//! `|κ|^{1/2} c_w•` (which reduce to linear momentum at κ = 0); for centered
//! runs they hold `c_w•` itself.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::conserved::ConservedReport;
use crate::error::{Error, Result};
use crate::geometry::{AmbientVec, Frame};
use crate::integrators::{Sample, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Jsonl => "jsonl",
        }
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "jsonl" => Ok(OutputFormat::Jsonl),
            _ => Err(format!("unknown output format `{s}` (expected csv or jsonl)")),
        }
    }
}

/// One sampled instant, as written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub time: f64,
    pub positions: Vec<AmbientVec>,
    pub velocities: Vec<AmbientVec>,
    pub energy: f64,
    /// `(wx, wy, wz, xy, xz, yz)`; see the module docs for the `w•` slots.
    pub momenta: [f64; 6],
    pub conserved: ConservedReport,
    pub constraint_residual_max: f64,
}

impl TrajectoryRecord {
    pub fn from_sample(s: &Sample) -> Self {
        let c = &s.conserved;
        let mut momenta = c.wedge;
        if s.state.frame == Frame::NorthPole {
            momenta[..3].copy_from_slice(&c.hybrid_momentum);
        }
        Self {
            time: s.state.time,
            positions: s.state.positions.clone(),
            velocities: s.state.velocities.clone(),
            energy: c.energy,
            momenta,
            conserved: c.clone(),
            constraint_residual_max: s.constraint_residual_max,
        }
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn csv_header(n: usize) -> String {
    let mut cols = vec!["time".to_string()];
    for i in 0..n {
        for suffix in ["x", "y", "z", "w", "vx", "vy", "vz", "vw"] {
            cols.push(format!("b{i}_{suffix}"));
        }
    }
    cols.extend(
        ["energy", "mom_wx", "mom_wy", "mom_wz", "mom_xy", "mom_xz", "mom_yz", "residual"]
            .map(String::from),
    );
    cols.join(",")
}

fn csv_row(r: &TrajectoryRecord) -> String {
    let mut cols = vec![fmt(r.time)];
    for (p, v) in r.positions.iter().zip(&r.velocities) {
        cols.extend(p.to_array().into_iter().chain(v.to_array()).map(fmt));
    }
    cols.push(fmt(r.energy));
    cols.extend(r.momenta.iter().map(|x| fmt(*x)));
    cols.push(fmt(r.constraint_residual_max));
    cols.join(",")
}

/// Writes every sample of `traj` to `out`.
pub fn write_trajectory<W: Write>(traj: &Trajectory, format: OutputFormat, mut out: W) -> Result<()> {
    let records: Vec<_> = traj.samples.iter().map(TrajectoryRecord::from_sample).collect();
    match format {
        OutputFormat::Csv => {
            let n = traj.samples.first().map_or(0, |s| s.state.len());
            writeln!(out, "{}", csv_header(n)).map_err(io)?;
            for r in &records {
                writeln!(out, "{}", csv_row(r)).map_err(io)?;
            }
        }
        OutputFormat::Jsonl => {
            for r in &records {
                let line = serde_json::to_string(r).map_err(|e| Error::Io(e.to_string()))?;
                writeln!(out, "{line}").map_err(io)?;
            }
        }
    }
    out.flush().map_err(io)
}
