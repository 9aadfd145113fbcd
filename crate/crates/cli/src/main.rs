//! `curved-nbody`: simulate, sweep, compare and audit curved-space N-body scenarios.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 singular
//! termination, 3 numerical failure. The last line on standard error is
//! always `STATUS <code> <reason>`.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use curved_nbody::conserved::{IntegralAudit, AUDIT_TOL};
use curved_nbody::integrators::{Termination, Trajectory};
use curved_nbody::scenario::{
    compare_formulations, curvature_sweep, run_scenario, write_sweep_summary, write_trajectory,
    OutputFormat, Scenario,
};
use curved_nbody::{Error, Formulation};

#[derive(Parser)]
#[command(name = "curved-nbody", version, about = "N-body dynamics in spaces of constant curvature")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario and write its trajectory and run metadata.
    Simulate(Common),
    /// Run a scenario at several curvatures and summarise the integrals.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated curvatures, e.g. `-0.1,0,0.1`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        kappas: Vec<f64>,
    },
    /// Integrate the same initial state under two formulations.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long = "a")]
        formulation_a: Formulation,
        #[arg(long = "b")]
        formulation_b: Formulation,
    },
    /// Audit the first integrals along a scenario run.
    Check(Common),
    /// Print the lifted initial state of a scenario.
    Lift(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file.
    scenario: PathBuf,
    /// Override the scenario curvature.
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<f64>,
    /// Override the final time.
    #[arg(long)]
    t_end: Option<f64>,
    /// Override the adaptive relative tolerance.
    #[arg(long)]
    rel_tol: Option<f64>,
    /// unified, centered_extrinsic, north_pole_extrinsic, intrinsic_2d or newtonian.
    #[arg(long)]
    formulation: Option<Formulation>,
    /// Override the sampling interval.
    #[arg(long)]
    sample_dt: Option<f64>,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
    /// csv or jsonl.
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
}

struct Failure {
    code: u8,
    reason: String,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, reason) = match &e {
            Error::SingularityReached { kind, .. } => (2, kind.to_string()),
            Error::StepUnderflow { .. } | Error::MaxStepsExceeded(_) | Error::NonFinite { .. } => {
                (3, "numerical".to_string())
            }
            Error::Io(_) => (1, "io".to_string()),
            _ => (1, "validation".to_string()),
        };
        Self {
            code,
            reason,
            message: e.to_string(),
        }
    }
}

type Outcome = std::result::Result<(u8, String), Failure>;

fn load(common: &Common) -> std::result::Result<(Scenario, Vec<Value>), Failure> {
    let mut sc = Scenario::load(&common.scenario)?;
    let mut overrides = Vec::new();
    if let Some(k) = common.kappa {
        sc.kappa = k;
        overrides.push(json!({"key": "kappa", "value": k}));
    }
    if let Some(t) = common.t_end {
        sc.t_end = t;
        overrides.push(json!({"key": "t_end", "value": t}));
    }
    if let Some(r) = common.rel_tol {
        sc.integrator.rel_tol = r;
        overrides.push(json!({"key": "rel_tol", "value": r}));
    }
    if let Some(f) = common.formulation {
        sc.formulation = f;
        overrides.push(json!({"key": "formulation", "value": f.name()}));
    }
    if let Some(d) = common.sample_dt {
        sc.sample_dt = d;
        overrides.push(json!({"key": "sample_dt", "value": d}));
    }
    sc.validate()?;
    Ok((sc, overrides))
}

fn create(dir: &Path, name: &str) -> std::result::Result<BufWriter<File>, Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::from(Error::Io(format!("{}: {e}", dir.display()))))?;
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())).into())
}

fn write_json(dir: &Path, name: &str, value: &Value) -> std::result::Result<(), Failure> {
    let mut f = create(dir, name)?;
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| Failure::from(Error::Io(e.to_string())))?;
    use std::io::Write;
    writeln!(f).map_err(|e| Failure::from(Error::Io(e.to_string())))
}

fn termination_status(t: &Termination) -> (u8, String) {
    if *t != Termination::Completed {
        eprintln!("{}", describe(t));
    }
    match t {
        Termination::Completed => (0, "ok".into()),
        Termination::Singular { kind, .. } => (2, kind.to_string()),
        Termination::Failed { .. } => (3, "numerical".into()),
    }
}

fn describe(t: &Termination) -> String {
    match t {
        Termination::Completed => "completed".into(),
        Termination::Singular { kind, time } => format!("singular termination ({kind}) at t = {time}"),
        Termination::Failed { reason, time } => format!("numerical failure at t = {time}: {reason}"),
    }
}

fn run_metadata(sc: &Scenario, overrides: &[Value], traj: &Trajectory, output: &str) -> Value {
    let drift = traj.drift();
    json!({
        "program": "curved-nbody",
        "version": env!("CARGO_PKG_VERSION"),
        "determinism": "no random numbers are used; identical inputs produce byte-identical outputs",
        "scenario": serde_json::to_value(sc).unwrap_or(Value::Null),
        "overrides": overrides,
        "formulation": traj.formulation.name(),
        "output": output,
        "termination": serde_json::to_value(&traj.termination).unwrap_or(Value::Null),
        "accepted_steps": traj.steps,
        "samples": traj.samples.len(),
        "energy_drift": drift.energy,
        "max_wedge_drift": drift.max_wedge(),
        "linear_momentum_drift": drift.max_linear_momentum(),
        "center_of_mass_drift": drift.max_center_of_mass(),
        "max_constraint_residual": traj.max_residual,
    })
}

fn simulate(common: &Common) -> Outcome {
    let (sc, overrides) = load(common)?;
    let traj = run_scenario(&sc)?;
    let out_name = format!("{}.{}", sc.name, common.format.extension());
    write_trajectory(&traj, common.format, create(&common.output_dir, &out_name)?)?;
    let meta = run_metadata(&sc, &overrides, &traj, &out_name);
    write_json(&common.output_dir, &format!("{}.meta.json", sc.name), &meta)?;
    println!(
        "{}: {}, {} samples, energy drift {:.3e}",
        sc.name,
        describe(&traj.termination),
        traj.samples.len(),
        traj.drift().energy
    );
    Ok(termination_status(&traj.termination))
}

fn sweep(common: &Common, kappas: &[f64]) -> Outcome {
    let (sc, overrides) = load(common)?;
    let report = curvature_sweep(&sc, kappas);
    let mut files = Vec::new();
    for (i, row) in report.rows.iter().enumerate() {
        if let Some(traj) = &row.trajectory {
            let name = format!("{}_k{i:02}.{}", sc.name, common.format.extension());
            write_trajectory(traj, common.format, create(&common.output_dir, &name)?)?;
            files.push(json!({"kappa": row.kappa, "file": name, "status": row.status}));
        } else {
            files.push(json!({"kappa": row.kappa, "file": Value::Null, "status": row.status}));
        }
    }
    let summary = format!("{}_sweep.csv", sc.name);
    write_sweep_summary(&report, create(&common.output_dir, &summary)?)?;
    let meta = json!({
        "program": "curved-nbody",
        "version": env!("CARGO_PKG_VERSION"),
        "determinism": "no random numbers are used; identical inputs produce byte-identical outputs",
        "scenario": serde_json::to_value(&sc).unwrap_or(Value::Null),
        "overrides": overrides,
        "kappas": kappas,
        "runs": files,
        "summary": summary,
    });
    write_json(&common.output_dir, &format!("{}_sweep.meta.json", sc.name), &meta)?;
    for row in &report.rows {
        println!(
            "kappa {:>+10.3e}  {:<24} energy drift {:.2e}  momentum conserved {}  distance to flat {:.3e}",
            row.kappa, row.status, row.energy_drift, row.momentum_conserved, row.final_state_distance_to_flat
        );
    }
    let code = report
        .rows
        .iter()
        .map(|r| {
            if r.status == "completed" {
                0
            } else if r.status.starts_with("singular") {
                2
            } else if r.status.starts_with("failed") {
                3
            } else {
                1
            }
        })
        .max()
        .unwrap_or(0);
    let reason = match code {
        0 => "ok",
        1 => "validation",
        2 => "singular",
        _ => "numerical",
    };
    Ok((code, reason.into()))
}

fn compare(common: &Common, a: Formulation, b: Formulation) -> Outcome {
    let (mut sc, overrides) = load(common)?;
    // the scenario's own formulation is irrelevant here; validate for `a`
    sc.formulation = a;
    sc.validate()?;
    let cmp = compare_formulations(&sc, a, b)?;
    let name = format!("{}_compare_{}_{}.csv", sc.name, a.name(), b.name());
    {
        use std::io::Write;
        let mut f = create(&common.output_dir, &name)?;
        let io = |e: std::io::Error| Failure::from(Error::Io(e.to_string()));
        writeln!(f, "time,state_deviation,rhs_deviation").map_err(io)?;
        for ((t, s), r) in cmp.times.iter().zip(&cmp.state_deviation).zip(&cmp.rhs_deviation) {
            writeln!(f, "{t:.16e},{s:.16e},{r:.16e}").map_err(io)?;
        }
        f.flush().map_err(io)?;
    }
    let meta = json!({
        "program": "curved-nbody",
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": serde_json::to_value(&sc).unwrap_or(Value::Null),
        "overrides": overrides,
        "formulation_a": a.name(),
        "formulation_b": b.name(),
        "termination_a": serde_json::to_value(&cmp.termination_a).unwrap_or(Value::Null),
        "termination_b": serde_json::to_value(&cmp.termination_b).unwrap_or(Value::Null),
        "max_state_deviation": cmp.max_state_deviation(),
        "max_rhs_deviation": cmp.max_rhs_deviation(),
        "output": name,
    });
    write_json(&common.output_dir, &format!("{}_compare.meta.json", sc.name), &meta)?;
    println!("{} vs {} at kappa = {}", a.name(), b.name(), sc.kappa);
    println!("max state deviation: {:.6e}", cmp.max_state_deviation());
    println!("max rhs deviation:   {:.6e}", cmp.max_rhs_deviation());
    let (ca, ra) = termination_status(&cmp.termination_a);
    let (cb, rb) = termination_status(&cmp.termination_b);
    Ok(if ca >= cb { (ca, ra) } else { (cb, rb) })
}

fn check(common: &Common) -> Outcome {
    let (sc, _) = load(common)?;
    let traj = run_scenario(&sc)?;
    let reports: Vec<_> = traj.samples.iter().map(|s| s.conserved.clone()).collect();
    let audit = IntegralAudit::from_reports(sc.kappa, &reports, AUDIT_TOL)?;
    println!("{}: kappa = {}, t = 0 .. {}", sc.name, sc.kappa, traj.final_state().time);
    println!("{:<12} {:>24} {:>12}  status", "integral", "initial", "max drift");
    for row in &audit.rows {
        let status = match (row.expected, row.observed) {
            (true, true) => "conserved",
            (true, false) => "DRIFTING",
            (false, false) => "not conserved (kappa != 0)",
            (false, true) => "constant here, not an integral at kappa != 0",
        };
        println!("{:<12} {:>24.16e} {:>12.3e}  {status}", row.name, row.initial, row.max_drift);
    }
    println!("conserved: {}/{}", audit.conserved, audit.expected);
    Ok(termination_status(&traj.termination))
}

fn lift(common: &Common) -> Outcome {
    let (sc, _) = load(common)?;
    let s = sc.initial_state_for(sc.kappa, sc.formulation)?;
    let value = json!({
        "kappa": sc.kappa,
        "frame": serde_json::to_value(s.frame).unwrap_or(Value::Null),
        "masses": s.masses.as_slice(),
        "positions": s.positions,
        "velocities": s.velocities,
        "max_constraint_residual": s.max_constraint_residual(),
    });
    println!("{}", serde_json::to_string_pretty(&value).unwrap_or_default());
    Ok((0, "ok".into()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            eprintln!("STATUS {code} {}", if code == 0 { "ok" } else { "usage" });
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Simulate(c) => simulate(c),
        Command::Sweep { common, kappas } => sweep(common, kappas),
        Command::Compare {
            common,
            formulation_a,
            formulation_b,
        } => compare(common, *formulation_a, *formulation_b),
        Command::Check(c) => check(c),
        Command::Lift(c) => lift(c),
    };
    let (code, reason) = match result {
        Ok(ok) => ok,
        Err(f) => {
            eprintln!("error: {}", f.message);
            (f.code, f.reason)
        }
    };
    eprintln!("STATUS {code} {reason}");
    ExitCode::from(code)
}
