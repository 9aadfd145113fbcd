//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::f64::consts::PI;

use rand::Rng;

use common::{corpus, random_centered_state, rng};
use curved_nbody::conserved::{hybrid_momenta, wedge_momenta, IntegralAudit, AUDIT_TOL};
use curved_nbody::dynamics::{
    accel_centered, accel_intrinsic_2d, accel_newtonian, accel_northpole_extrinsic, accel_unified,
    section_coordinates, Formulation,
};
use curved_nbody::geometry::{
    frame_shift, section_point, signed_dot, stereo_project_jet, AmbientVec, Curvature, Frame,
};
use curved_nbody::integrators::{integrate, IntegratorConfig, Projection, Termination};
use curved_nbody::potentials::{
    chordal_accel_terms, chordal_potential, cotangent_gradient, cotangent_potential, MassList,
};
use curved_nbody::scenario::{compare_formulations, flat_distance};
use curved_nbody::SystemState;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn potential_identity() -> Outcome {
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for k in [2.0, -2.0, 1.0, -1.0, 0.1, -0.1] {
        let c = Curvature::new(k);
        for _ in 0..100 {
            let n = r.gen_range(2..=8);
            let s = random_centered_state(&mut r, n, c);
            let u = cotangent_potential(&s.positions, &s.masses, c).unwrap();
            let np = s.to_frame(Frame::NorthPole).unwrap();
            let v = chordal_potential(&np.positions, &np.masses, c, Frame::NorthPole).unwrap();
            worst = worst.max((u - v).abs() / v.abs());
        }
    }
    outcome(worst < 1e-10, format!("max relative |U - V| / |V| = {worst:.2e}"))
}

fn cotangent_law() -> Outcome {
    let mut worst = 0.0f64;
    let mut points = 0;
    let masses = MassList::new(vec![1.0, 1.0]).unwrap();
    for k in [4.0, 1.0, 0.3, -0.3, -1.0, -4.0] {
        let c = Curvature::new(k);
        let s = c.sqrt_abs();
        let rad = 1.0 / s;
        let d_max = if k > 0.0 { PI / s } else { 6.0 / s };
        for step in 1..200 {
            let d = d_max * step as f64 / 200.0;
            let theta = d * s;
            let q2 = if k > 0.0 {
                AmbientVec::new(rad * theta.sin(), 0.0, 0.0, rad * theta.cos())
            } else {
                AmbientVec::new(rad * theta.sinh(), 0.0, 0.0, rad * theta.cosh())
            };
            let q1 = AmbientVec::new(0.0, 0.0, 0.0, rad);
            let pos = [frame_shift(&q1, c).unwrap(), frame_shift(&q2, c).unwrap()];
            let v = chordal_potential(&pos, &masses, c, Frame::NorthPole).unwrap();
            let expect = if k > 0.0 { s / (s * d).tan() } else { s / (s * d).tanh() };
            worst = worst.max((v - expect).abs() / expect.abs().max(1.0));
            points += 1;
        }
    }
    outcome(worst < 1e-10, format!("{points} grid points, max error {worst:.2e}"))
}

fn formulation_equivalence() -> Outcome {
    let mut r = rng(3);
    let mut worst_c = 0.0f64;
    let mut worst_np = 0.0f64;
    for k in [1.0, -1.0, 0.25, -0.25] {
        let c = Curvature::new(k);
        for _ in 0..100 {
            let n = r.gen_range(2..=6);
            let centered = random_centered_state(&mut r, n, c);
            let np = centered.to_frame(Frame::NorthPole).unwrap();
            let u = accel_unified(&np).unwrap();
            let ac = accel_centered(&centered).unwrap();
            let an = accel_northpole_extrinsic(&np).unwrap();
            for i in 0..n {
                let scale = u[i].max_abs().max(1.0);
                worst_c = worst_c.max((u[i] - ac[i]).max_abs() / scale);
                worst_np = worst_np.max((u[i] - an[i]).max_abs() / scale);
            }
        }
    }
    outcome(
        worst_c < 1e-10 && worst_np < 1e-10,
        format!("unified vs centered {worst_c:.2e}, unified vs north-pole extrinsic {worst_np:.2e}"),
    )
}

fn flat_specialization() -> Outcome {
    let mut r = rng(4);
    let mut worst = 0.0f64;
    let c = Curvature::flat();
    for _ in 0..500 {
        let n = r.gen_range(2..=8);
        let masses = MassList::new((0..n).map(|_| r.gen_range(0.1..3.0)).collect()).unwrap();
        let pos = (0..n)
            .map(|_| AmbientVec::new(r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0), 0.0))
            .collect();
        let vel = (0..n)
            .map(|_| AmbientVec::new(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0), 0.0))
            .collect();
        let s = SystemState::new(masses, pos, vel, 0.0, c, Frame::NorthPole).unwrap();
        let a = accel_unified(&s).unwrap();
        let b = accel_newtonian(&s).unwrap();
        for (x, y) in a.iter().zip(&b) {
            worst = worst.max((*x - *y).max_abs());
        }
    }
    outcome(worst <= 1e-15, format!("500 random flat states, max component gap {worst:.2e}"))
}

fn kappa_continuity() -> Outcome {
    let sc = corpus("three_body.scn");
    let cfg = IntegratorConfig::adaptive(1e-13, 1e-15);
    let run = |k: f64| {
        let s0 = sc.initial_state_at(k).unwrap();
        let t = integrate(&s0, Formulation::Unified, &cfg, sc.t_end, sc.t_end).unwrap();
        assert_eq!(t.termination, Termination::Completed);
        t.final_state().clone()
    };
    let flat = run(0.0);
    let mut ok = true;
    let mut parts = Vec::new();
    for sign in [1.0, -1.0] {
        let d: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|k| flat_distance(&run(sign * k), &flat))
            .collect();
        let ratios = [d[0] / d[1], d[1] / d[2]];
        ok &= ratios.iter().all(|x| (5.0..=20.0).contains(x));
        parts.push(format!(
            "{} ratios {:.2}, {:.2}",
            if sign > 0.0 { "κ>0" } else { "κ<0" },
            ratios[0],
            ratios[1]
        ));
    }
    outcome(ok, parts.join("; "))
}

fn conservation_drift() -> Outcome {
    let sc = corpus("curved_three_body.scn");
    let cfg = IntegratorConfig::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [sc.kappa, -sc.kappa] {
        let s0 = sc.initial_state_at(k).unwrap();
        let t = integrate(&s0, Formulation::Unified, &cfg, 10.0, 0.1).unwrap();
        let d = t.drift();
        let pass = t.termination == Termination::Completed
            && d.energy < 1e-7
            && d.max_wedge() < 1e-7
            && t.max_residual < 1e-9;
        ok &= pass;
        parts.push(format!(
            "κ={k}: energy {:.1e}, momenta {:.1e}, residual {:.1e}",
            d.energy,
            d.max_wedge(),
            t.max_residual
        ));
    }
    outcome(ok, parts.join("; "))
}

fn bifurcation_audit() -> Outcome {
    let sc = corpus("asymmetric_two_body.scn");
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [0.0, 0.5, -0.5] {
        let s0 = sc.initial_state_at(k).unwrap();
        let t = integrate(&s0, Formulation::Unified, &sc.integrator, 2.0, 0.05).unwrap();
        let reports: Vec<_> = t.samples.iter().map(|s| s.conserved.clone()).collect();
        let audit = IntegralAudit::from_reports(k, &reports, AUDIT_TOL).unwrap();
        let variation = t.drift().max_linear_momentum();
        let pass = t.termination == Termination::Completed
            && audit.conserved == audit.expected
            && audit.expected == if k == 0.0 { 10 } else { 7 }
            && if k == 0.0 { variation < 1e-10 } else { variation > 1e-3 };
        ok &= pass;
        parts.push(format!(
            "κ={k}: {}/{} integrals, momentum variation {variation:.1e}",
            audit.conserved, audit.expected
        ));
    }
    outcome(ok, parts.join("; "))
}

fn hybrid_identity() -> Outcome {
    let mut r = rng(8);
    let mut worst = 0.0f64;
    for k in [2.0, -2.0, 1.0, -1.0, 0.25, -0.25] {
        let c = Curvature::new(k);
        for _ in 0..100 {
            let n = r.gen_range(1..=6);
            let centered = random_centered_state(&mut r, n, c);
            let np = centered.to_frame(Frame::NorthPole).unwrap();
            let h = hybrid_momenta(&np).unwrap();
            let w = wedge_momenta(&centered).unwrap();
            for i in 0..3 {
                worst = worst.max((h[i] - c.sqrt_abs() * w[i]).abs());
            }
        }
    }
    outcome(worst < 1e-12, format!("600 random states, max gap {worst:.2e}"))
}

/// Geodesic through `q` with unit initial velocity `t` at parameter `e`.
fn geodesic(q: &AmbientVec, t: &AmbientVec, e: f64, c: Curvature) -> AmbientVec {
    let s = c.sqrt_abs();
    if c.kappa() > 0.0 {
        (s * e).cos() * *q + ((s * e).sin() / s) * *t
    } else {
        (s * e).cosh() * *q + ((s * e).sinh() / s) * *t
    }
}

/// Orthonormal (in the signed metric) basis of the tangent space at `q`.
fn tangent_basis(q: &AmbientVec, c: Curvature) -> Vec<AmbientVec> {
    let mut basis: Vec<AmbientVec> = Vec::new();
    let k = c.kappa();
    for e in [
        AmbientVec::new(1.0, 0.0, 0.0, 0.0),
        AmbientVec::new(0.0, 1.0, 0.0, 0.0),
        AmbientVec::new(0.0, 0.0, 1.0, 0.0),
        AmbientVec::new(0.0, 0.0, 0.0, 1.0),
    ] {
        let mut v = e - (k * signed_dot(q, &e, c)) * *q;
        for b in &basis {
            v = v - signed_dot(b, &v, c) * *b;
        }
        let n2 = signed_dot(&v, &v, c);
        if n2 > 1e-6 && basis.len() < 3 {
            basis.push((1.0 / n2.sqrt()) * v);
        }
    }
    basis
}

fn gradient_correctness() -> Outcome {
    let mut r = rng(9);
    let mut worst_u = 0.0f64;
    let mut worst_v = 0.0f64;
    let h = 1e-5;
    for k in [2.0, -2.0, 1.0, -1.0, 0.25, -0.25] {
        let c = Curvature::new(k);
        for _ in 0..30 {
            let n = r.gen_range(2..=5);
            let s = random_centered_state(&mut r, n, c);
            let grad = cotangent_gradient(&s.positions, &s.masses, c).unwrap();
            let np = s.to_frame(Frame::NorthPole).unwrap();
            let force = chordal_accel_terms(&np.positions, &np.masses, c, Frame::NorthPole).unwrap();
            for i in 0..n {
                let mut fd = Vec::new();
                let mut an_u = Vec::new();
                let mut an_v = Vec::new();
                for t in tangent_basis(&s.positions[i], c) {
                    let at = |e: f64| {
                        let mut p = s.positions.clone();
                        p[i] = geodesic(&s.positions[i], &t, e, c);
                        let u = cotangent_potential(&p, &s.masses, c).unwrap();
                        let shifted: Vec<_> = p.iter().map(|q| frame_shift(q, c).unwrap()).collect();
                        let v = chordal_potential(&shifted, &s.masses, c, Frame::NorthPole).unwrap();
                        (u, v)
                    };
                    let (up, vp) = at(h);
                    let (um, vm) = at(-h);
                    fd.push(((up - um) / (2.0 * h), (vp - vm) / (2.0 * h)));
                    an_u.push(signed_dot(&grad[i], &t, c));
                    an_v.push(s.masses[i] * signed_dot(&force[i], &t, c));
                }
                let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
                let diff_u: Vec<f64> = fd.iter().zip(&an_u).map(|(f, a)| f.0 - a).collect();
                let diff_v: Vec<f64> = fd.iter().zip(&an_v).map(|(f, a)| f.1 - a).collect();
                worst_u = worst_u.max(norm(&diff_u) / norm(&an_u));
                worst_v = worst_v.max(norm(&diff_v) / norm(&an_v));
            }
        }
    }
    outcome(
        worst_u < 1e-6 && worst_v < 1e-6,
        format!("cotangent gradient {worst_u:.2e}, chordal force {worst_v:.2e}"),
    )
}

fn integrator_order() -> Outcome {
    let s0 = SystemState::new(
        MassList::new(vec![1.0]).unwrap(),
        vec![AmbientVec::ZERO],
        vec![AmbientVec::new(0.6, 0.8, 0.0, 0.0)],
        0.0,
        Curvature::new(1.0),
        Frame::NorthPole,
    )
    .unwrap();
    let period = 2.0 * PI;
    let hs = [0.1, 0.05, 0.025, 0.0125];
    let errs: Vec<f64> = hs
        .iter()
        .map(|&h| {
            let cfg = IntegratorConfig::fixed(h).with_projection(Projection::None);
            let t = integrate(&s0, Formulation::Unified, &cfg, period, period).unwrap();
            let f = t.final_state();
            (f.positions[0] - s0.positions[0])
                .max_abs()
                .max((f.velocities[0] - s0.velocities[0]).max_abs())
        })
        .collect();
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 4.0, ys.iter().sum::<f64>() / 4.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    outcome(
        (slope - 4.0).abs() <= 0.3,
        format!("slope {slope:.3}, errors {:?}", errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>()),
    )
}

fn intrinsic_cross_check() -> Outcome {
    let sc = corpus("sphere_two_body_2d.scn");
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [1.0, -1.0] {
        let c = Curvature::new(k);
        let s0 = sc.initial_state_for(k, Formulation::CenteredExtrinsic).unwrap();
        let t = integrate(&s0, Formulation::CenteredExtrinsic, &sc.integrator, 1.0, 0.05).unwrap();
        let mut worst = 0.0f64;
        for sample in &t.samples {
            let s = &sample.state;
            let acc = accel_centered(s).unwrap();
            let (zs, zds) = section_coordinates(s).unwrap();
            let predicted = accel_intrinsic_2d(&zs, &zds, &s.masses, c).unwrap();
            for i in 0..s.len() {
                let (_, _, zdd) = stereo_project_jet(
                    section_point(&s.positions[i], c),
                    section_point(&s.velocities[i], c),
                    section_point(&acc[i], c),
                    c,
                )
                .unwrap();
                worst = worst.max((zdd - predicted[i]).norm() / zdd.norm().max(1.0));
            }
        }
        let mut sck = sc.clone();
        sck.kappa = k;
        let cmp = compare_formulations(&sck, Formulation::Intrinsic2D, Formulation::CenteredExtrinsic).unwrap();
        let pass = t.termination == Termination::Completed
            && worst < 1e-6
            && cmp.max_state_deviation() < 1e-6;
        ok &= pass;
        parts.push(format!(
            "κ={k}: equation residual {worst:.1e}, trajectory gap {:.1e}",
            cmp.max_state_deviation()
        ));
    }
    outcome(ok, parts.join("; "))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("potential identity", potential_identity),
        ("cotangent law", cotangent_law),
        ("formulation equivalence", formulation_equivalence),
        ("flat specialization", flat_specialization),
        ("kappa continuity", kappa_continuity),
        ("conservation drift", conservation_drift),
        ("bifurcation audit", bifurcation_audit),
        ("hybrid momentum identity", hybrid_identity),
        ("gradient correctness", gradient_correctness),
        ("integrator order", integrator_order),
        ("intrinsic cross-check", intrinsic_cross_check),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {:<26} {}  {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
