#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use curved_nbody::geometry::{pair_separation, signed_dot, AmbientVec, Curvature, Frame};
use curved_nbody::scenario::Scenario;
use curved_nbody::{MassList, SystemState};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

pub fn corpus(name: &str) -> Scenario {
    Scenario::load(&corpus_path(name)).unwrap()
}

/// Random on-manifold centered-frame state, O(1) scaled, with every pair
/// kept away from collision and (κ > 0) from antipodal configurations.
pub fn random_centered_state(r: &mut ChaCha8Rng, n: usize, c: Curvature) -> SystemState {
    let rad = c.radius().unwrap();
    let k = c.kappa();
    loop {
        let masses = MassList::new((0..n).map(|_| r.gen_range(0.2..2.0)).collect()).unwrap();
        let positions: Vec<AmbientVec> = (0..n)
            .map(|_| {
                if k > 0.0 {
                    let v = AmbientVec::new(
                        r.gen_range(-1.0..1.0),
                        r.gen_range(-1.0..1.0),
                        r.gen_range(-1.0..1.0),
                        r.gen_range(-1.0..1.0),
                    );
                    (rad / v.euclidean_norm()) * v
                } else {
                    let (x, y, z) = (
                        r.gen_range(-1.5..1.5),
                        r.gen_range(-1.5..1.5),
                        r.gen_range(-1.5..1.5),
                    );
                    AmbientVec::new(x, y, z, (rad * rad + x * x + y * y + z * z).sqrt())
                }
            })
            .collect();
        let velocities: Vec<AmbientVec> = positions
            .iter()
            .map(|q| {
                let v = AmbientVec::new(
                    r.gen_range(-1.0..1.0),
                    r.gen_range(-1.0..1.0),
                    r.gen_range(-1.0..1.0),
                    r.gen_range(-1.0..1.0),
                );
                v - (k * signed_dot(q, &v, c)) * *q
            })
            .collect();
        let mut ok = true;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = pair_separation(&positions[i], &positions[j], c).unwrap();
                ok &= d > 0.1 * rad.min(1.0);
                if k > 0.0 {
                    ok &= 1.0 - k * d * d / 4.0 > 0.01;
                }
            }
        }
        if ok {
            return SystemState::new(masses, positions, velocities, 0.0, c, Frame::Centered).unwrap();
        }
    }
}
