//! Seeded random inputs for tests and experiments.

use crate::coherent::FiducialVector;
use crate::linalg::C64;
use crate::spin_core::{EulerAngles, Spin};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Haar-distributed Euler angles (cos θ uniform).
pub fn random_euler<R: Rng>(rng: &mut R) -> EulerAngles {
    let phi = rng.random_range(0.0..2.0 * PI);
    let psi = rng.random_range(0.0..2.0 * PI);
    let cos_theta: f64 = rng.random_range(-1.0..=1.0);
    EulerAngles::new(phi, cos_theta.acos(), psi)
}

/// Euler angles with `θ` uniform in `[lo, hi]`.
pub fn random_euler_theta_in<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> EulerAngles {
    let phi = rng.random_range(0.0..2.0 * PI);
    let psi = rng.random_range(0.0..2.0 * PI);
    let theta = rng.random_range(lo..=hi);
    EulerAngles::new(phi, theta, psi)
}

pub fn random_complex_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        })
        .collect()
}

/// Fiducial vector uniform on the unit sphere of the spin space.
pub fn random_fiducial<R: Rng>(rng: &mut R, spin: Spin) -> FiducialVector {
    loop {
        let raw = random_complex_vector(rng, spin.dim());
        if let Ok(fv) = FiducialVector::new(spin, raw) {
            return fv;
        }
    }
}

/// Random angle increments with each component in `[−1, 1]`.
pub fn random_rates<R: Rng>(rng: &mut R) -> [f64; 3] {
    [
        rng.random_range(-1.0..=1.0),
        rng.random_range(-1.0..=1.0),
        rng.random_range(-1.0..=1.0),
    ]
}
