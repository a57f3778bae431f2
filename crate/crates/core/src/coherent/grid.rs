use crate::spin_core::{EulerAngles, Spin};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[−1, 1]`, Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

// (P_n(z), P_n'(z)) by the three-term recurrence.
fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Product rule on the Euler-angle box: Gauss–Legendre in `cos θ`, uniform in
/// `φ` and `ψ` over `[0, 2π)`. Weights integrate `sin θ dφ dθ dψ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    pub n_psi: usize,
    pub cos_theta: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_weights: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

impl QuadratureGrid {
    pub fn new(n_theta: usize, n_phi: usize, n_psi: usize) -> Self {
        assert!(n_theta > 0 && n_phi > 0 && n_psi > 0, "grid sizes must be positive");
        let (cos_theta, theta_weights) = gauss_legendre(n_theta);
        let theta = cos_theta.iter().map(|x| x.clamp(-1.0, 1.0).acos()).collect();
        let phi = (0..n_phi).map(|k| 2.0 * PI * k as f64 / n_phi as f64).collect();
        let psi = (0..n_psi).map(|k| 2.0 * PI * k as f64 / n_psi as f64).collect();
        QuadratureGrid {
            n_theta,
            n_phi,
            n_psi,
            cos_theta,
            theta,
            theta_weights,
            phi,
            psi,
        }
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi * self.n_psi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Split a flat index into (θ, φ, ψ) node indices; ψ varies fastest.
    pub fn split(&self, idx: usize) -> (usize, usize, usize) {
        let iq = idx % self.n_psi;
        let rest = idx / self.n_psi;
        (rest / self.n_phi, rest % self.n_phi, iq)
    }

    pub fn point(&self, idx: usize) -> (EulerAngles, f64) {
        let (it, ip, iq) = self.split(idx);
        (
            EulerAngles::new(self.phi[ip], self.theta[it], self.psi[iq]),
            self.weight(it),
        )
    }

    pub fn weight(&self, theta_index: usize) -> f64 {
        self.theta_weights[theta_index]
            * (2.0 * PI / self.n_phi as f64)
            * (2.0 * PI / self.n_psi as f64)
    }

    pub fn total_weight(&self) -> f64 {
        (0..self.n_theta).map(|it| self.weight(it)).sum::<f64>() * (self.n_phi * self.n_psi) as f64
    }

    /// Largest `2s` for which products of two spin-`s` rotation matrices are
    /// integrated exactly.
    pub fn exact_two_s(&self) -> u32 {
        let by_theta = self.n_theta - 1;
        let by_phi = (self.n_phi - 1) / 2;
        let by_psi = (self.n_psi - 1) / 2;
        by_theta.min(by_phi).min(by_psi) as u32
    }

    pub fn is_exact_for(&self, spin: Spin) -> bool {
        spin.two_s <= self.exact_two_s()
    }
}

/// `n_θ = ⌈k(2s+2)⌉`, `n_φ = n_ψ = ⌈k(4s+3)⌉` for oversampling factor `k ≥ 1`.
pub fn build_grid(spin_max: Spin, oversample: f64) -> QuadratureGrid {
    let k = oversample.max(1.0);
    let s = spin_max.s();
    let n_theta = (k * (2.0 * s + 2.0) - 1e-9).ceil() as usize;
    let n_ang = (k * (4.0 * s + 3.0) - 1e-9).ceil() as usize;
    QuadratureGrid::new(n_theta, n_ang, n_ang)
}

/// Like [`build_grid`] but with odd azimuthal node counts.
///
/// With an even count every node has an azimuthal antipode on the grid, and
/// for many fiducial vectors such pairs are exactly orthogonal. Ratio-type
/// path-integral kernels cannot be evaluated on those pairs, so chains built
/// on this grid avoid them.
pub fn build_path_grid(spin_max: Spin, oversample: f64) -> QuadratureGrid {
    let g = build_grid(spin_max, oversample);
    let odd = |n: usize| n | 1;
    QuadratureGrid::new(g.n_theta, odd(g.n_phi), odd(g.n_psi))
}

pub const DEFAULT_OVERSAMPLE: f64 = 1.2;
