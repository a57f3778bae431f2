//! The topological term `κ = ⟨Ω| i d |Ω⟩`, its exterior derivative, the gauge
//! potentials in the orthogonal `(θ, ξ, η)` frame and line integrals of `κ`.

use crate::coherent::{a_terms, state_amplitudes, FiducialVector};
use crate::linalg::C64;
use crate::error::{Error, Result};
use crate::spin_core::EulerAngles;
use serde::{Deserialize, Serialize};

/// `κ = k_φ dφ + k_θ dθ + k_ψ dψ` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneForm {
    pub k_phi: f64,
    pub k_theta: f64,
    pub k_psi: f64,
}

impl OneForm {
    /// Contraction with a tangent vector `(φ̇, θ̇, ψ̇)`.
    pub fn apply(&self, rates: [f64; 3]) -> f64 {
        self.k_phi * rates[0] + self.k_theta * rates[1] + self.k_psi * rates[2]
    }
}

/// `dκ = w_θφ dθ∧dφ + w_φψ dφ∧dψ + w_ψθ dψ∧dθ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoForm {
    pub w_theta_phi: f64,
    pub w_phi_psi: f64,
    pub w_psi_theta: f64,
}

impl TwoForm {
    /// The antisymmetric matrix `F` with `dκ(u, v) = uᵀ F v` in the `(φ, θ, ψ)` basis.
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        let (a, b, c) = (self.w_theta_phi, self.w_phi_psi, self.w_psi_theta);
        // index order: 0 = φ, 1 = θ, 2 = ψ
        [[0.0, -a, b], [a, 0.0, -c], [-b, c, 0.0]]
    }

    /// Largest component difference.
    pub fn distance(&self, other: &TwoForm) -> f64 {
        (self.w_theta_phi - other.w_theta_phi)
            .abs()
            .max((self.w_phi_psi - other.w_phi_psi).abs())
            .max((self.w_psi_theta - other.w_psi_theta).abs())
    }
}

/// Orthonormal-frame components of `κ` in `(θ, ξ = φ + ψ, η = φ − ψ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugePotential {
    pub a_theta: f64,
    pub a_xi: f64,
    pub a_eta: f64,
}

impl GaugePotential {
    /// `κ = ½Ã_θ dθ + ½cos(θ/2) Ã_ξ dξ + ½sin(θ/2) Ã_η dη` on a displacement.
    pub fn contract(&self, theta: f64, d_theta: f64, d_xi: f64, d_eta: f64) -> f64 {
        0.5 * self.a_theta * d_theta
            + 0.5 * (theta / 2.0).cos() * self.a_xi * d_xi
            + 0.5 * (theta / 2.0).sin() * self.a_eta * d_eta
    }

    pub fn is_finite(&self) -> bool {
        self.a_theta.is_finite() && self.a_xi.is_finite() && self.a_eta.is_finite()
    }
}

pub fn one_form(fv: &FiducialVector, omega: EulerAngles) -> OneForm {
    let a = a_terms(fv, omega);
    let (st, ct) = omega.theta().sin_cos();
    OneForm {
        k_phi: a.a0 * ct - a.a1 * st,
        k_theta: a.a4,
        k_psi: a.a0,
    }
}

pub fn two_form(fv: &FiducialVector, omega: EulerAngles) -> TwoForm {
    let a = a_terms(fv, omega);
    let (st, ct) = omega.theta().sin_cos();
    TwoForm {
        w_theta_phi: -(a.a0 * st + a.a1 * ct),
        w_phi_psi: -a.a4 * st,
        w_psi_theta: a.a1,
    }
}

pub fn gauge_potential(fv: &FiducialVector, theta: f64, xi: f64, eta: f64) -> GaugePotential {
    let psi = 0.5 * (xi - eta);
    let phi = 0.5 * (xi + eta);
    // Only ψ enters A₁ and A₄; θ is used raw so the endpoints θ = 0, π are kept as given.
    let a = a_terms(fv, EulerAngles::new(phi, 0.0, psi));
    let (sh, ch) = (theta / 2.0).sin_cos();
    GaugePotential {
        a_theta: 2.0 * a.a4,
        a_xi: 2.0 * a.a0 * ch - 2.0 * a.a1 * sh,
        a_eta: -2.0 * a.a0 * sh - 2.0 * a.a1 * ch,
    }
}

/// `⟨Ω| i d/dt |Ω⟩ = κ(Ω̇)`, with `ħ = 1`.
pub fn kinetic_term(fv: &FiducialVector, omega: EulerAngles, omega_dot: [f64; 3]) -> f64 {
    one_form(fv, omega).apply(omega_dot)
}

/// `dκ` from central differences of the components of [`one_form`] with step `h`.
pub fn numeric_two_form(fv: &FiducialVector, omega: EulerAngles, h: f64) -> TwoForm {
    let k = |e: [f64; 3]| {
        let f = one_form(fv, omega.offset(e[0], e[1], e[2]));
        [f.k_phi, f.k_theta, f.k_psi]
    };
    // dk[i][j] = ∂_j k_i over (φ, θ, ψ)
    let mut dk = [[0.0; 3]; 3];
    for j in 0..3 {
        let mut e = [0.0; 3];
        e[j] = h;
        let (up, down) = (k(e), k(e.map(|x| -x)));
        for i in 0..3 {
            dk[i][j] = (up[i] - down[i]) / (2.0 * h);
        }
    }
    TwoForm {
        w_theta_phi: dk[0][1] - dk[1][0],
        w_phi_psi: dk[2][0] - dk[0][2],
        w_psi_theta: dk[1][2] - dk[2][1],
    }
}

/// `⟨Ω| i d/dt |Ω⟩` by central differences of the state along `Ω + t·rate`.
/// The imaginary part is a consistency check and should vanish.
pub fn numeric_kinetic_term(fv: &FiducialVector, omega: EulerAngles, rate: [f64; 3], h: f64) -> C64 {
    let at = |s: f64| state_amplitudes(fv, omega.offset(s * rate[0], s * rate[1], s * rate[2]));
    let dv = (at(h) - at(-h)) / C64::from(2.0 * h);
    C64::new(0.0, 1.0) * at(0.0).dotc(&dv)
}

/// One sample of a path in raw (unwrapped) Euler angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSample {
    pub t: f64,
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

impl PathSample {
    pub fn omega(&self) -> EulerAngles {
        EulerAngles::new(self.phi, self.theta, self.psi)
    }

    fn coords(&self) -> [f64; 3] {
        [self.phi, self.theta, self.psi]
    }
}

/// Angle rates at each sample: central differences inside, second-order
/// one-sided differences at the ends (first order if only two samples).
pub fn path_rates(path: &[PathSample]) -> Result<Vec<[f64; 3]>> {
    let n = path.len();
    if n < 2 {
        return Err(Error::PathTooShort { len: n });
    }
    let mut rates = vec![[0.0; 3]; n];
    let q: Vec<[f64; 3]> = path.iter().map(|p| p.coords()).collect();
    let t: Vec<f64> = path.iter().map(|p| p.t).collect();
    for k in 0..3 {
        if n == 2 {
            let v = (q[1][k] - q[0][k]) / (t[1] - t[0]);
            rates[0][k] = v;
            rates[1][k] = v;
            continue;
        }
        for i in 1..n - 1 {
            rates[i][k] = three_point(t[i - 1], t[i], t[i + 1], q[i - 1][k], q[i][k], q[i + 1][k], 1);
        }
        rates[0][k] = three_point(t[0], t[1], t[2], q[0][k], q[1][k], q[2][k], 0);
        rates[n - 1][k] =
            three_point(t[n - 3], t[n - 2], t[n - 1], q[n - 3][k], q[n - 2][k], q[n - 1][k], 2);
    }
    Ok(rates)
}

// Derivative of the quadratic through three points, evaluated at node `at`.
fn three_point(t0: f64, t1: f64, t2: f64, y0: f64, y1: f64, y2: f64, at: usize) -> f64 {
    let x = [t0, t1, t2][at];
    let l0 = ((x - t1) + (x - t2)) / ((t0 - t1) * (t0 - t2));
    let l2 = ((x - t0) + (x - t1)) / ((t2 - t0) * (t2 - t1));
    // The three weights sum to zero; differencing keeps constants exact.
    (y0 - y1) * l0 + (y2 - y1) * l2
}

/// Trapezoid rule for samples of a function of time.
pub fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2)
        .zip(y.windows(2))
        .map(|(tw, yw)| 0.5 * (tw[1] - tw[0]) * (yw[0] + yw[1]))
        .sum()
}

/// `∫ ⟨Ω| i d/dt |Ω⟩ dt` along a sampled path (raw real value, not reduced mod 2π).
pub fn geometric_phase(fv: &FiducialVector, path: &[PathSample]) -> Result<f64> {
    let rates = path_rates(path)?;
    let t: Vec<f64> = path.iter().map(|p| p.t).collect();
    let y: Vec<f64> = path
        .iter()
        .zip(&rates)
        .map(|(p, r)| kinetic_term(fv, p.omega(), *r))
        .collect();
    Ok(trapezoid(&t, &y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::random::{random_euler, random_fiducial, random_rates, seeded};
    use crate::spin_core::Spin;
    use std::f64::consts::PI;

#[test]
    fn single_weight_forms() {
        for two_s in [1, 2, 5] {
            let spin = Spin::new(two_s);
            for i in 0..spin.dim() {
                let two_m = spin.two_m(i);
                let m = two_m as f64 / 2.0;
                let fv = FiducialVector::basis(spin, two_m).unwrap();
                let o = EulerAngles::new(0.7, 1.1, 2.9);
                let k = one_form(&fv, o);
                assert_eq!(k.k_theta, 0.0);
                assert_eq!(k.k_psi, m);
                assert_eq!(k.k_phi, m * 1.1f64.cos());
                let w = two_form(&fv, o);
                assert_eq!((w.w_theta_phi, w.w_phi_psi, w.w_psi_theta), (-m * 1.1f64.sin(), 0.0, 0.0));
                let g = gauge_potential(&fv, 1.1, 0.3, -0.4);
                assert_eq!(g.a_theta, 0.0);
                assert!((g.a_xi - 2.0 * m * 0.55f64.cos()).abs() < 1e-15);
                assert!((g.a_eta + 2.0 * m * 0.55f64.sin()).abs() < 1e-15);
                let w0 = two_form(&fv, EulerAngles::new(0.7, 0.0, 2.9));
                assert_eq!(w0.w_theta_phi, 0.0);
            }
        }
    }

    #[test]
    fn real_fiducial_at_zero_psi_has_no_theta_component() {
        let fv = FiducialVector::new(Spin::new(3), vec![c(0.2, 0.0), c(-0.5, 0.0), c(0.7, 0.0), c(0.1, 0.0)])
            .unwrap();
        assert_eq!(one_form(&fv, EulerAngles::new(1.0, 0.5, 0.0)).k_theta, 0.0);
    }

    #[test]
    fn kinetic_term_matches_finite_differences() {
        let mut rng = seeded(31);
        for _ in 0..50 {
            let spin = Spin::new(rand::Rng::random_range(&mut rng, 1..=6));
            let fv = random_fiducial(&mut rng, spin);
            let o = random_euler(&mut rng);
            let rate = random_rates(&mut rng);
            let analytic = kinetic_term(&fv, o, rate);
            let numeric = numeric_kinetic_term(&fv, o, rate, 1e-5);
            assert!((analytic - numeric.re).abs() < 1e-6);
            assert!(numeric.im.abs() < 1e-9);
        }
        let fv = random_fiducial(&mut rng, Spin::new(4));
        assert_eq!(kinetic_term(&fv, random_euler(&mut rng), [0.0; 3]), 0.0);
    }

    #[test]
    fn two_form_is_exterior_derivative() {
        let mut rng = seeded(32);
        for _ in 0..30 {
            let spin = Spin::new(rand::Rng::random_range(&mut rng, 1..=6));
            let fv = random_fiducial(&mut rng, spin);
            let o = random_euler(&mut rng);
            assert!(two_form(&fv, o).distance(&numeric_two_form(&fv, o, 1e-5)) < 1e-6);
        }
    }

    #[test]
    fn gauge_potential_reconstructs_one_form() {
        let mut rng = seeded(33);
        for _ in 0..50 {
            let two_s = rand::Rng::random_range(&mut rng, 1..=6);
            let fv = random_fiducial(&mut rng, Spin::new(two_s));
            let o = random_euler(&mut rng);
            let d = random_rates(&mut rng);
            let g = gauge_potential(&fv, o.theta(), o.phi() + o.psi(), o.phi() - o.psi());
            let lhs = g.contract(o.theta(), d[1], d[0] + d[2], d[0] - d[2]);
            assert!((lhs - one_form(&fv, o).apply(d)).abs() < 1e-10);
        }
    }

    #[test]
    fn gauge_potential_is_finite_at_poles() {
        let mut rng = seeded(34);
        for _ in 0..50 {
            let two_s = rand::Rng::random_range(&mut rng, 1..=6);
            let fv = random_fiducial(&mut rng, Spin::new(two_s));
            for &th in &[0.0, PI] {
                let g = gauge_potential(&fv, th, 0.4, 1.3);
                assert!(g.is_finite());
                assert!(g.a_xi.abs() + g.a_eta.abs() + g.a_theta.abs() < 20.0);
            }
        }
    }

    fn latitude_loop(theta: f64, n: usize) -> Vec<PathSample> {
        (0..=n)
            .map(|k| {
                let t = k as f64 / n as f64;
                PathSample { t, phi: 2.0 * PI * t, theta, psi: 0.3 }
            })
            .collect()
    }

    #[test]
    fn latitude_loop_phase() {
        let spin = Spin::new(3);
        let fv = FiducialVector::basis(spin, 1).unwrap();
        let th0 = 0.9;
        let phase = geometric_phase(&fv, &latitude_loop(th0, 64)).unwrap();
        assert!((phase - 2.0 * PI * 0.5 * th0.cos()).abs() < 1e-12);
        // Stokes over the cap: ∮(θ₀) − ∮(0) = ∬ w_θφ dθ dφ = −2πm(1 − cos θ₀).
        let at_pole = geometric_phase(&fv, &latitude_loop(0.0, 64)).unwrap();
        let flux = -2.0 * PI * 0.5 * (1.0 - th0.cos());
        assert!(((phase - at_pole) - flux).abs() < 1e-12);
    }

    #[test]
    fn constant_path_has_no_phase() {
        let fv = random_fiducial(&mut seeded(35), Spin::new(2));
        let path: Vec<_> = (0..5).map(|k| PathSample { t: k as f64, phi: 1.0, theta: 0.4, psi: 2.0 }).collect();
        assert_eq!(geometric_phase(&fv, &path).unwrap(), 0.0);
        assert_eq!(geometric_phase(&fv, &path[..1]), Err(Error::PathTooShort { len: 1 }));
    }

    #[test]
    fn stokes_on_a_theta_psi_rectangle() {
        // Boundary of [θ₀, θ₁] × [ψ₀, ψ₁] at fixed φ, counter-clockwise in (ψ, θ).
        let mut rng = seeded(36);
        let fv = random_fiducial(&mut rng, Spin::new(4));
        let (th0, th1, ps0, ps1, phi) = (0.4, 1.5, 0.2, 2.0, 0.8);
        let n = 400;
        let edge = |a: (f64, f64), b: (f64, f64)| -> f64 {
            let path: Vec<_> = (0..=n)
                .map(|k| {
                    let s = k as f64 / n as f64;
                    PathSample { t: s, phi, theta: a.0 + s * (b.0 - a.0), psi: a.1 + s * (b.1 - a.1) }
                })
                .collect();
            geometric_phase(&fv, &path).unwrap()
        };
        let circulation = edge((th0, ps0), (th0, ps1))
            + edge((th0, ps1), (th1, ps1))
            + edge((th1, ps1), (th1, ps0))
            + edge((th1, ps0), (th0, ps0));
        // Orientation (ψ then θ) picks the dψ∧dθ coefficient.
        let (x, w) = crate::coherent::gauss_legendre(20);
        let mut flux = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            for (yj, wj) in x.iter().zip(&w) {
                let th = 0.5 * (th1 - th0) * (xi + 1.0) + th0;
                let ps = 0.5 * (ps1 - ps0) * (yj + 1.0) + ps0;
                let wf = two_form(&fv, EulerAngles::new(phi, th, ps));
                flux += wi * wj * wf.w_psi_theta * 0.25 * (th1 - th0) * (ps1 - ps0);
            }
        }
        assert!((circulation - flux).abs() < 1e-4, "{circulation} vs {flux}");
    }
}
