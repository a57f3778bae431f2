use super::{h_expectation, h_ratio, HamiltonianSpec};
use crate::coherent::{a_terms, FiducialVector};
use crate::error::{Error, Result};
use crate::geometry::{kinetic_term, path_rates, trapezoid, PathSample};
use crate::linalg::{C64, I};
use crate::spin_core::EulerAngles;

/// `S = ∫ (ħ ⟨Ω|i∂ₜ|Ω⟩ − H(Ω, t)) dt` by the trapezoid rule over the samples.
pub fn action_along_path(fv: &FiducialVector, spec: &HamiltonianSpec, path: &[PathSample], hbar: f64) -> Result<f64> {
    let rates = path_rates(path)?;
    let t: Vec<f64> = path.iter().map(|p| p.t).collect();
    let mut y = Vec::with_capacity(path.len());
    for (p, r) in path.iter().zip(&rates) {
        let omega = p.omega();
        y.push(hbar * kinetic_term(fv, omega, *r) - h_expectation(fv, spec, omega, p.t)?);
    }
    Ok(trapezoid(&t, &y))
}

/// First-order expansion of `⟨Ω + ΔΩ|Ω⟩`, with `delta = (Δφ, Δθ, Δψ)`.
pub fn infinitesimal_overlap(fv: &FiducialVector, omega: EulerAngles, delta: [f64; 3]) -> C64 {
    let [d_phi, d_theta, d_psi] = delta;
    let (st, ct) = omega.theta().sin_cos();
    let g = fv.raising_moment() * C64::from_polar(1.0, omega.psi());
    let first = I * fv.a0() * (d_phi * ct + d_psi);
    // Σ f c_m c*_{m−1} e^{−iψ} = conj(g)
    let bracket = g.conj() * (d_theta + I * d_phi * st) - g * (d_theta - I * d_phi * st);
    C64::new(1.0, 0.0) + first - bracket * 0.5
}

/// Time-sliced action over consecutive path samples: the kinetic increments at
/// the later point of each step minus `Δt · H(Ω_j, Ω_{j−1}; t_{j−1})`.
pub fn discrete_action(fv: &FiducialVector, spec: &HamiltonianSpec, path: &[PathSample], hbar: f64) -> Result<C64> {
    if path.len() < 2 {
        return Err(Error::PathTooShort { len: path.len() });
    }
    let mut total = C64::new(0.0, 0.0);
    for w in path.windows(2) {
        let (prev, cur) = (w[0], w[1]);
        let omega = cur.omega();
        let (st, ct) = omega.theta().sin_cos();
        let a = a_terms(fv, omega);
        let (d_phi, d_theta, d_psi) = (cur.phi - prev.phi, cur.theta - prev.theta, cur.psi - prev.psi);
        let kinetic = a.a0 * (d_phi * ct + d_psi) - a.a1 * d_phi * st + a.a4 * d_theta;
        let h = h_ratio(fv, spec, omega, prev.omega(), prev.t)?;
        total += hbar * kinetic - (cur.t - prev.t) * h;
    }
    Ok(total)
}
