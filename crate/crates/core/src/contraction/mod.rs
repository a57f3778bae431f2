//! Canonical coherent states and the Holstein–Primakoff high-spin limit in
//! which spin coherent states become displaced Fock states.
//!
//! The map is `S₊ → √(2s) a⁺`, `S₃ → −s + a⁺a`, with levels reindexed as
//! `n = m + s` and the chart point `z₊ = α/√(2s)`, `z₋ = −z₊*`.

mod fock;

pub use fock::{
    adequate_truncation, annihilation, canonical_cs, ccs_canonical_rhs, ccs_energy, ccs_kinetic_term,
    ccs_resolution_residual, displacement_matrix, dns_amplitudes, dns_element, dns_number_check,
    generalized_eigen_check, laguerre, BosonHamiltonian, CanonicalCS, FockVector,
};

use crate::coherent::{state_amplitudes, FiducialVector};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::parametrizations::{kinetic_term_z, z_to_omega, ZCoords};
use crate::spin_core::{ladder_factor, EulerAngles, Spin};
use serde::{Deserialize, Serialize};

/// Largest `|z₊| = |α|/√(2s)` accepted by the contraction map.
pub const POLE_MARGIN: f64 = 0.5;

// Fock level n ↔ basis index 2s − n (m = n − s, basis ordered m-descending).
fn index_of_level(spin: Spin, n: usize) -> usize {
    spin.two_s as usize - n
}

/// Spin fiducial vector with `c_m = c_{n = m+s}`; levels above `2s` must vanish.
pub fn spin_fiducial_from_fock(spin: Spin, fock: &FockVector) -> Result<FiducialVector> {
    let dim = spin.dim();
    if fock.degree() >= dim {
        return Err(Error::InvalidArgument(format!(
            "Fock vector of degree {} does not fit in spin {spin}",
            fock.degree()
        )));
    }
    let mut raw = vec![C64::new(0.0, 0.0); dim];
    for (n, c) in fock.coeffs().iter().enumerate().take(dim) {
        raw[index_of_level(spin, n)] = *c;
    }
    FiducialVector::new(spin, raw)
}

/// Fock vector with `c_n = c_{m = n−s}` (all `2s+1` levels).
pub fn fock_from_spin_fiducial(fv: &FiducialVector) -> FockVector {
    let spin = fv.spin();
    let coeffs = (0..spin.dim()).map(|n| fv.coeffs()[index_of_level(spin, n)]).collect();
    FockVector::new(coeffs).expect("fiducial vectors are normalized")
}

/// `(z₊, z₋) = (α/√(2s), −α*/√(2s))`.
pub fn hp_chart_point(alpha: C64, spin: Spin) -> ZCoords {
    let z_plus = alpha / (2.0 * spin.s()).sqrt();
    ZCoords {
        z_plus,
        z_minus: -z_plus.conj(),
    }
}

/// Euler angles of the contraction point.
pub fn hp_omega(alpha: C64, spin: Spin) -> Result<EulerAngles> {
    let z = hp_chart_point(alpha, spin);
    let r = z.z_plus.norm();
    if r > POLE_MARGIN {
        return Err(Error::PoleMargin {
            z_plus: r,
            margin: POLE_MARGIN,
        });
    }
    z_to_omega(z)
}

/// The spin coherent state at the contraction point of `α`, reindexed to Fock
/// levels `n = m + s` and cut at `n_max` (dropped weight kept as the tail).
pub fn hp_contract_state(fv: &FiducialVector, alpha: C64, n_max: usize) -> Result<FockVector> {
    let spin = fv.spin();
    let amps = state_amplitudes(fv, hp_omega(alpha, spin)?);
    let levels = (n_max + 1).min(spin.dim());
    let coeffs: Vec<C64> = (0..levels).map(|n| amps[index_of_level(spin, n)]).collect();
    let dropped: f64 = (levels..spin.dim()).map(|n| amps[index_of_level(spin, n)].norm_sqr()).sum();
    Ok(FockVector::new(coeffs)?.with_tail(dropped))
}

/// `max_n |⟨n|contracted⟩ − ⟨n|α⟩|` against the canonical state built from
/// the reindexed fiducial vector.
pub fn contraction_deviation(fv: &FiducialVector, alpha: C64, n_max: usize) -> Result<f64> {
    let fock_fv = fock_from_spin_fiducial(fv).truncated(n_max)?;
    let contracted = hp_contract_state(fv, alpha, n_max)?;
    let ccs = canonical_cs(alpha, &fock_fv, n_max)?;
    Ok(ccs
        .amplitudes
        .iter()
        .enumerate()
        .map(|(n, a)| {
            let b = contracted.coeffs().get(n).copied().unwrap_or(C64::new(0.0, 0.0));
            (a - b).norm()
        })
        .fold(0.0, f64::max))
}

/// `f(s, m)/√(2s)` at level `n = m + s`.
pub fn scaled_ladder_factor(spin: Spin, n: usize) -> f64 {
    let two_m = 2 * n as i32 - spin.two_s as i32;
    ladder_factor(spin, two_m) / (2.0 * spin.s()).sqrt()
}

/// `A₀ = Σ m |c_m|²` written with Fock levels, `Σ (n − s) |c_n|²`.
pub fn a0_from_levels(fv: &FiducialVector) -> f64 {
    let spin = fv.spin();
    (0..spin.dim())
        .map(|n| (n as f64 - spin.s()) * fv.coeffs()[index_of_level(spin, n)].norm_sqr())
        .sum()
}

/// Radial densities in `|α|` (angular factor `1/π` dropped on both sides):
/// spin side `(2s+1)/(2s) · |α| / (1 + |α|²/2s)²`, canonical side `|α|`.
pub fn radial_densities(spin: Spin, r: f64) -> (f64, f64) {
    let two_s = 2.0 * spin.s();
    let spin_side = (two_s + 1.0) / two_s * r / (1.0 + r * r / two_s).powi(2);
    (spin_side, r)
}

/// `max |ρ_spin − ρ_ccs|` over `samples` radii in `[0, r_max]`.
pub fn measure_pushforward_deviation(spin: Spin, r_max: f64, samples: usize) -> f64 {
    (0..=samples)
        .map(|k| {
            let (a, b) = radial_densities(spin, r_max * k as f64 / samples as f64);
            (a - b).abs()
        })
        .fold(0.0, f64::max)
}

/// One comparison row of a contraction sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionRow {
    pub two_s: u32,
    pub max_abs_dev: f64,
    pub measure_dev: f64,
    pub kinetic_dev: f64,
}

/// Test path `α(t) = (r₀ + r₁ t) e^{iωt}` sampled as `(α, α̇)`.
pub fn spiral_point(t: f64) -> (C64, C64) {
    let (r0, r1, w) = (0.8, 0.3, 1.1);
    let r = r0 + r1 * t;
    let e = C64::from_polar(1.0, w * t);
    (e * r, e * C64::new(r1, w * r))
}

/// `max_t |ħ κ_spin − L_kin,CCS|` along [`spiral_point`] for `t ∈ [0, 1]`,
/// the spin side evaluated in the z-chart at the contraction point.
pub fn kinetic_deviation(fv: &FiducialVector, hbar: f64, samples: usize) -> Result<f64> {
    let spin = fv.spin();
    let fock = fock_from_spin_fiducial(fv);
    let mut worst: f64 = 0.0;
    for k in 0..=samples {
        let (alpha, alpha_dot) = spiral_point(k as f64 / samples as f64);
        let z = hp_chart_point(alpha, spin);
        let z_dot = hp_chart_point(alpha_dot, spin);
        let spin_side = hbar * kinetic_term_z(fv, z, z_dot)?;
        let ccs_side = ccs_kinetic_term(alpha, alpha_dot, &fock, hbar);
        worst = worst.max((spin_side - ccs_side).abs());
    }
    Ok(worst)
}

/// Sweep row for spin `s`, fiducial vector taken from the low Fock levels.
pub fn contraction_row(fock_fv: &FockVector, alpha: C64, spin: Spin, n_max: usize) -> Result<ContractionRow> {
    let fv = spin_fiducial_from_fock(spin, fock_fv)?;
    Ok(ContractionRow {
        two_s: spin.two_s,
        max_abs_dev: contraction_deviation(&fv, alpha, n_max)?,
        measure_dev: measure_pushforward_deviation(spin, 2.0, 200),
        kinetic_dev: kinetic_deviation(&fv, 1.0, 50)?,
    })
}
