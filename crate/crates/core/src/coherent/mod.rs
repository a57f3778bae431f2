//! Coherent states `|Ω⟩ = R(Ω)|Ψ₀⟩` for an arbitrary fiducial vector `|Ψ₀⟩`.

mod grid;

pub use grid::{build_grid, build_path_grid, gauss_legendre, QuadratureGrid, DEFAULT_OVERSAMPLE};

use crate::error::{Error, Result};
use crate::linalg::{cis, deterministic_sum, expm, op_norm, CMatrix, CVector, C64};
use crate::spin_core::{
    big_r, compose_euler, invert_euler, ladder_factor, little_d, spin_operators, EulerAngles, Spin,
};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Coefficients below this magnitude do not fix the global phase.
const PHASE_THRESHOLD: f64 = 1e-12;

/// Normalized fiducial vector, coefficients m-descending.
///
/// The global phase is fixed so the first coefficient of non-negligible
/// magnitude (highest `m`) is real and positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FiducialFile", into = "FiducialFile")]
pub struct FiducialVector {
    spin: Spin,
    coeffs: CVector,
}

/// On-disk form: `{"two_s": n, "coeffs": [[re, im], …]}` in m-descending order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiducialFile {
    pub two_s: u32,
    pub coeffs: Vec<[f64; 2]>,
}

impl TryFrom<FiducialFile> for FiducialVector {
    type Error = Error;
    fn try_from(f: FiducialFile) -> Result<Self> {
        let raw = f.coeffs.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        FiducialVector::new(Spin::new(f.two_s), raw)
    }
}

impl From<FiducialVector> for FiducialFile {
    fn from(fv: FiducialVector) -> Self {
        FiducialFile {
            two_s: fv.spin.two_s,
            coeffs: fv.coeffs.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl FiducialVector {
    pub fn new(spin: Spin, raw: Vec<C64>) -> Result<Self> {
        if raw.len() != spin.dim() {
            return Err(Error::LengthMismatch {
                expected: spin.dim(),
                got: raw.len(),
            });
        }
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        let mut coeffs = CVector::from_vec(raw) / C64::from(norm);
        if let Some(lead) = coeffs.iter().find(|z| z.norm() > PHASE_THRESHOLD) {
            let phase = lead.conj() / lead.norm();
            coeffs *= phase;
        }
        Ok(FiducialVector { spin, coeffs })
    }

    /// The weight vector `|s, m⟩`.
    pub fn basis(spin: Spin, two_m: i32) -> Result<Self> {
        let idx = spin
            .index_of(two_m)
            .ok_or_else(|| Error::InvalidArgument(format!("2m = {two_m} is not a weight of spin {spin}")))?;
        let mut raw = vec![C64::new(0.0, 0.0); spin.dim()];
        raw[idx] = C64::new(1.0, 0.0);
        FiducialVector::new(spin, raw)
    }

    /// `|s, −s⟩`.
    pub fn lowest(spin: Spin) -> Self {
        FiducialVector::basis(spin, -(spin.two_s as i32)).expect("lowest weight exists")
    }

    /// `|s, s⟩`.
    pub fn highest(spin: Spin) -> Self {
        FiducialVector::basis(spin, spin.two_s as i32).expect("highest weight exists")
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn coeffs(&self) -> &CVector {
        &self.coeffs
    }

    /// Coefficient `c_m` for doubled weight `2m`.
    pub fn coeff(&self, two_m: i32) -> C64 {
        self.spin
            .index_of(two_m)
            .map(|i| self.coeffs[i])
            .unwrap_or(C64::new(0.0, 0.0))
    }

    /// `A₀ = Σ m |c_m|²`.
    pub fn a0(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, z)| self.spin.m(i) * z.norm_sqr())
            .sum()
    }

    /// `⟨Ψ₀|S₊|Ψ₀⟩ = Σ f(s, m) c*_m c_{m−1}`; the ψ-dependent moments derive from it.
    pub fn raising_moment(&self) -> C64 {
        let dim = self.spin.dim();
        (0..dim.saturating_sub(1))
            .map(|i| {
                ladder_factor(self.spin, self.spin.two_m(i)) * self.coeffs[i].conj() * self.coeffs[i + 1]
            })
            .sum()
    }

    /// True when only one weight carries amplitude.
    pub fn is_single_weight(&self) -> bool {
        self.coeffs.iter().filter(|z| z.norm() > PHASE_THRESHOLD).count() <= 1
    }
}

/// `|Ω⟩` with its cached amplitudes in the `|s, m⟩` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentState {
    pub fv: FiducialVector,
    pub omega: EulerAngles,
    pub amplitudes: CVector,
}

pub fn coherent_state(fv: &FiducialVector, omega: EulerAngles) -> CoherentState {
    let amplitudes = state_amplitudes(fv, omega);
    CoherentState {
        fv: fv.clone(),
        omega,
        amplitudes,
    }
}

/// `R(Ω)|Ψ₀⟩` as a bare vector.
pub fn state_amplitudes(fv: &FiducialVector, omega: EulerAngles) -> CVector {
    big_r(fv.spin, omega).entries * &fv.coeffs
}

/// `⟨Ω₂|Ω₁⟩` from amplitudes. The composed form `⟨Ψ₀|R(Ω₂⁻¹Ω₁)|Ψ₀⟩` is
/// evaluated as well and must agree (checked in debug builds).
pub fn overlap(fv: &FiducialVector, omega2: EulerAngles, omega1: EulerAngles) -> C64 {
    let direct = state_amplitudes(fv, omega2).dotc(&state_amplitudes(fv, omega1));
    debug_assert!(
        (direct - overlap_by_composition(fv, omega2, omega1)).norm() < 1e-10,
        "overlap forms disagree"
    );
    direct
}

/// `⟨Ψ₀| R(Ω₃) |Ψ₀⟩` with `R(Ω₃) = R(Ω₂)⁻¹ R(Ω₁)`.
pub fn overlap_by_composition(fv: &FiducialVector, omega2: EulerAngles, omega1: EulerAngles) -> C64 {
    let omega3 = compose_euler(invert_euler(omega2), omega1);
    fv.coeffs.dotc(&(big_r(fv.spin, omega3).entries * &fv.coeffs))
}

/// The moments `A₀, A₁, A₂, A₄` of a fiducial vector at `Ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixElementSet {
    pub a0: f64,
    pub a1: f64,
    pub a2: C64,
    pub a4: f64,
}

/// `⟨Ω|S₃|Ω⟩`, `⟨Ω|S₊|Ω⟩` and the moments they are assembled from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixElements {
    pub s3: f64,
    pub s_plus: C64,
    pub elems: MatrixElementSet,
}

impl MatrixElements {
    pub fn s_minus(&self) -> C64 {
        self.s_plus.conj()
    }
}

pub fn a_terms(fv: &FiducialVector, omega: EulerAngles) -> MatrixElementSet {
    let g0 = fv.raising_moment();
    let (phi, theta, psi) = (omega.phi(), omega.theta(), omega.psi());
    let g = g0 * cis(psi);
    let ct = theta.cos();
    let a2 = cis(phi) * 0.5 * ((1.0 + ct) * g - (1.0 - ct) * g.conj());
    MatrixElementSet {
        a0: fv.a0(),
        a1: g.re,
        a2,
        a4: g.im,
    }
}

pub fn matrix_elements(fv: &FiducialVector, omega: EulerAngles) -> MatrixElements {
    let elems = a_terms(fv, omega);
    let (st, ct) = omega.theta().sin_cos();
    MatrixElements {
        s3: elems.a0 * ct - elems.a1 * st,
        s_plus: cis(omega.phi()) * (elems.a0 * st) + elems.a2,
        elems,
    }
}

/// `⟨Ω₂| e^{z₊S₊} e^{z₃S₃} e^{z₋S₋} |Ω₁⟩`.
pub fn generating_function(
    fv: &FiducialVector,
    omega2: EulerAngles,
    omega1: EulerAngles,
    z_plus: C64,
    z3: C64,
    z_minus: C64,
) -> C64 {
    let ops = spin_operators(fv.spin);
    let op = expm(&(&ops.s_plus * z_plus)) * expm(&(&ops.s3 * z3)) * expm(&(&ops.s_minus * z_minus));
    state_amplitudes(fv, omega2).dotc(&(op * state_amplitudes(fv, omega1)))
}

/// Measure factor `(2s+1)/(8π²)` of the invariant measure `dμ(Ω)`.
pub fn measure_factor(spin: Spin) -> f64 {
    spin.dim() as f64 / (8.0 * PI * PI)
}

/// Small-d matrices at the grid's θ nodes.
fn theta_tables(spin: Spin, grid: &QuadratureGrid) -> Vec<DMatrix<f64>> {
    grid.theta.iter().map(|&t| little_d(spin, t)).collect()
}

/// Coherent-state amplitudes at every grid node (grid order).
pub fn grid_states(fv: &FiducialVector, grid: &QuadratureGrid) -> Vec<CVector> {
    let spin = fv.spin;
    let dim = spin.dim();
    let tables = theta_tables(spin, grid);
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (it, ip, iq) = grid.split(idx);
            let (phi, psi) = (grid.phi[ip], grid.psi[iq]);
            let d = &tables[it];
            let rotated: Vec<C64> = (0..dim).map(|j| cis(-psi * spin.m(j)) * fv.coeffs[j]).collect();
            CVector::from_fn(dim, |i, _| {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..dim {
                    acc += rotated[j] * d[(i, j)];
                }
                cis(-phi * spin.m(i)) * acc
            })
        })
        .collect()
}

/// `dμ`-weighted frame operator `Σ w (2s+1)/(8π²) |Ω⟩⟨Ω|` over the grid.
pub fn frame_operator(fv: &FiducialVector, grid: &QuadratureGrid) -> CMatrix {
    let states = grid_states(fv, grid);
    let dmu = measure_factor(fv.spin);
    let dim = fv.spin.dim();
    deterministic_sum(states.len(), CMatrix::zeros(dim, dim), |idx| {
        let (it, _, _) = grid.split(idx);
        let v = &states[idx];
        (v * v.adjoint()) * C64::from(grid.weight(it) * dmu)
    })
}

/// `‖Σ_grid w dμ |Ω⟩⟨Ω| − 1‖` in the operator norm.
///
/// Fails with `GridTooCoarse` (carrying the residual) when the grid does not
/// integrate spin-`s` products exactly.
pub fn resolution_residual(fv: &FiducialVector, grid: &QuadratureGrid) -> Result<f64> {
    let dim = fv.spin.dim();
    let residual = op_norm(&(frame_operator(fv, grid) - CMatrix::identity(dim, dim)));
    if grid.is_exact_for(fv.spin) {
        Ok(residual)
    } else {
        Err(Error::GridTooCoarse {
            residual,
            exact_two_s: grid.exact_two_s(),
            needed_two_s: fv.spin.two_s,
        })
    }
}

/// Largest deviation of `∫ R*_{mm'} R_{nn'} sinθ dΩ` from `δδ·8π²/(2s+1)`.
pub fn orthogonality_defect(spin: Spin, grid: &QuadratureGrid) -> f64 {
    let dim = spin.dim();
    let tables = theta_tables(spin, grid);
    let n2 = dim * dim;
    // Gram matrix of the dim² functions R_{mm'}(Ω) under the grid rule.
    let gram = deterministic_sum(grid.len(), CMatrix::zeros(n2, n2), |idx| {
        let (it, ip, iq) = grid.split(idx);
        let d = &tables[it];
        let (phi, psi) = (grid.phi[ip], grid.psi[iq]);
        let f = CVector::from_fn(n2, |k, _| {
            let (i, j) = (k / dim, k % dim);
            cis(-phi * spin.m(i)) * d[(i, j)] * cis(-psi * spin.m(j))
        });
        (f.conjugate() * f.transpose()) * C64::from(grid.weight(it))
    });
    let target = 8.0 * PI * PI / dim as f64;
    let mut worst: f64 = 0.0;
    for a in 0..n2 {
        for b in 0..n2 {
            let expected = if a == b { target } else { 0.0 };
            worst = worst.max((gram[(a, b)] - C64::from(expected)).norm());
        }
    }
    worst
}

/// Largest `|∫ R^{(a)*}_{mm'} R^{(b)}_{nn'} sinθ dΩ|` for two different spins.
///
/// The ψ integral runs over `[0, 2π)`, where the relation only holds for
/// `2a ≡ 2b (mod 2)`; mixed pairs are rejected.
pub fn cross_orthogonality_defect(a: Spin, b: Spin, grid: &QuadratureGrid) -> Result<f64> {
    if a == b || !(a.two_s + b.two_s).is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "cross orthogonality needs distinct spins of equal parity, got {a} and {b}"
        )));
    }
    for spin in [a, b] {
        if !grid.is_exact_for(spin) {
            return Err(Error::GridTooCoarse {
                residual: f64::NAN,
                exact_two_s: grid.exact_two_s(),
                needed_two_s: spin.two_s,
            });
        }
    }
    let (ta, tb) = (theta_tables(a, grid), theta_tables(b, grid));
    let (na, nb) = (a.dim() * a.dim(), b.dim() * b.dim());
    let functions = |spin: Spin, d: &DMatrix<f64>, phi: f64, psi: f64| {
        let dim = spin.dim();
        CVector::from_fn(dim * dim, |k, _| {
            let (i, j) = (k / dim, k % dim);
            cis(-phi * spin.m(i)) * d[(i, j)] * cis(-psi * spin.m(j))
        })
    };
    let gram = deterministic_sum(grid.len(), CMatrix::zeros(na, nb), |idx| {
        let (it, ip, iq) = grid.split(idx);
        let (phi, psi) = (grid.phi[ip], grid.psi[iq]);
        let fa = functions(a, &ta[it], phi, psi);
        let fb = functions(b, &tb[it], phi, psi);
        (fa.conjugate() * fb.transpose()) * C64::from(grid.weight(it))
    });
    Ok(gram.iter().map(|z| z.norm()).fold(0.0, f64::max))
}
