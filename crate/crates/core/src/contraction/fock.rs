//! Truncated Fock space: ladder operators, displacement, displaced number
//! states and canonical coherent states with arbitrary fiducial vectors.

use crate::coherent::gauss_legendre;
use crate::error::{Error, Result};
use crate::linalg::{expm, op_norm, CMatrix, CVector, C64};
use crate::spin_core::ln_factorial;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Normalized Fock-space vector `Σ c_n |n⟩`, `n = 0 … n_max`.
///
/// `tail` is the weight discarded when the vector was cut out of a larger
/// one (zero for vectors built directly).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockVector {
    coeffs: Vec<C64>,
    tail: f64,
}

impl FockVector {
    pub fn new(raw: Vec<C64>) -> Result<Self> {
        let norm_sq: f64 = raw.iter().map(|z| z.norm_sqr()).sum();
        if raw.is_empty() || norm_sq < 1e-24 {
            return Err(Error::ZeroVector);
        }
        let scale = norm_sq.sqrt().recip();
        Ok(FockVector {
            coeffs: raw.into_iter().map(|z| z * scale).collect(),
            tail: 0.0,
        })
    }

    pub fn vacuum() -> Self {
        FockVector::number(0)
    }

    /// `|n⟩`.
    pub fn number(n: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
        coeffs[n] = C64::new(1.0, 0.0);
        FockVector { coeffs, tail: 0.0 }
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// Highest level with a non-negligible coefficient.
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|z| z.norm() > 1e-14).unwrap_or(0)
    }

    /// Keeps levels `0 … n_max`, renormalizes and records the dropped weight.
    pub fn truncated(&self, n_max: usize) -> Result<Self> {
        if n_max >= self.n_max() {
            return Ok(self.clone());
        }
        let dropped: f64 = self.coeffs[n_max + 1..].iter().map(|z| z.norm_sqr()).sum();
        let mut out = FockVector::new(self.coeffs[..=n_max].to_vec())?;
        out.tail = self.tail + dropped;
        Ok(out)
    }

    pub(crate) fn with_tail(mut self, tail: f64) -> Self {
        self.tail = tail;
        self
    }

    /// `Σ n |c_n|²`.
    pub fn mean_number(&self) -> f64 {
        self.coeffs.iter().enumerate().map(|(n, z)| n as f64 * z.norm_sqr()).sum()
    }

    /// `⟨Ψ₀|a⁺|Ψ₀⟩ = Σ √n c*_n c_{n−1}`.
    pub fn creation_moment(&self) -> C64 {
        (1..self.coeffs.len())
            .map(|n| self.coeffs[n].conj() * self.coeffs[n - 1] * (n as f64).sqrt())
            .sum()
    }
}

/// Annihilation operator on levels `0 … n_max`.
pub fn annihilation(n_max: usize) -> CMatrix {
    CMatrix::from_fn(n_max + 1, n_max + 1, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `exp(α a⁺ − α* a)` on the truncated space.
pub fn displacement_matrix(alpha: C64, n_max: usize) -> Result<CMatrix> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let a = annihilation(n_max);
    Ok(expm(&(a.adjoint() * alpha - a * alpha.conj())))
}

/// Generalized Laguerre polynomial `L_k^{(l)}(x)` by the three-term recurrence.
pub fn laguerre(k: usize, l: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 1.0 + l - x;
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + l - x) * cur - (jf + l) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `⟨m|D(α)|n⟩` from the closed Laguerre form.
pub fn dns_element(alpha: C64, m: usize, n: usize) -> C64 {
    let x = alpha.norm_sqr();
    let gauss = (-0.5 * x).exp();
    if m <= n {
        let ratio = (0.5 * (ln_factorial(m as u32) - ln_factorial(n as u32))).exp();
        (-alpha.conj()).powu((n - m) as u32) * (gauss * ratio * laguerre(m, (n - m) as f64, x))
    } else {
        let ratio = (0.5 * (ln_factorial(n as u32) - ln_factorial(m as u32))).exp();
        alpha.powu((m - n) as u32) * (gauss * ratio * laguerre(n, (m - n) as f64, x))
    }
}

/// `⟨m|α, n⟩` for `m = 0 … n_max`, where `|α, n⟩ = D(α)|n⟩`.
pub fn dns_amplitudes(alpha: C64, n: usize, n_max: usize) -> Result<CVector> {
    if n > n_max {
        return Err(Error::InvalidArgument(format!("n = {n} exceeds n_max = {n_max}")));
    }
    Ok(CVector::from_fn(n_max + 1, |m, _| dns_element(alpha, m, n)))
}

/// `‖(a⁺ − α*)(a − α)|α, n⟩ − n|α, n⟩‖` on levels `0 … n_max − 1`.
///
/// The top level is left out: the truncated `a` drops `√(n_max+1) c_{n_max+1}`
/// there, so that row measures the cut rather than the identity.
pub fn dns_number_check(alpha: C64, n: usize, n_max: usize) -> Result<f64> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let v = dns_amplitudes(alpha, n, n_max)?;
    let a = annihilation(n_max);
    let dim = n_max + 1;
    let shifted = &a - CMatrix::identity(dim, dim) * alpha;
    let w = shifted.adjoint() * (&shifted * &v) - &v * C64::new(n as f64, 0.0);
    Ok(w.rows(0, n_max).norm())
}

/// Canonical coherent state `|α⟩ = D(α)|Ψ₀⟩` on levels `0 … n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalCS {
    pub alpha: C64,
    pub fv: FockVector,
    pub amplitudes: CVector,
}

/// Levels needed for `|α⟩` to be normalized to about `1e−9`.
pub fn adequate_truncation(alpha: C64, fv: &FockVector) -> usize {
    let x = alpha.norm_sqr();
    (x + 10.0 * (x + 1.0).sqrt()).ceil() as usize + fv.degree()
}

pub fn canonical_cs(alpha: C64, fv: &FockVector, n_max: usize) -> Result<CanonicalCS> {
    if fv.n_max() > n_max {
        return Err(Error::InvalidArgument(format!(
            "fiducial vector reaches level {} beyond n_max = {n_max}",
            fv.n_max()
        )));
    }
    let mut amplitudes = CVector::zeros(n_max + 1);
    for (n, c) in fv.coeffs().iter().enumerate() {
        if c.norm() > 0.0 {
            amplitudes += dns_amplitudes(alpha, n, n_max)? * *c;
        }
    }
    Ok(CanonicalCS {
        alpha,
        fv: fv.clone(),
        amplitudes,
    })
}

/// `‖(a − α)^{N+1}|α⟩‖` with `N` the degree of the fiducial vector, on the
/// levels `0 … n_max − N − 1` that the truncation edge does not reach.
pub fn generalized_eigen_check(alpha: C64, fv: &FockVector, n_max: usize) -> Result<f64> {
    let cs = canonical_cs(alpha, fv, n_max)?;
    let dim = n_max + 1;
    let powers = fv.degree() + 1;
    if powers > n_max {
        return Err(Error::InvalidArgument(format!("n_max = {n_max} leaves no level below the edge")));
    }
    let shifted = annihilation(n_max) - CMatrix::identity(dim, dim) * alpha;
    let mut v = cs.amplitudes;
    for _ in 0..powers {
        v = &shifted * v;
    }
    Ok(v.rows(0, dim - powers).norm())
}

/// `(iħ/2)[(α*α̇ − α̇*α) + A]`, with
/// `A = 2 Σ √n (α̇ c*_n c_{n−1} − α̇* c_n c*_{n−1})`.
pub fn ccs_kinetic_term(alpha: C64, alpha_dot: C64, fv: &FockVector, hbar: f64) -> f64 {
    let x = fv.creation_moment();
    let a_term = (alpha_dot * x - alpha_dot.conj() * x.conj()) * 2.0;
    let bracket = alpha.conj() * alpha_dot - alpha_dot.conj() * alpha + a_term;
    (C64::new(0.0, hbar / 2.0) * bracket).re
}

/// `‖P_k [(1/π) ∫_{|α| ≤ R} |α⟩⟨α| d²α − 1] P_k‖` with `P_k` the projector on
/// the lowest `levels` Fock states. Gauss–Legendre in `|α|`, uniform in `arg α`.
pub fn ccs_resolution_residual(
    fv: &FockVector,
    radial_max: f64,
    n_r: usize,
    n_phi: usize,
    n_max: usize,
    levels: usize,
) -> Result<f64> {
    if levels > n_max + 1 {
        return Err(Error::InvalidArgument(format!("levels = {levels} exceed n_max + 1")));
    }
    let (x, w) = gauss_legendre(n_r);
    let mut frame = CMatrix::zeros(levels, levels);
    for (xi, wi) in x.iter().zip(&w) {
        let r = 0.5 * radial_max * (xi + 1.0);
        let radial = 0.5 * radial_max * wi * r;
        for k in 0..n_phi {
            let angle = 2.0 * PI * k as f64 / n_phi as f64;
            let cs = canonical_cs(C64::from_polar(r, angle), fv, n_max)?;
            let v = cs.amplitudes.rows(0, levels).into_owned();
            frame += (&v * v.adjoint()) * C64::new(radial * 2.0 / n_phi as f64, 0.0);
        }
    }
    Ok(op_norm(&(frame - CMatrix::identity(levels, levels))))
}

/// Normal-ordered boson Hamiltonian `Σ coeff (a⁺)^p a^r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BosonHamiltonian {
    pub terms: Vec<(u32, u32, C64)>,
}

impl BosonHamiltonian {
    /// `ω a⁺a`.
    pub fn number(omega: f64) -> Self {
        BosonHamiltonian {
            terms: vec![(1, 1, C64::new(omega, 0.0))],
        }
    }

    pub fn matrix(&self, n_max: usize) -> CMatrix {
        let a = annihilation(n_max);
        let ad = a.adjoint();
        let dim = n_max + 1;
        let mut h = CMatrix::zeros(dim, dim);
        for &(p, r, coeff) in &self.terms {
            let mut m = CMatrix::identity(dim, dim);
            for _ in 0..p {
                m = &m * &ad;
            }
            for _ in 0..r {
                m = &m * &a;
            }
            h += m * coeff;
        }
        h
    }
}

/// `⟨α|Ĥ|α⟩` on the truncated space.
pub fn ccs_energy(alpha: C64, fv: &FockVector, h: &BosonHamiltonian, n_max: usize) -> Result<f64> {
    let v = canonical_cs(alpha, fv, n_max)?.amplitudes;
    Ok(v.dotc(&(h.matrix(n_max) * &v)).re)
}

/// `α̇ = −(i/ħ) ∂H/∂α*`, the Wirtinger derivative assembled from central
/// differences in `Re α` and `Im α`.
pub fn ccs_canonical_rhs(alpha: C64, fv: &FockVector, h: &BosonHamiltonian, n_max: usize, hbar: f64) -> Result<C64> {
    let step = 1e-6;
    let e = |z: C64| ccs_energy(z, fv, h, n_max);
    let d_re = (e(alpha + step)? - e(alpha - step)?) / (2.0 * step);
    let d_im = (e(alpha + C64::new(0.0, step))? - e(alpha - C64::new(0.0, step))?) / (2.0 * step);
    let d_conj = C64::new(d_re, d_im) * 0.5;
    Ok(C64::new(0.0, -1.0 / hbar) * d_conj)
}
