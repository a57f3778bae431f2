use super::{spin_operators, Spin};
use crate::error::{Error, Result};
use crate::linalg::{cis, expm_nilpotent, CMatrix, C64};
use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const TAU: f64 = 2.0 * PI;
const FOUR_PI: f64 = 4.0 * PI;

/// Euler angles `(φ, θ, ψ)` in the z-y-z convention.
///
/// Construction normalizes to `φ ∈ [0, 2π)`, `θ ∈ [0, π]`, `ψ ∈ [0, 4π)`. Every
/// step of the normalization is an identity of `R(Ω)` for all spins, including
/// half-integer ones, so `big_r` of the normalized and the raw angles coincide.
/// `ψ` needs the 4π range because `e^{−2πiS₃} = (−1)^{2s}`; use
/// [`EulerAngles::so3_chart`] for the rotation-group chart with `ψ ∈ [0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawAngles")]
pub struct EulerAngles {
    phi: f64,
    theta: f64,
    psi: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAngles {
    phi: f64,
    theta: f64,
    psi: f64,
}

impl From<RawAngles> for EulerAngles {
    fn from(r: RawAngles) -> Self {
        EulerAngles::new(r.phi, r.theta, r.psi)
    }
}

/// Sign relating an SU(2) matrix to the rotation chart: `R^{(1/2)}(Ω) = sign · u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoverSign {
    Plus,
    Minus,
}

impl CoverSign {
    pub fn factor(self) -> f64 {
        match self {
            CoverSign::Plus => 1.0,
            CoverSign::Minus => -1.0,
        }
    }
}

fn wrap(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

impl EulerAngles {
    pub fn new(phi: f64, theta: f64, psi: f64) -> Self {
        let mut theta = wrap(theta, FOUR_PI);
        let mut phi = phi;
        let mut psi = psi;
        // e^{−2πiS₂} = e^{−2πiS₃}
        if theta >= TAU {
            theta -= TAU;
            psi += TAU;
        }
        // R(φ, θ, ψ) = R(φ + π, 2π − θ, ψ + π)
        if theta > PI {
            theta = TAU - theta;
            phi += PI;
            psi += PI;
        }
        let k = (phi / TAU).floor();
        phi -= k * TAU;
        psi += k * TAU;
        if phi >= TAU {
            phi -= TAU;
            psi += TAU;
        }
        if phi < 0.0 {
            phi = 0.0;
        }
        EulerAngles {
            phi,
            theta,
            psi: wrap(psi, FOUR_PI),
        }
    }

    pub fn identity() -> Self {
        EulerAngles {
            phi: 0.0,
            theta: 0.0,
            psi: 0.0,
        }
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.phi, self.theta, self.psi]
    }

    /// Angles with `ψ ∈ [0, 2π)` plus the sign picked up for half-integer spin.
    pub fn so3_chart(&self) -> (EulerAngles, CoverSign) {
        if self.psi >= TAU {
            (
                EulerAngles {
                    psi: self.psi - TAU,
                    ..*self
                },
                CoverSign::Minus,
            )
        } else {
            (*self, CoverSign::Plus)
        }
    }

    /// Shift by coordinate increments (renormalized).
    pub fn offset(&self, d_phi: f64, d_theta: f64, d_psi: f64) -> Self {
        EulerAngles::new(self.phi + d_phi, self.theta + d_theta, self.psi + d_psi)
    }
}

/// The spin-1/2 matrix `[[a₁, −a₂*], [a₂, a₁*]]` of `R(Ω)`.
pub fn su2_matrix(omega: EulerAngles) -> Matrix2<C64> {
    let (phi, theta, psi) = (omega.phi, omega.theta, omega.psi);
    let a1 = cis(-(phi + psi) / 2.0) * (theta / 2.0).cos();
    let a2 = cis((phi - psi) / 2.0) * (theta / 2.0).sin();
    Matrix2::new(a1, -a2.conj(), a2, a1.conj())
}

fn check_su2(u: &Matrix2<C64>) -> Result<()> {
    let unit = (u.adjoint() * u - Matrix2::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let det = (u.determinant() - C64::new(1.0, 0.0)).norm();
    let deviation = unit.max(det);
    if deviation > 1e-10 {
        Err(Error::NotUnitary { deviation })
    } else {
        Ok(())
    }
}

/// Angles with `R^{(1/2)}(Ω) = u` exactly (ψ in the 4π range).
pub fn exact_euler_from_su2(u: &Matrix2<C64>) -> Result<EulerAngles> {
    check_su2(u)?;
    let a1 = u[(0, 0)];
    let a2 = u[(1, 0)];
    let theta = 2.0 * a2.norm().atan2(a1.norm());
    let (phi, psi) = if a2.norm() < 1e-14 {
        (0.0, -2.0 * a1.arg())
    } else if a1.norm() < 1e-14 {
        (0.0, -2.0 * a2.arg())
    } else {
        (a2.arg() - a1.arg(), -a1.arg() - a2.arg())
    };
    Ok(EulerAngles::new(phi, theta, psi))
}

/// Euler angles of an SU(2) matrix in the rotation chart, with the cover sign:
/// `R^{(1/2)}(angles) = sign · u`.
pub fn euler_from_su2(u: &Matrix2<C64>) -> Result<(EulerAngles, CoverSign)> {
    Ok(exact_euler_from_su2(u)?.so3_chart())
}

/// `Ω̃` with `R(Ω̃) = R(Ω₂) R(Ω₁)` for every spin.
pub fn compose_euler(omega2: EulerAngles, omega1: EulerAngles) -> EulerAngles {
    let u = su2_matrix(omega2) * su2_matrix(omega1);
    exact_euler_from_su2(&u).expect("product of SU(2) matrices is in SU(2)")
}

/// Quantities fixing a composed rotation: `cos θ`, `sin θ e^{iφ}` and
/// `cos(θ/2) e^{i(φ+ψ)/2}` (the last one sees the 4π range of ψ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationInvariants {
    pub cos_theta: f64,
    pub sin_theta_phase: C64,
    pub half_angle_phase: C64,
}

impl RotationInvariants {
    pub fn of(omega: EulerAngles) -> Self {
        let (phi, theta, psi) = (omega.phi, omega.theta, omega.psi);
        RotationInvariants {
            cos_theta: theta.cos(),
            sin_theta_phase: cis(phi) * theta.sin(),
            half_angle_phase: cis((phi + psi) / 2.0) * (theta / 2.0).cos(),
        }
    }

    /// Read off the spin-1/2 matrix `[[a₁, −a₂*], [a₂, a₁*]]`.
    pub fn from_su2(u: &Matrix2<C64>) -> Self {
        let (a1, a2) = (u[(0, 0)], u[(1, 0)]);
        RotationInvariants {
            cos_theta: a1.norm_sqr() - a2.norm_sqr(),
            sin_theta_phase: a2 * a1.conj() * 2.0,
            half_angle_phase: a1.conj(),
        }
    }

    /// Largest deviation between two sets.
    pub fn distance(&self, other: &Self) -> f64 {
        (self.cos_theta - other.cos_theta)
            .abs()
            .max((self.sin_theta_phase - other.sin_theta_phase).norm())
            .max((self.half_angle_phase - other.half_angle_phase).norm())
    }
}

/// Closed-form invariants of `R(Ω₂) R(Ω₁)` from the two sets of angles.
pub fn composition_invariants(omega2: EulerAngles, omega1: EulerAngles) -> RotationInvariants {
    let (p1, t1, s1) = (omega1.phi, omega1.theta, omega1.psi);
    let (p2, t2, s2) = (omega2.phi, omega2.theta, omega2.psi);
    let inner = p1 + s2;
    let (st1, ct1) = t1.sin_cos();
    let (st2, ct2) = t2.sin_cos();
    let (sh1, ch1) = (t1 / 2.0).sin_cos();
    let (sh2, ch2) = (t2 / 2.0).sin_cos();
    RotationInvariants {
        cos_theta: ct1 * ct2 - st1 * st2 * inner.cos(),
        sin_theta_phase: cis(p2) * C64::new(ct1 * st2 + st1 * ct2 * inner.cos(), st1 * inner.sin()),
        half_angle_phase: cis((p2 + s1) / 2.0) * (cis(inner / 2.0) * (ch1 * ch2) - cis(-inner / 2.0) * (sh1 * sh2)),
    }
}

/// `cos θ′` of `R(Ω₂) R(Ω) R(Ω₁)` in closed form.
pub fn triple_cos_theta(omega2: EulerAngles, omega: EulerAngles, omega1: EulerAngles) -> f64 {
    let (p1, t1) = (omega1.phi, omega1.theta);
    let (p, t, s) = (omega.phi, omega.theta, omega.psi);
    let (s2, t2) = (omega2.psi, omega2.theta);
    let (st1, ct1) = t1.sin_cos();
    let (st, ct) = t.sin_cos();
    let (a, b) = (p1 + s, p + s2);
    (ct1 * ct - st1 * st * a.cos()) * t2.cos()
        + (st1 * (a.sin() * b.sin() - a.cos() * ct * b.cos()) - ct1 * st * b.cos()) * t2.sin()
}

/// `Ω⁻¹ = (−ψ, −θ, −φ)`.
pub fn invert_euler(omega: EulerAngles) -> EulerAngles {
    EulerAngles::new(-omega.psi, -omega.theta, -omega.phi)
}

/// Complex parameters of `R = e^{z₊S₊} e^{z₃S₃} e^{z₋S₋}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFactors {
    pub z_plus: C64,
    pub z3: C64,
    pub z_minus: C64,
}

/// Gaussian (normal-ordered) decomposition of `R(Ω)`.
pub fn gaussian_decompose(omega: EulerAngles) -> Result<GaussianFactors> {
    let (phi, theta, psi) = (omega.phi, omega.theta, omega.psi);
    if (theta - PI).abs() < 1e-9 {
        return Err(Error::DecompositionPole { theta });
    }
    let t = (theta / 2.0).tan();
    let z_plus = -cis(-phi) * t;
    let z_minus = cis(-psi) * t;
    let z3 = -2.0 * (cis((phi + psi) / 2.0) * (theta / 2.0).cos()).ln();
    Ok(GaussianFactors {
        z_plus,
        z3,
        z_minus,
    })
}

impl GaussianFactors {
    /// `e^{z₊S₊} e^{z₃S₃} e^{z₋S₋}` at the given spin.
    pub fn matrix(&self, spin: Spin) -> CMatrix {
        let ops = spin_operators(spin);
        let dim = spin.dim();
        let diag = CMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                (self.z3 * spin.m(i)).exp()
            } else {
                C64::new(0.0, 0.0)
            }
        });
        expm_nilpotent(&ops.s_plus, self.z_plus) * diag * expm_nilpotent(&ops.s_minus, self.z_minus)
    }
}
