//! Complex charts of the coherent-state manifold: the Gaussian-decomposition
//! pair `z = (z₊, z₋)` with `|z₊| = |z₋|`, and the SU(2) pair `a = (a₁, a₂)`
//! with `|a₁|² + |a₂|² = 1`.

use crate::coherent::{FiducialVector, QuadratureGrid};
use crate::error::{Error, Result};
use crate::linalg::{cis, deterministic_sum, op_norm, CMatrix, C64};
use crate::spin_core::{
    big_r, exact_euler_from_su2, gaussian_decompose, CoverSign, EulerAngles, Spin,
};
use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const SUBSIDIARY_TOL: f64 = 1e-10;
const NORMALIZATION_TOL: f64 = 1e-12;
const Z_ORIGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZCoords {
    pub z_plus: C64,
    pub z_minus: C64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ACoords {
    pub a1: C64,
    pub a2: C64,
}

pub fn omega_to_z(omega: EulerAngles) -> Result<ZCoords> {
    let g = gaussian_decompose(omega)?;
    Ok(ZCoords {
        z_plus: g.z_plus,
        z_minus: g.z_minus,
    })
}

fn check_subsidiary(z: ZCoords) -> Result<()> {
    let (p, m) = (z.z_plus.norm(), z.z_minus.norm());
    if (p - m).abs() > SUBSIDIARY_TOL {
        Err(Error::SubsidiaryViolation { plus: p, minus: m })
    } else {
        Ok(())
    }
}

fn wrap_pm_pi(x: f64) -> f64 {
    let r = (x + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

/// Euler angles of a z-point. The branch is chosen with `φ + ψ ∈ (−π, π]`,
/// which is the branch selected by the principal square root in
/// [`z3_from_z`]; the other branch differs by the double-cover sign.
pub fn z_to_omega(z: ZCoords) -> Result<EulerAngles> {
    check_subsidiary(z)?;
    let r = z.z_plus.norm();
    if r == 0.0 && z.z_minus.norm() == 0.0 {
        return Ok(EulerAngles::identity());
    }
    let theta = 2.0 * r.atan();
    let phi = PI - z.z_plus.arg();
    let psi = -z.z_minus.arg();
    let sum = wrap_pm_pi(phi + psi);
    Ok(EulerAngles::new(phi, theta, sum - phi))
}

/// `z₃` from the pair, `e^{−z₃/2} = (1+|z₊|²)^{−1/2} √(−z₊* z₋* / |z₊|²)` with the
/// principal square root; `z₃ = 0` at the origin.
pub fn z3_from_z(z: ZCoords) -> Result<C64> {
    check_subsidiary(z)?;
    let r2 = z.z_plus.norm_sqr();
    if r2 == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let root = (-(z.z_plus.conj() * z.z_minus.conj()) / r2).sqrt();
    Ok(-2.0 * (root / (1.0 + r2).sqrt()).ln())
}

pub fn omega_to_a(omega: EulerAngles) -> ACoords {
    let (phi, theta, psi) = (omega.phi(), omega.theta(), omega.psi());
    ACoords {
        a1: cis(-(phi + psi) / 2.0) * (theta / 2.0).cos(),
        a2: cis((phi - psi) / 2.0) * (theta / 2.0).sin(),
    }
}

fn check_normalized(a: ACoords) -> Result<()> {
    let norm_sq = a.a1.norm_sqr() + a.a2.norm_sqr();
    if (norm_sq - 1.0).abs() > NORMALIZATION_TOL {
        Err(Error::NotNormalized { norm_sq })
    } else {
        Ok(())
    }
}

fn a_matrix(a: ACoords) -> Matrix2<C64> {
    Matrix2::new(a.a1, -a.a2.conj(), a.a2, a.a1.conj())
}

/// Angles of an a-point in the rotation chart (`ψ < 2π`) with the cover sign.
pub fn a_to_omega(a: ACoords) -> Result<(EulerAngles, CoverSign)> {
    Ok(a_to_omega_exact(a)?.so3_chart())
}

/// Angles with `R^{(1/2)}(Ω) = R(a)` exactly (`ψ ∈ [0, 4π)`).
pub fn a_to_omega_exact(a: ACoords) -> Result<EulerAngles> {
    check_normalized(a)?;
    exact_euler_from_su2(&a_matrix(a)).map_err(|_| Error::NotNormalized {
        norm_sq: a.a1.norm_sqr() + a.a2.norm_sqr(),
    })
}

/// Density of the z-measure with respect to `δ(|z₊| − |z₋|) d²z₊ d²z₋`:
/// `(2s+1) / (2π² |z₊| (1 + |z₊|²)²)`.
pub fn z_measure_weight(z: ZCoords, spin: Spin) -> f64 {
    let r = z.z_plus.norm();
    spin.dim() as f64 / (2.0 * PI * PI * r * (1.0 + r * r).powi(2))
}

/// The same measure after the δ is resolved, per `d²z₊ d(arg z₋)`.
pub fn z_surface_density(z: ZCoords, spin: Spin) -> f64 {
    let r = z.z_plus.norm();
    spin.dim() as f64 / (2.0 * PI * PI * (1.0 + r * r).powi(2))
}

/// Density of the a-measure per unit area of the unit 3-sphere `|a|² = 1`:
/// `(2s+1)/(2π²)`, so that the total mass is `2s + 1`.
pub fn a_measure_weight(a: ACoords, spin: Spin) -> f64 {
    let _ = a;
    spin.dim() as f64 / (2.0 * PI * PI)
}

/// `‖∫_{S³} dλ(a) |a⟩⟨a| − 1‖`, with the sphere covered by the Euler grid
/// extended to `ψ ∈ [0, 4π)` (area element `⅛ sinθ dθ dφ dψ`).
pub fn a_resolution_residual(fv: &FiducialVector, grid: &QuadratureGrid) -> Result<f64> {
    let spin = fv.spin();
    let dim = spin.dim();
    let n = grid.len();
    let frame = deterministic_sum(2 * n, CMatrix::zeros(dim, dim), |k| {
        let (o, w) = grid.point(k % n);
        let shift = if k >= n { 2.0 * PI } else { 0.0 };
        let a = omega_to_a(EulerAngles::new(o.phi(), o.theta(), o.psi() + shift));
        let omega = a_to_omega_exact(a).expect("grid points are normalized");
        let v = big_r(spin, omega).entries * fv.coeffs();
        (&v * v.adjoint()) * C64::from(w * 0.125 * a_measure_weight(a, spin))
    });
    let residual = op_norm(&(frame - CMatrix::identity(dim, dim)));
    if grid.is_exact_for(spin) {
        Ok(residual)
    } else {
        Err(Error::GridTooCoarse {
            residual,
            exact_two_s: grid.exact_two_s(),
            needed_two_s: spin.two_s,
        })
    }
}

/// `⟨z| i d/dt |z⟩` (`ħ = 1`) in the z-chart.
pub fn kinetic_term_z(fv: &FiducialVector, z: ZCoords, z_dot: ZCoords) -> Result<f64> {
    check_subsidiary(z)?;
    let r2 = z.z_plus.norm_sqr();
    if r2.sqrt() < Z_ORIGIN {
        return Err(Error::ZOriginSingular { z_plus: r2.sqrt() });
    }
    let a0 = fv.a0();
    let i = C64::new(0.0, 1.0);
    let plus = z.z_plus.conj() * z_dot.z_plus - z_dot.z_plus.conj() * z.z_plus;
    let minus = z.z_minus.conj() * z_dot.z_minus - z_dot.z_minus.conj() * z.z_minus;
    let a0_part = a0 * ((1.0 - r2) / (1.0 + r2) * plus + minus) / (2.0 * r2);
    // Σ f(s,m) c_m c*_{m−1} is the conjugate of ⟨Ψ₀|S₊|Ψ₀⟩.
    let x = fv.raising_moment().conj() * z.z_plus * z_dot.z_plus.conj() * z.z_minus;
    let a3 = (x - x.conj()) / (r2 * (1.0 + r2));
    Ok((i * (a0_part + a3)).re)
}

/// `⟨a| i d/dt |a⟩` (`ħ = 1`) in the a-chart.
pub fn kinetic_term_a(fv: &FiducialVector, a: ACoords, a_dot: ACoords) -> Result<f64> {
    check_normalized(a)?;
    let i = C64::new(0.0, 1.0);
    let p1 = a.a1.conj() * a_dot.a1 - a_dot.a1.conj() * a.a1;
    let p2 = a.a2.conj() * a_dot.a2 - a_dot.a2.conj() * a.a2;
    let x = fv.raising_moment().conj() * (a.a1 * a_dot.a2 - a_dot.a1 * a.a2);
    let a3 = x - x.conj();
    Ok((i * (fv.a0() * (p1 + p2) + a3)).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::{build_grid, resolution_residual, DEFAULT_OVERSAMPLE};
    use crate::geometry::kinetic_term;
    use crate::linalg::c;
    use crate::random::{random_euler, random_euler_theta_in, random_fiducial, random_rates, seeded};

    #[test]
    fn z_examples() {
        let z = omega_to_z(EulerAngles::identity()).unwrap();
        assert_eq!(z.z_plus.norm() + z.z_minus.norm(), 0.0);
        assert_eq!(z_to_omega(z).unwrap(), EulerAngles::identity());
        let z = omega_to_z(EulerAngles::new(0.0, PI / 2.0, 0.0)).unwrap();
        assert!((z.z_plus - c(-1.0, 0.0)).norm() < 1e-15 && (z.z_minus - c(1.0, 0.0)).norm() < 1e-15);
        let o = z_to_omega(z).unwrap();
        assert!(o.phi().abs() < 1e-15 && (o.theta() - PI / 2.0).abs() < 1e-15 && o.psi().abs() < 1e-15);
        assert!(matches!(
            z_to_omega(ZCoords { z_plus: c(1.0, 0.0), z_minus: c(2.0, 0.0) }),
            Err(Error::SubsidiaryViolation { .. })
        ));
        assert!(matches!(omega_to_z(EulerAngles::new(0.0, PI, 0.0)), Err(Error::DecompositionPole { .. })));
    }

    #[test]
    fn z_round_trip_and_z3() {
        let mut rng = seeded(41);
        for _ in 0..100 {
            let o = random_euler_theta_in(&mut rng, 0.0, 3.0);
            let z = omega_to_z(o).unwrap();
            let back = z_to_omega(z).unwrap();
            // Same point of the manifold: identical integer-spin rotation and
            // identical spin-1/2 rotation up to the cover sign.
            let r1 = big_r(Spin::new(2), o).entries - big_r(Spin::new(2), back).entries;
            assert!(op_norm(&r1) < 1e-10);
            let z2 = omega_to_z(back).unwrap();
            assert!((z2.z_plus - z.z_plus).norm() < 1e-10 && (z2.z_minus - z.z_minus).norm() < 1e-10);
            // On the canonical branch z₃ agrees exactly; otherwise it differs by 2πi.
            let z3 = z3_from_z(z).unwrap();
            assert!((z3 - gaussian_decompose(back).unwrap().z3).norm() < 1e-10);
            let diff = z3 - gaussian_decompose(o).unwrap().z3;
            let k = diff.im / (2.0 * PI);
            assert!(diff.re.abs() < 1e-10 && (k - k.round()).abs() < 1e-10);
        }
    }

    #[test]
    fn a_examples_and_round_trip() {
        let a = omega_to_a(EulerAngles::identity());
        assert_eq!((a.a1, a.a2), (c(1.0, 0.0), c(0.0, 0.0)));
        let a = omega_to_a(EulerAngles::new(0.0, PI, 0.0));
        assert!(a.a1.norm() < 1e-16 && (a.a2 - c(1.0, 0.0)).norm() < 1e-15);
        assert!(matches!(
            a_to_omega(ACoords { a1: c(1.0, 0.0), a2: c(0.1, 0.0) }),
            Err(Error::NotNormalized { .. })
        ));
        let mut rng = seeded(42);
        for _ in 0..100 {
            let o = random_euler(&mut rng);
            let a = omega_to_a(o);
            let (back, sign) = a_to_omega(a).unwrap();
            let rebuilt = omega_to_a(back);
            let f = sign.factor();
            assert!((rebuilt.a1 * f - a.a1).norm() < 1e-10 && (rebuilt.a2 * f - a.a2).norm() < 1e-10);
            let exact = a_to_omega_exact(a).unwrap();
            let r = big_r(Spin::new(3), exact).entries - big_r(Spin::new(3), o).entries;
            assert!(op_norm(&r) < 1e-10);
        }
    }

    #[test]
    fn z_measure_is_pushforward_of_invariant_measure() {
        let mut rng = seeded(43);
        let spin = Spin::new(3);
        let h = 1e-6;
        for _ in 0..50 {
            let o = random_euler_theta_in(&mut rng, 0.2, 2.8);
            // Coordinates on the constraint surface: (Re z₊, Im z₊, arg z₋).
            let coords = |p: f64, t: f64, s: f64| {
                let z = omega_to_z(EulerAngles::new(p, t, s)).unwrap();
                [z.z_plus.re, z.z_plus.im, (-s)]
            };
            let base = o.as_array();
            let mut jac = nalgebra::Matrix3::<f64>::zeros();
            for j in 0..3 {
                let mut e = [0.0; 3];
                e[j] = h;
                let up = coords(base[0] + e[0], base[1] + e[1], base[2] + e[2]);
                let dn = coords(base[0] - e[0], base[1] - e[1], base[2] - e[2]);
                for i in 0..3 {
                    jac[(i, j)] = (up[i] - dn[i]) / (2.0 * h);
                }
            }
            let pushed = spin.dim() as f64 / (8.0 * PI * PI) * o.theta().sin() / jac.determinant().abs();
            let z = omega_to_z(o).unwrap();
            let density = z_surface_density(z, spin);
            assert!((pushed - density).abs() < 1e-8 * density.max(1.0), "{pushed} vs {density}");
            assert!((z_measure_weight(z, spin) * z.z_plus.norm() - density).abs() < 1e-14);
        }
        // Near the origin the weight times |z₊| stays finite.
        let z = ZCoords { z_plus: c(1e-8, 0.0), z_minus: c(0.0, 1e-8) };
        assert!((z_measure_weight(z, spin) * 1e-8 - spin.dim() as f64 / (2.0 * PI * PI)).abs() < 1e-10);
    }

    #[test]
    fn a_measure_resolves_unity() {
        let mut rng = seeded(44);
        for two_s in [1, 2, 3, 4] {
            let spin = Spin::new(two_s);
            let grid = build_grid(spin, DEFAULT_OVERSAMPLE);
            let fv = random_fiducial(&mut rng, spin);
            let r = a_resolution_residual(&fv, &grid).unwrap();
            assert!(r < 1e-10, "2s = {two_s}: {r}");
            assert!(resolution_residual(&fv, &grid).unwrap() < 1e-10);
        }
    }

    fn fd_z(o: [f64; 3], rate: [f64; 3], h: f64) -> (ZCoords, ZCoords) {
        let at = |s: f64| omega_to_z(EulerAngles::new(o[0] + s * rate[0], o[1] + s * rate[1], o[2] + s * rate[2])).unwrap();
        let (up, dn) = (at(h), at(-h));
        (
            at(0.0),
            ZCoords {
                z_plus: (up.z_plus - dn.z_plus) / (2.0 * h),
                z_minus: (up.z_minus - dn.z_minus) / (2.0 * h),
            },
        )
    }

    fn fd_a(o: [f64; 3], rate: [f64; 3], h: f64) -> (ACoords, ACoords) {
        // Raw angles keep a(t) continuous across the normalization seams.
        let raw = |s: f64| {
            let (p, t, q) = (o[0] + s * rate[0], o[1] + s * rate[1], o[2] + s * rate[2]);
            ACoords {
                a1: cis(-(p + q) / 2.0) * (t / 2.0).cos(),
                a2: cis((p - q) / 2.0) * (t / 2.0).sin(),
            }
        };
        let (up, dn) = (raw(h), raw(-h));
        (
            raw(0.0),
            ACoords { a1: (up.a1 - dn.a1) / (2.0 * h), a2: (up.a2 - dn.a2) / (2.0 * h) },
        )
    }

    #[test]
    fn chart_kinetic_terms_agree() {
        let mut rng = seeded(45);
        for _ in 0..100 {
            let spin = Spin::new(rand::Rng::random_range(&mut rng, 1..=6));
            let fv = random_fiducial(&mut rng, spin);
            let o = random_euler_theta_in(&mut rng, 0.1, 3.0);
            let rate = random_rates(&mut rng);
            let euler = kinetic_term(&fv, o, rate);
            let (z, zd) = fd_z(o.as_array(), rate, 1e-6);
            assert!((kinetic_term_z(&fv, z, zd).unwrap() - euler).abs() < 1e-8);
            let (a, ad) = fd_a(o.as_array(), rate, 1e-6);
            assert!((kinetic_term_a(&fv, a, ad).unwrap() - euler).abs() < 1e-8);
        }
    }

    #[test]
    fn a_chart_single_weight_has_only_a0_part() {
        let spin = Spin::new(4);
        let fv = FiducialVector::basis(spin, 2).unwrap();
        let a = omega_to_a(EulerAngles::new(0.3, 1.0, 0.2));
        let ad = ACoords { a1: c(0.1, -0.3), a2: c(0.2, 0.5) };
        let expected = (c(0.0, 1.0)
            * 1.0
            * ((a.a1.conj() * ad.a1 - ad.a1.conj() * a.a1) + (a.a2.conj() * ad.a2 - ad.a2.conj() * a.a2)))
            .re;
        assert!((kinetic_term_a(&fv, a, ad).unwrap() - expected).abs() < 1e-15);
        let zero = ACoords { a1: c(0.0, 0.0), a2: c(0.0, 0.0) };
        assert_eq!(kinetic_term_a(&fv, a, zero).unwrap(), 0.0);
    }

    #[test]
    fn z_chart_origin_is_rejected() {
        let fv = random_fiducial(&mut seeded(46), Spin::new(2));
        let z = ZCoords { z_plus: c(0.0, 0.0), z_minus: c(0.0, 0.0) };
        assert!(matches!(kinetic_term_z(&fv, z, z), Err(Error::ZOriginSingular { .. })));
    }

    #[test]
    fn z_chart_static_point() {
        let fv = random_fiducial(&mut seeded(47), Spin::new(2));
        let z = omega_to_z(EulerAngles::new(0.3, 1.0, 2.0)).unwrap();
        let zero = ZCoords { z_plus: c(0.0, 0.0), z_minus: c(0.0, 0.0) };
        assert_eq!(kinetic_term_z(&fv, z, zero).unwrap(), 0.0);
    }
}
