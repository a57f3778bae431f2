//! Stationary-action equations for `Ω(t)` and their integration.
//!
//! The Euler–Lagrange equations of `L = ħ⟨Ω|i∂ₜ|Ω⟩ − H(Ω, t)` are linear in
//! the angle rates. The coefficient matrix is `ħ·dκ`, antisymmetric in the
//! `(φ, θ, ψ)` basis, so it never has full rank: the system has a solution
//! only when `dH` annihilates the kernel of `dκ`, and that solution is
//! determined up to a kernel component. We return the minimum-norm solution
//! and report rank and residual.

use crate::coherent::{a_terms, FiducialVector};
use crate::error::{Error, Result};
use crate::propagator::{h_expectation, HamiltonianSpec};
use crate::spin_core::EulerAngles;
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

/// Step of the central differences used for `∂H`.
pub const FD_STEP: f64 = 1e-6;

/// Relative residual below which a system counts as consistent.
pub const CONSISTENCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalOptions {
    pub hbar: f64,
    /// Zero the `A₁`/`A₄` couplings, keeping only the single-weight structure.
    pub drop_interference: bool,
}

impl Default for SemiclassicalOptions {
    fn default() -> Self {
        SemiclassicalOptions {
            hbar: 1.0,
            drop_interference: false,
        }
    }
}

/// `m · (φ̇, θ̇, ψ̇) = b`, rows in the order `θ`-, `φ`-, `ψ`-equation:
///
/// ```text
/// ħ[(A₀ sinθ + A₁ cosθ) φ̇ + A₁ ψ̇]          = −∂H/∂θ
/// ħ[(A₀ sinθ + A₁ cosθ) θ̇ − A₄ sinθ ψ̇]     =  ∂H/∂φ
/// ħ[A₄ sinθ φ̇ + A₁ θ̇]                      =  ∂H/∂ψ
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct VelocitySystem {
    pub m: Matrix3<f64>,
    pub b: Vector3<f64>,
    pub rank: usize,
    pub residual: f64,
}

impl VelocitySystem {
    /// Rows reordered to `(φ, −θ, ψ)`; the result is antisymmetric and
    /// equals `ħ` times the matrix of `dκ`.
    pub fn antisymmetric_form(&self) -> Matrix3<f64> {
        let mut f = Matrix3::zeros();
        f.set_row(0, &self.m.row(1));
        f.set_row(1, &(-self.m.row(0)));
        f.set_row(2, &self.m.row(2));
        f
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub rank: usize,
    pub residual: f64,
    pub consistent: bool,
}

/// `(∂H/∂φ, ∂H/∂θ, ∂H/∂ψ)` at `(Ω, t)`.
pub fn energy_gradient(fv: &FiducialVector, spec: &HamiltonianSpec, omega: EulerAngles, t: f64) -> Result<[f64; 3]> {
    if spec.degree() <= 1 {
        linear_gradient(fv, spec, omega, t)
    } else {
        finite_difference_gradient(fv, spec, omega, t)
    }
}

/// Central differences of `H(Ω, t)` in each raw angle with step [`FD_STEP`].
pub fn finite_difference_gradient(
    fv: &FiducialVector,
    spec: &HamiltonianSpec,
    omega: EulerAngles,
    t: f64,
) -> Result<[f64; 3]> {
    let base = omega.as_array();
    let mut grad = [0.0; 3];
    for (k, g) in grad.iter_mut().enumerate() {
        let mut up = base;
        let mut down = base;
        up[k] += FD_STEP;
        down[k] -= FD_STEP;
        let hu = h_expectation(fv, spec, EulerAngles::new(up[0], up[1], up[2]), t)?;
        let hd = h_expectation(fv, spec, EulerAngles::new(down[0], down[1], down[2]), t)?;
        *g = (hu - hd) / (2.0 * FD_STEP);
    }
    Ok(grad)
}

fn rot_z(a: f64, derivative: bool) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    if derivative {
        Matrix3::new(-s, -c, 0.0, c, -s, 0.0, 0.0, 0.0, 0.0)
    } else {
        Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
    }
}

fn rot_y(a: f64, derivative: bool) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    if derivative {
        Matrix3::new(-s, 0.0, c, 0.0, 0.0, 0.0, -c, 0.0, -s)
    } else {
        Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
    }
}

// ⟨Ω|S_a|Ω⟩ = Σ_b O_ab(Ω) ⟨Ψ₀|S_b|Ψ₀⟩ with O the zyz rotation, so the
// gradient of any linear Hamiltonian follows from the derivatives of O.
fn linear_gradient(fv: &FiducialVector, spec: &HamiltonianSpec, omega: EulerAngles, t: f64) -> Result<[f64; 3]> {
    if fv.spin() != spec.spin() {
        return Err(Error::SpinMismatch {
            left: fv.spin().two_s,
            right: spec.spin().two_s,
        });
    }
    let g0 = fv.raising_moment();
    let moments = Vector3::new(g0.re, g0.im, fv.a0());
    // Coefficients of S₁, S₂, S₃ in H(t), constants dropped.
    let mut field = Vector3::<f64>::zeros();
    for term in spec.terms() {
        let c = term.coeff * term.profile.value(t);
        match (term.p, term.q, term.r) {
            // c S₊ = c (S₁ + i S₂); only the Hermitian total survives, so take real parts.
            (1, 0, 0) => field += Vector3::new(c.re, -c.im, 0.0),
            (0, 0, 1) => field += Vector3::new(c.re, c.im, 0.0),
            (0, 1, 0) => field[2] += c.re,
            _ => {}
        }
    }
    let (phi, theta, psi) = (omega.phi(), omega.theta(), omega.psi());
    let parts = [
        rot_z(phi, true) * rot_y(theta, false) * rot_z(psi, false),
        rot_z(phi, false) * rot_y(theta, true) * rot_z(psi, false),
        rot_z(phi, false) * rot_y(theta, false) * rot_z(psi, true),
    ];
    Ok(parts.map(|d| field.dot(&(d * moments))))
}

/// Assembles the velocity system at `(Ω, t)` and solves it once to fill in
/// rank and residual.
pub fn build_system(
    fv: &FiducialVector,
    spec: &HamiltonianSpec,
    omega: EulerAngles,
    t: f64,
    options: &SemiclassicalOptions,
) -> Result<VelocitySystem> {
    let a = a_terms(fv, omega);
    let (a1, a4) = if options.drop_interference { (0.0, 0.0) } else { (a.a1, a.a4) };
    let (st, ct) = omega.theta().sin_cos();
    let p = a.a0 * st + a1 * ct;
    let h = options.hbar;
    let m = Matrix3::new(p, 0.0, a1, 0.0, p, -a4 * st, a4 * st, a1, 0.0) * h;
    let [d_phi, d_theta, d_psi] = energy_gradient(fv, spec, omega, t)?;
    let b = Vector3::new(-d_theta, d_phi, d_psi);
    let mut sys = VelocitySystem {
        m,
        b,
        rank: 0,
        residual: 0.0,
    };
    let (_, diag) = least_squares(&sys);
    sys.rank = diag.rank;
    sys.residual = diag.residual;
    Ok(sys)
}

fn least_squares(sys: &VelocitySystem) -> (Vector3<f64>, Diagnostics) {
    let svd = sys.m.svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = 1e-10 * smax.max(f64::MIN_POSITIVE);
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    let x = if rank == 0 {
        Vector3::zeros()
    } else {
        svd.solve(&sys.b, cutoff).expect("u and v were computed")
    };
    let residual = (sys.m * x - sys.b).norm();
    let consistent = residual <= CONSISTENCY_TOL * sys.b.norm();
    (
        x,
        Diagnostics {
            rank,
            residual,
            consistent,
        },
    )
}

/// Minimum-norm least-squares rates `(φ̇, θ̇, ψ̇)`.
///
/// Fails with `InconsistentSystem` when the residual exceeds
/// [`CONSISTENCY_TOL`]`·‖b‖`.
pub fn solve_velocities(sys: &VelocitySystem) -> Result<([f64; 3], Diagnostics)> {
    let (x, diag) = least_squares(sys);
    if !diag.consistent {
        return Err(Error::InconsistentSystem {
            residual: diag.residual,
            rhs_norm: sys.b.norm(),
            time: None,
        });
    }
    Ok(([x[0], x[1], x[2]], diag))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
    /// `H(Ω(t), t)`
    pub energy: f64,
    pub rank: usize,
    pub residual: f64,
}

impl TrajectorySample {
    pub fn omega(&self) -> EulerAngles {
        EulerAngles::new(self.phi, self.theta, self.psi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    /// Largest angle difference at the final time between step `dt` and `dt/2`.
    pub error_estimate: f64,
}

fn rates_at(
    fv: &FiducialVector,
    spec: &HamiltonianSpec,
    q: [f64; 3],
    t: f64,
    options: &SemiclassicalOptions,
) -> Result<([f64; 3], Diagnostics)> {
    let sys = build_system(fv, spec, EulerAngles::new(q[0], q[1], q[2]), t, options)?;
    solve_velocities(&sys).map_err(|e| match e {
        Error::InconsistentSystem { residual, rhs_norm, .. } => Error::InconsistentSystem {
            residual,
            rhs_norm,
            time: Some(t),
        },
        other => other,
    })
}

fn axpy(q: [f64; 3], h: f64, k: [f64; 3]) -> [f64; 3] {
    [q[0] + h * k[0], q[1] + h * k[1], q[2] + h * k[2]]
}

fn rk4(
    fv: &FiducialVector,
    spec: &HamiltonianSpec,
    omega0: EulerAngles,
    t_span: (f64, f64),
    steps: usize,
    options: &SemiclassicalOptions,
) -> Result<Vec<TrajectorySample>> {
    let (t0, t1) = t_span;
    let dt = (t1 - t0) / steps as f64;
    let mut q = omega0.as_array();
    let mut out = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = t0 + k as f64 * dt;
        let (k1, diag) = rates_at(fv, spec, q, t, options)?;
        out.push(TrajectorySample {
            t,
            phi: q[0],
            theta: q[1],
            psi: q[2],
            energy: h_expectation(fv, spec, EulerAngles::new(q[0], q[1], q[2]), t)?,
            rank: diag.rank,
            residual: diag.residual,
        });
        if k == steps {
            break;
        }
        let (k2, _) = rates_at(fv, spec, axpy(q, dt / 2.0, k1), t + dt / 2.0, options)?;
        let (k3, _) = rates_at(fv, spec, axpy(q, dt / 2.0, k2), t + dt / 2.0, options)?;
        let (k4, _) = rates_at(fv, spec, axpy(q, dt, k3), t + dt, options)?;
        for i in 0..3 {
            q[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(out)
}

/// Fixed-step RK4 from `omega0` over `t_span` with step close to `dt` (the
/// interval is split into a whole number of steps). Angles are carried raw,
/// so `φ` and `ψ` accumulate without wrapping.
pub fn integrate_trajectory(
    fv: &FiducialVector,
    spec: &HamiltonianSpec,
    omega0: EulerAngles,
    t_span: (f64, f64),
    dt: f64,
    options: &SemiclassicalOptions,
) -> Result<Trajectory> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !(t_span.1 >= t_span.0) {
        return Err(Error::InvalidArgument("t_span must be increasing".into()));
    }
    let steps = (((t_span.1 - t_span.0) / dt).round() as usize).max(1);
    let samples = rk4(fv, spec, omega0, t_span, steps, options)?;
    let fine = rk4(fv, spec, omega0, t_span, 2 * steps, options)?;
    let (a, b) = (samples.last().expect("non-empty"), fine.last().expect("non-empty"));
    let error_estimate = (a.phi - b.phi).abs().max((a.theta - b.theta).abs()).max((a.psi - b.psi).abs());
    Ok(Trajectory {
        samples,
        error_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::{matrix_elements, state_amplitudes};
    use crate::geometry::two_form;
    use crate::linalg::c;
    use crate::propagator::{exact_propagator, Profile, Term};
    use crate::random::{random_euler_theta_in, random_fiducial, seeded};
    use crate::spin_core::{spin_operators, Spin};
    use rand::Rng;
    use std::f64::consts::PI;

    fn opts() -> SemiclassicalOptions {
        SemiclassicalOptions::default()
    }

    #[test]
    fn single_weight_system_has_two_rows() {
        for two_s in 1..=6 {
            let spin = Spin::new(two_s);
            let fv = FiducialVector::lowest(spin);
            let om = EulerAngles::new(0.4, 1.1, 2.2);
            let sys = build_system(&fv, &HamiltonianSpec::zero(spin), om, 0.0, &opts()).unwrap();
            let d = -spin.s() * 1.1f64.sin();
            let want = Matrix3::new(d, 0.0, 0.0, 0.0, d, 0.0, 0.0, 0.0, 0.0);
            assert!((sys.m - want).abs().max() < 1e-14);
            assert_eq!(sys.rank, 2);
        }
    }

    #[test]
    fn precession_velocities() {
        for two_s in [1, 2, 5] {
            let spin = Spin::new(two_s);
            let fv = FiducialVector::lowest(spin);
            let (omega, hbar) = (1.3, 0.7);
            let spec = HamiltonianSpec::precession(spin, hbar * omega);
            let options = SemiclassicalOptions { hbar, ..opts() };
            let sys = build_system(&fv, &spec, EulerAngles::new(0.2, 0.9, 0.1), 0.0, &options).unwrap();
            let (v, diag) = solve_velocities(&sys).unwrap();
            assert!((v[0] - omega).abs() < 1e-12 && v[1].abs() < 1e-12 && v[2].abs() < 1e-12);
            assert_eq!(diag.rank, 2);
            assert!(diag.consistent);
        }
    }

    #[test]
    fn coefficient_matrix_is_scaled_two_form() {
        let mut rng = seeded(31);
        for _ in 0..20 {
            let spin = Spin::new(rng.random_range(1..=5));
            let fv = random_fiducial(&mut rng, spin);
            let om = random_euler_theta_in(&mut rng, 0.1, 3.0);
            let hbar = rng.random_range(0.5..2.0);
            let options = SemiclassicalOptions { hbar, ..opts() };
            let sys = build_system(&fv, &HamiltonianSpec::zero(spin), om, 0.0, &options).unwrap();
            let f = sys.antisymmetric_form();
            assert!((f + f.transpose()).abs().max() < 1e-10);
            let w = two_form(&fv, om).matrix();
            for i in 0..3 {
                for j in 0..3 {
                    assert!((f[(i, j)] - hbar * w[i][j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn full_rank_system_is_solved_directly() {
        let mut rng = seeded(32);
        let m = Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let b = Vector3::new(0.3, -0.2, 0.9);
        let sys = VelocitySystem {
            m,
            b,
            rank: 3,
            residual: 0.0,
        };
        let (_, diag) = solve_velocities(&sys).unwrap();
        assert_eq!(diag.rank, 3);
        assert!(diag.residual <= 1e-12);
    }

    #[test]
    fn inconsistent_system_is_reported() {
        let sys = VelocitySystem {
            m: Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0),
            b: Vector3::new(0.0, 0.0, 1.0),
            rank: 2,
            residual: 0.0,
        };
        assert!(matches!(solve_velocities(&sys), Err(Error::InconsistentSystem { time: None, .. })));
    }

    fn random_linear_spec<R: Rng>(rng: &mut R, spin: Spin) -> HamiltonianSpec {
        let cplus = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let profile = Profile::Cosine { omega: 1.7, phase: 0.3 };
        HamiltonianSpec::new(
            spin,
            vec![
                Term::constant(0, 0, 0, c(0.4, 0.0)),
                Term::constant(0, 1, 0, c(rng.random_range(-1.0..1.0), 0.0)),
                Term { profile, ..Term::constant(1, 0, 0, cplus) },
                Term { profile, ..Term::constant(0, 0, 1, cplus.conj()) },
            ],
        )
        .unwrap()
    }

    #[test]
    fn analytic_gradient_matches_differences() {
        let mut rng = seeded(33);
        for _ in 0..30 {
            let spin = Spin::new(rng.random_range(1..=4));
            let fv = random_fiducial(&mut rng, spin);
            let spec = random_linear_spec(&mut rng, spin);
            let om = random_euler_theta_in(&mut rng, 0.1, 3.0);
            let t = rng.random_range(0.0..3.0);
            let a = energy_gradient(&fv, &spec, om, t).unwrap();
            let f = finite_difference_gradient(&fv, &spec, om, t).unwrap();
            for k in 0..3 {
                assert!((a[k] - f[k]).abs() < 1e-8, "{a:?} {f:?}");
            }
        }
    }

    #[test]
    fn precession_trajectory_over_one_period() {
        let spin = Spin::new(3);
        let fv = FiducialVector::lowest(spin);
        let omega = 2.0;
        let spec = HamiltonianSpec::precession(spin, omega);
        let period = 2.0 * PI / omega;
        let traj =
            integrate_trajectory(&fv, &spec, EulerAngles::new(0.0, 0.8, 0.0), (0.0, period), period / 200.0, &opts())
                .unwrap();
        let e0 = traj.samples[0].energy;
        for s in &traj.samples {
            assert!((s.phi - omega * s.t).abs() < 1e-8);
            assert!((s.theta - 0.8).abs() < 1e-8 && s.psi.abs() < 1e-8);
            assert!((s.energy - e0).abs() < 1e-8);
            assert_eq!(s.rank, 2);
        }
        assert!(traj.error_estimate < 1e-8);
    }

    #[test]
    fn zero_hamiltonian_path_is_constant() {
        let mut rng = seeded(34);
        let spin = Spin::new(2);
        let fv = random_fiducial(&mut rng, spin);
        let om = EulerAngles::new(0.5, 1.0, 1.5);
        let traj = integrate_trajectory(&fv, &HamiltonianSpec::zero(spin), om, (0.0, 1.0), 0.1, &opts()).unwrap();
        for s in &traj.samples {
            assert_eq!([s.phi, s.theta, s.psi], om.as_array());
        }
    }

    #[test]
    fn expectations_follow_exact_quantum_dynamics() {
        // For linear Hamiltonians ⟨S⟩ obeys the classical equations exactly.
        let mut rng = seeded(35);
        for two_s in [1, 2, 3] {
            let spin = Spin::new(two_s);
            let fv = random_fiducial(&mut rng, spin);
            let spec = HamiltonianSpec::linear(spin, 1.0, 0.3, 0.0);
            let om0 = EulerAngles::new(0.3, 1.2, 0.7);
            let traj = integrate_trajectory(&fv, &spec, om0, (0.0, 2.0), 0.005, &opts()).unwrap();
            let ops = spin_operators(spin);
            let v0 = state_amplitudes(&fv, om0);
            for s in traj.samples.iter().step_by(50) {
                let u = exact_propagator(&spec, 0.0, s.t, 1e-12).unwrap();
                let v = u * &v0;
                let s3 = v.dotc(&(&ops.s3 * &v));
                let sp = v.dotc(&(&ops.s_plus * &v));
                let me = matrix_elements(&fv, s.omega());
                assert!((me.s3 - s3.re).abs() < 1e-8, "2s={two_s} t={}", s.t);
                assert!((me.s_plus - sp).norm() < 1e-8);
                assert!((s.energy - traj.samples[0].energy).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn interference_terms_matter_for_mixed_fiducials() {
        let mut rng = seeded(36);
        let spin = Spin::new(2);
        let spec = HamiltonianSpec::linear(spin, 1.0, 0.3, 0.0);
        let om = EulerAngles::new(0.3, 1.2, 0.7);
        let dropped = SemiclassicalOptions {
            drop_interference: true,
            ..opts()
        };
        let single = FiducialVector::basis(spin, 0).unwrap();
        let full = build_system(&single, &spec, om, 0.0, &opts()).unwrap();
        let cut = build_system(&single, &spec, om, 0.0, &dropped).unwrap();
        assert_eq!(full, cut);

        let mixed = random_fiducial(&mut rng, spin);
        let full = build_system(&mixed, &spec, om, 0.0, &opts()).unwrap();
        let cut = build_system(&mixed, &spec, om, 0.0, &dropped).unwrap();
        let (v_full, _) = solve_velocities(&full).unwrap();
        match solve_velocities(&cut) {
            Err(Error::InconsistentSystem { .. }) => {}
            Ok((v_cut, _)) => assert!((0..3).any(|k| (v_full[k] - v_cut[k]).abs() > 1e-3)),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn golden_trajectory_for_mixed_fiducial() {
        let fv = FiducialVector::new(Spin::new(2), vec![c(0.6, 0.0), c(0.3, 0.4), c(-0.2, 0.5)]).unwrap();
        let spec = HamiltonianSpec::linear(Spin::new(2), 1.0, 0.3, 0.0);
        let traj = integrate_trajectory(&fv, &spec, EulerAngles::new(0.3, 1.2, 0.7), (0.0, 1.0), 0.01, &opts()).unwrap();
        let last = traj.samples.last().unwrap();
        let golden = [1.183154163587588, 0.964166633143837, 0.941244428003097];
        for (got, want) in [last.phi, last.theta, last.psi].iter().zip(golden) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn quadratic_hamiltonian_consistency_is_reported() {
        let mut rng = seeded(37);
        let spin = Spin::new(2);
        let fv = random_fiducial(&mut rng, spin);
        let spec = HamiltonianSpec::new(spin, vec![Term::constant(0, 2, 0, c(1.0, 0.0))]).unwrap();
        let om = EulerAngles::new(0.3, 1.2, 0.7);
        let sys = build_system(&fv, &spec, om, 0.0, &opts()).unwrap();
        assert_eq!(sys.rank, 2);
        assert!(sys.residual > 1e-3);
        let err = integrate_trajectory(&fv, &spec, om, (0.5, 1.0), 0.1, &opts()).unwrap_err();
        assert!(matches!(err, Error::InconsistentSystem { time: Some(t), .. } if t == 0.5));

        // A single-weight fiducial has ker dκ = ∂_ψ, along which S₃² is constant.
        let single = FiducialVector::basis(spin, 2).unwrap();
        let sys = build_system(&single, &spec, om, 0.0, &opts()).unwrap();
        let (v, diag) = solve_velocities(&sys).unwrap();
        assert!(diag.consistent && v[2] == 0.0);
    }
}
