use crate::Metric;
use rand::Rng;
use su2cs::coherent::{
    build_grid, build_path_grid, cross_orthogonality_defect, orthogonality_defect, overlap, resolution_residual,
    FiducialVector, DEFAULT_OVERSAMPLE,
};
use su2cs::contraction::{
    a0_from_levels, adequate_truncation, contraction_deviation, displacement_matrix, dns_amplitudes,
    dns_number_check, fock_from_spin_fiducial, generalized_eigen_check, ccs_resolution_residual,
    measure_pushforward_deviation, scaled_ladder_factor, spin_fiducial_from_fock, FockVector,
};
use su2cs::geometry::{gauge_potential, kinetic_term, numeric_kinetic_term, numeric_two_form, one_form, two_form};
use su2cs::linalg::{distance_from_identity, op_norm, C64};
use su2cs::parametrizations::{kinetic_term_a, kinetic_term_z, omega_to_z, ACoords, ZCoords};
use su2cs::propagator::{
    discrete_cspi, infinitesimal_overlap, oracle_amplitude, HamiltonianSpec, KernelMode, Schedule,
};
use su2cs::random::{
    random_complex_vector, random_euler, random_euler_theta_in, random_fiducial, random_rates, seeded,
};
use su2cs::semiclassical::{build_system, integrate_trajectory, solve_velocities, SemiclassicalOptions};
use su2cs::spin_core::{
    big_r, compose_euler, composition_invariants, invert_euler, su2_matrix, triple_cos_theta, EulerAngles,
    RotationInvariants, Spin,
};
use su2cs::Result;
use std::f64::consts::PI;

const SEED: u64 = 20_240_000;

fn spin_label(two_s: u32) -> String {
    if two_s.is_multiple_of(2) {
        format!("s={}", two_s / 2)
    } else {
        format!("s={two_s}/2")
    }
}

fn rotation(spin: Spin, o: EulerAngles) -> su2cs::CMatrix {
    big_r(spin, o).entries
}

pub fn resolution_of_unity() -> Result<Vec<Metric>> {
    let mut rng = seeded(SEED + 1);
    let mut out = Vec::new();
    for two_s in [1, 2, 3, 4, 10] {
        let spin = Spin::new(two_s);
        let grid = build_grid(spin, DEFAULT_OVERSAMPLE);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            worst = worst.max(resolution_residual(&random_fiducial(&mut rng, spin), &grid)?);
        }
        out.push(Metric::at_most(format!("max residual {}", spin_label(two_s)), worst, 1e-10));
    }
    Ok(out)
}

pub fn rotation_algebra() -> Result<Vec<Metric>> {
    let mut rng = seeded(SEED + 2);
    let (mut unitarity, mut inverse, mut product, mut closed, mut triple) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in 0..100u32 {
        let spin = Spin::new(1 + k % 4);
        let (o, o1, o2) = (random_euler(&mut rng), random_euler(&mut rng), random_euler(&mut rng));
        let r = rotation(spin, o);
        unitarity = unitarity.max(distance_from_identity(&(r.adjoint() * &r)));
        inverse = inverse.max(op_norm(&(rotation(spin, invert_euler(o)) - r.adjoint())));
        let composed = rotation(spin, compose_euler(o2, o1));
        product = product.max(op_norm(&(composed - rotation(spin, o2) * rotation(spin, o1))));
        let from_matrix = RotationInvariants::from_su2(&(su2_matrix(o2) * su2_matrix(o1)));
        closed = closed.max(composition_invariants(o2, o1).distance(&from_matrix));
        let three = RotationInvariants::from_su2(&(su2_matrix(o2) * su2_matrix(o) * su2_matrix(o1)));
        triple = triple.max((triple_cos_theta(o2, o, o1) - three.cos_theta).abs());
    }
    Ok(vec![
        Metric::at_most("unitarity defect", unitarity, 1e-10),
        Metric::at_most("inverse defect", inverse, 1e-10),
        Metric::at_most("composed matrix defect", product, 1e-10),
        Metric::at_most("two-rotation closed form", closed, 1e-10),
        Metric::at_most("three-rotation cos theta", triple, 1e-10),
    ])
}

pub fn orthogonality() -> Result<Vec<Metric>> {
    let mut out = Vec::new();
    for two_s in 0..=4 {
        let spin = Spin::new(two_s);
        let d = orthogonality_defect(spin, &build_grid(spin, DEFAULT_OVERSAMPLE));
        out.push(Metric::at_most(format!("same-spin defect {}", spin_label(two_s)), d, 1e-10));
    }
    let grid = build_grid(Spin::new(4), DEFAULT_OVERSAMPLE);
    let mut cross: f64 = 0.0;
    for a in 0..=4u32 {
        for b in (a + 2..=4).step_by(2) {
            cross = cross.max(cross_orthogonality_defect(Spin::new(a), Spin::new(b), &grid)?);
        }
    }
    out.push(Metric::at_most("distinct-spin defect", cross, 1e-10));
    Ok(out)
}

pub fn infinitesimal_overlap_order() -> Result<Vec<Metric>> {
    let mut rng = seeded(SEED + 4);
    let steps: Vec<f64> = (0..7).map(|k| 10f64.powf(-5.0 + 0.5 * k as f64)).collect();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..20 {
        let spin = Spin::new(rng.random_range(1..=6));
        let fv = random_fiducial(&mut rng, spin);
        let om = random_euler(&mut rng);
        let dir = random_rates(&mut rng);
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        let points: Vec<(f64, f64)> = steps
            .iter()
            .map(|&h| {
                let d = dir.map(|x| x * h / norm);
                let next = om.offset(d[0], d[1], d[2]);
                let rem = (overlap(&fv, next, om) - infinitesimal_overlap(&fv, om, d)).norm();
                (h.log10(), rem.log10())
            })
            .collect();
        let slope = fitted_slope(&points);
        lo = lo.min(slope);
        hi = hi.max(slope);
    }
    Ok(vec![
        Metric::between("smallest log-log slope", lo, 1.9, 2.1),
        Metric::between("largest log-log slope", hi, 1.9, 2.1),
    ])
}

fn fitted_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub fn kinetic_term_agreement() -> Result<Vec<Metric>> {
    let mut rng = seeded(SEED + 5);
    let (mut diff, mut imag) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let spin = Spin::new(rng.random_range(1..=6));
        let fv = random_fiducial(&mut rng, spin);
        let o = random_euler(&mut rng);
        let rate = random_rates(&mut rng);
        let numeric = numeric_kinetic_term(&fv, o, rate, 1e-5);
        diff = diff.max((kinetic_term(&fv, o, rate) - numeric.re).abs());
        imag = imag.max(numeric.im.abs());
    }
    Ok(vec![
        Metric::at_most("analytic vs finite difference", diff, 1e-6),
        Metric::at_most("imaginary part", imag, 1e-9),
    ])
}

pub fn path_integral_convergence() -> Result<Vec<Metric>> {
    let mut out = Vec::new();
    let om = EulerAngles::identity();
    for two_s in [1, 2] {
        let spin = Spin::new(two_s);
        let fv = FiducialVector::lowest(spin);
        let spec = HamiltonianSpec::linear(spin, 1.0, 0.3, 0.0);
        let grid = build_path_grid(spin, DEFAULT_OVERSAMPLE);
        let exact = oracle_amplitude(&fv, &spec, om, om, &Schedule::new(0.0, 2.0 * PI, 1), 1e-12)?;
        for mode in KernelMode::ALL {
            let mut errs = Vec::new();
            for n in [32, 64] {
                let r = discrete_cspi(&fv, &spec, om, om, &Schedule::new(0.0, 2.0 * PI, n), &grid, mode)?;
                errs.push((r.amplitude - exact).norm());
            }
            let label = format!("{} {mode}", spin_label(two_s));
            out.push(Metric::between(format!("error ratio 32/64 {label}"), errs[0] / errs[1], 1.7, 2.3));
            out.push(Metric::at_most(format!("error at n=64 {label}"), errs[1], 0.02));
        }
    }
    Ok(out)
}

pub fn zero_hamiltonian_collapse() -> Result<Vec<Metric>> {
    let mut rng = seeded(SEED + 7);
    let mut worst: f64 = 0.0;
    for two_s in [1, 2, 3] {
        let spin = Spin::new(two_s);
        let fv = random_fiducial(&mut rng, spin);
        let grid = build_path_grid(spin, DEFAULT_OVERSAMPLE);
        let spec = HamiltonianSpec::zero(spin);
        let (a, b) = (random_euler(&mut rng), random_euler(&mut rng));
        let want = overlap(&fv, b, a);
        for n in 1..=8 {
            for mode in KernelMode::ALL {
                let r = discrete_cspi(&fv, &spec, a, b, &Schedule::new(0.0, 1.0, n), &grid, mode)?;
                worst = worst.max((r.amplitude - want).norm());
            }
        }
    }
    Ok(vec![Metric::at_most("max deviation from overlap", worst, 1e-12)])
}

pub fn topological_structure() -> Result<Vec<Metric>> {
    let mut rng = seeded(SEED + 8);
    let mut exterior: f64 = 0.0;
    for _ in 0..30 {
        let spin = Spin::new(rng.random_range(1..=6));
        let fv = random_fiducial(&mut rng, spin);
        let o = random_euler(&mut rng);
        exterior = exterior.max(two_form(&fv, o).distance(&numeric_two_form(&fv, o, 1e-5)));
    }
    let mut singular = 0;
    for _ in 0..50 {
        let spin = Spin::new(rng.random_range(1..=6));
        let fv = random_fiducial(&mut rng, spin);
        for theta in [0.0, PI] {
            if !gauge_potential(&fv, theta, rng.random_range(0.0..4.0 * PI), rng.random_range(0.0..4.0 * PI)).is_finite() {
                singular += 1;
            }
        }
    }
    let mut single: f64 = 0.0;
    for two_s in [1, 2, 5] {
        let spin = Spin::new(two_s);
        for i in 0..spin.dim() {
            let fv = FiducialVector::basis(spin, spin.two_m(i))?;
            let m = spin.m(i);
            for _ in 0..5 {
                let o = random_euler(&mut rng);
                let k = one_form(&fv, o);
                single = single
                    .max((k.k_phi - m * o.theta().cos()).abs())
                    .max(k.k_theta.abs())
                    .max((k.k_psi - m).abs());
            }
        }
    }
    Ok(vec![
        Metric::at_most("exterior derivative vs finite difference", exterior, 1e-6),
        Metric::none("non-finite gauge potentials at the poles", singular),
        Metric::at_most("single-weight one-form deviation", single, 0.0),
    ])
}

pub fn semiclassical_precession() -> Result<Vec<Metric>> {
    let (hbar, omega) = (0.7, 1.3);
    let options = SemiclassicalOptions { hbar, drop_interference: false };
    let period = 2.0 * PI / omega;
    let start = EulerAngles::new(0.3, 1.1, 0.5);
    let (mut angle, mut rate, mut drift, mut bad_rank) = (0.0f64, 0.0f64, 0.0f64, 0);
    for two_s in [1, 2, 5] {
        let spin = Spin::new(two_s);
        let fv = FiducialVector::lowest(spin);
        let spec = HamiltonianSpec::precession(spin, hbar * omega);
        let traj = integrate_trajectory(&fv, &spec, start, (0.0, period), period / 400.0, &options)?;
        let e0 = traj.samples[0].energy;
        for s in &traj.samples {
            angle = angle
                .max((s.phi - start.phi() - omega * s.t).abs())
                .max((s.theta - start.theta()).abs());
            drift = drift.max((s.energy - e0).abs());
            if s.rank != 2 {
                bad_rank += 1;
            }
            let (v, _) = solve_velocities(&build_system(&fv, &spec, s.omega(), s.t, &options)?)?;
            rate = rate.max((v[0] - omega).abs()).max(v[1].abs());
        }
    }
    Ok(vec![
        Metric::at_most("velocity deviation", rate, 1e-8),
        Metric::at_most("trajectory deviation over one period", angle, 1e-8),
        Metric::at_most("energy drift", drift, 1e-8),
        Metric::none("samples with rank other than 2", bad_rank),
    ])
}

pub fn contraction_limit() -> Result<Vec<Metric>> {
    let spins = [100, 200, 400].map(Spin::new);
    let mut devs = Vec::new();
    for spin in spins {
        devs.push(contraction_deviation(&FiducialVector::lowest(spin), C64::new(1.0, 0.0), 40)?);
    }
    let increases = devs.windows(2).filter(|w| w[1] >= w[0]).count();
    // f(s, m)/√(2s) against √n, relative error over the bound n/(2·2s).
    let mut ladder: f64 = 0.0;
    for two_s in 100..=400 {
        let spin = Spin::new(two_s);
        for n in 1..=10 {
            let rel = (scaled_ladder_factor(spin, n) - (n as f64).sqrt()).abs() / (n as f64).sqrt();
            ladder = ladder.max(rel / (n as f64 / (2.0 * two_s as f64)));
        }
    }
    let mut rng = seeded(SEED + 10);
    let mut reindex: f64 = 0.0;
    for spin in spins {
        let fock = FockVector::new(random_complex_vector(&mut rng, 4))?;
        let fv = spin_fiducial_from_fock(spin, &fock)?;
        let levels = fock_from_spin_fiducial(&fv);
        reindex = reindex
            .max((fv.a0() + spin.s() - levels.mean_number()).abs())
            .max((a0_from_levels(&fv) - fv.a0()).abs());
    }
    let measure: Vec<f64> = spins.iter().map(|&s| measure_pushforward_deviation(s, 2.0, 400)).collect();
    Ok(vec![
        Metric::none("non-decreasing steps in the amplitude deviation", increases),
        Metric::at_most("amplitude deviation at s=200", devs[2], 0.01),
        Metric::at_most("ladder factor error over its bound", ladder, 1.0),
        Metric::at_most("A0 reindex identity", reindex, 1e-12),
        Metric::between("measure deviation ratio s=50/s=100", measure[0] / measure[1], 1.8, 2.2),
        Metric::between("measure deviation ratio s=100/s=200", measure[1] / measure[2], 1.8, 2.2),
    ])
}

pub fn canonical_side() -> Result<Vec<Metric>> {
    let mut rng = seeded(SEED + 11);
    let mut closed: f64 = 0.0;
    for _ in 0..4 {
        let alpha = random_complex_vector(&mut rng, 1)[0] * 0.8;
        let d = displacement_matrix(alpha, 90)?;
        for n in 0..=8 {
            let v = dns_amplitudes(alpha, n, 90)?;
            for m in 0..=40 {
                closed = closed.max((d[(m, n)] - v[m]).norm());
            }
        }
    }
    let fv = FockVector::new(vec![C64::new(0.5, 0.0), C64::new(0.1, 0.6), C64::new(0.0, -0.6)])?;
    let (mut ev1, mut ev2) = (0.0f64, 0.0f64);
    for _ in 0..4 {
        let alpha = random_complex_vector(&mut rng, 1)[0];
        ev1 = ev1.max(generalized_eigen_check(alpha, &fv, adequate_truncation(alpha, &fv))?);
        for n in 0..=5 {
            let n_max = adequate_truncation(alpha, &FockVector::number(n));
            ev2 = ev2.max(dns_number_check(alpha, n, n_max)?);
        }
    }
    let vacuum = ccs_resolution_residual(&FockVector::vacuum(), 8.0, 80, 48, 40, 20)?;
    let mixed = ccs_resolution_residual(&fv, 8.0, 80, 48, 40, 20)?;
    Ok(vec![
        Metric::at_most("closed form vs displacement columns", closed, 1e-9),
        Metric::at_most("generalized eigenvector residual", ev1, 1e-8),
        Metric::at_most("shifted number residual", ev2, 1e-8),
        Metric::at_most("resolution residual, vacuum", vacuum, 1e-6),
        Metric::at_most("resolution residual, degree-2 vector", mixed, 1e-6),
    ])
}

pub fn chart_compatibility() -> Result<Vec<Metric>> {
    let mut rng = seeded(SEED + 12);
    let h = 1e-6;
    let (mut z_dev, mut a_dev) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let spin = Spin::new(rng.random_range(1..=6));
        let fv = random_fiducial(&mut rng, spin);
        let o = random_euler_theta_in(&mut rng, 0.1, 3.0);
        let rate = random_rates(&mut rng);
        let euler = kinetic_term(&fv, o, rate);
        let along = |s: f64| o.offset(s * rate[0], s * rate[1], s * rate[2]);

        let (zp, zm) = (omega_to_z(along(h))?, omega_to_z(along(-h))?);
        let z_dot = ZCoords {
            z_plus: (zp.z_plus - zm.z_plus) / (2.0 * h),
            z_minus: (zp.z_minus - zm.z_minus) / (2.0 * h),
        };
        z_dev = z_dev.max((kinetic_term_z(&fv, omega_to_z(o)?, z_dot)? - euler).abs());

        // Raw angles keep a(t) continuous across the normalization seams.
        let raw = |s: f64| {
            let (p, t, q) = (o.phi() + s * rate[0], o.theta() + s * rate[1], o.psi() + s * rate[2]);
            ACoords {
                a1: C64::from_polar((t / 2.0).cos(), -(p + q) / 2.0),
                a2: C64::from_polar((t / 2.0).sin(), (p - q) / 2.0),
            }
        };
        let (ap, am) = (raw(h), raw(-h));
        let a_dot = ACoords {
            a1: (ap.a1 - am.a1) / (2.0 * h),
            a2: (ap.a2 - am.a2) / (2.0 * h),
        };
        a_dev = a_dev.max((kinetic_term_a(&fv, raw(0.0), a_dot)? - euler).abs());
    }
    Ok(vec![
        Metric::at_most("z-chart vs Euler kinetic term", z_dev, 1e-8),
        Metric::at_most("a-chart vs Euler kinetic term", a_dev, 1e-8),
    ])
}
