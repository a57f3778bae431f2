use super::{cells, CommandResult, Series};
use crate::config::{angles, fiducial, ConfigError, Invocation, OneOrMany};
use serde::Deserialize;
use serde_json::{json, Value};
use std::f64::consts::PI;
use su2cs::coherent::{
    build_grid, matrix_elements, orthogonality_defect, overlap_by_composition, resolution_residual, FiducialFile,
    DEFAULT_OVERSAMPLE,
};
use su2cs::geometry::{gauge_potential, geometric_phase, numeric_two_form, one_form, two_form, PathSample};
use su2cs::linalg::distance_from_identity;
use su2cs::propagator::GridSpec;
use su2cs::random::{random_euler, random_fiducial};
use su2cs::spin_core::{big_r, little_d, EulerAngles, Spin};
use su2cs_validation::Metric;

fn default_oversample() -> f64 {
    DEFAULT_OVERSAMPLE
}

fn twenty() -> usize {
    20
}

pub fn wigner(inv: &Invocation) -> Result<CommandResult, ConfigError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Params {
        two_s: u32,
        #[serde(default)]
        phi: f64,
        theta: f64,
        #[serde(default)]
        psi: f64,
    }
    let p: Params = inv.parse()?;
    let spin = Spin::new(p.two_s);
    let mut res = CommandResult::default();
    let tol = res.tolerance("unitarity", inv.tol_or(1e-12));

    let d = little_d(spin, p.theta);
    let r = big_r(spin, EulerAngles::new(p.phi, p.theta, p.psi)).entries;
    let defect = distance_from_identity(&(r.adjoint() * &r));
    let dim = spin.dim();
    let mut series = Series::new("wigner", &["m", "m_prime", "d", "r_re", "r_im"]);
    for i in 0..dim {
        for j in 0..dim {
            let mut row = vec![spin.m(i).to_string(), spin.m(j).to_string()];
            row.extend(cells(&[d[(i, j)], r[(i, j)].re, r[(i, j)].im]));
            series.push(row);
        }
    }
    res.outputs = json!({
        "two_s": p.two_s,
        "m_values": (0..dim).map(|i| spin.m(i)).collect::<Vec<_>>(),
        "d_matrix": (0..dim).map(|i| (0..dim).map(|j| d[(i, j)]).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "r_matrix": (0..dim)
            .map(|i| (0..dim).map(|j| [r[(i, j)].re, r[(i, j)].im]).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        "unitarity_defect": defect,
    });
    res.checks.push(Metric::at_most("unitarity defect", defect, tol));
    res.series.push(series);
    Ok(res)
}

pub fn verify_resolution(inv: &Invocation) -> Result<CommandResult, ConfigError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Params {
        two_s: OneOrMany<u32>,
        #[serde(default = "twenty")]
        n_random: usize,
        #[serde(default = "default_oversample")]
        grid_oversample: f64,
    }
    let p: Params = inv.parse()?;
    if !(p.grid_oversample >= 1.0) {
        return Err(ConfigError(format!("`grid_oversample` must be at least 1, got {}", p.grid_oversample)));
    }
    if p.n_random == 0 {
        return Err(ConfigError("`n_random` must be at least 1".into()));
    }
    let spins: Vec<Spin> = p.two_s.into_vec().into_iter().map(Spin::new).collect();
    let mut res = CommandResult::default();
    let tol = res.tolerance("residual", inv.tol_or(1e-10));
    let mut rng = inv.rng();
    let mut series = Series::new("verify_resolution", &["two_s", "fv_index", "residual"]);
    let mut per_spin = Vec::new();
    let mut overall: f64 = 0.0;
    let outcome = (|| -> su2cs::Result<()> {
        for &spin in &spins {
            let grid = build_grid(spin, p.grid_oversample);
            let mut worst: f64 = 0.0;
            for k in 0..p.n_random {
                let r = resolution_residual(&random_fiducial(&mut rng, spin), &grid)?;
                series.push(vec![spin.two_s.to_string(), k.to_string(), super::number(r)]);
                worst = worst.max(r);
            }
            let ortho = orthogonality_defect(spin, &grid);
            overall = overall.max(worst);
            per_spin.push(json!({
                "two_s": spin.two_s,
                "grid": GridSpec::from(&grid),
                "max_residual": worst,
                "orthogonality_defect": ortho,
            }));
            res.checks.push(Metric::at_most(format!("max residual 2s={}", spin.two_s), worst, tol));
            res.checks.push(Metric::at_most(format!("orthogonality defect 2s={}", spin.two_s), ortho, tol));
        }
        Ok(())
    })();
    res.outputs = json!({ "n_random": p.n_random, "spins": per_spin, "max_residual": overall });
    res.series.push(series);
    Ok(res.settle(outcome))
}

pub fn overlap(inv: &Invocation) -> Result<CommandResult, ConfigError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Params {
        two_s: u32,
        fv: Value,
        omega1: [f64; 3],
        omega2: [f64; 3],
    }
    let p: Params = inv.parse()?;
    let spin = Spin::new(p.two_s);
    let fv = fiducial(&p.fv, spin, inv, &mut inv.rng())?;
    let (o1, o2) = (angles(p.omega1), angles(p.omega2));
    let mut res = CommandResult::default();
    let tol = res.tolerance("composition", inv.tol_or(1e-12));
    let direct = su2cs::coherent::overlap(&fv, o2, o1);
    let composed = overlap_by_composition(&fv, o2, o1);
    let diff = (direct - composed).norm();
    res.outputs = json!({
        "fv": FiducialFile::from(fv.clone()),
        "overlap": direct,
        "abs_overlap": direct.norm(),
        "by_composition": composed,
        "matrix_elements": {
            "omega1": matrix_elements(&fv, o1),
            "omega2": matrix_elements(&fv, o2),
        },
    });
    res.checks.push(Metric::at_most("direct vs composition", diff, tol));
    Ok(res)
}

pub fn geometry(inv: &Invocation) -> Result<CommandResult, ConfigError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Loop {
        theta: f64,
        #[serde(default)]
        psi: f64,
        #[serde(default = "loop_samples")]
        samples: usize,
    }
    fn loop_samples() -> usize {
        256
    }
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Params {
        two_s: u32,
        fv: Value,
        #[serde(default)]
        points: Vec<[f64; 3]>,
        n_random: Option<usize>,
        #[serde(default)]
        loops: Vec<Loop>,
    }
    let p: Params = inv.parse()?;
    let spin = Spin::new(p.two_s);
    let mut rng = inv.rng();
    let fv = fiducial(&p.fv, spin, inv, &mut rng)?;
    if p.loops.iter().any(|l| l.samples < 2) {
        return Err(ConfigError("loop `samples` must be at least 2".into()));
    }
    let mut points: Vec<EulerAngles> = p.points.into_iter().map(angles).collect();
    let n_random = p.n_random.unwrap_or(if points.is_empty() { 10 } else { 0 });
    points.extend((0..n_random).map(|_| random_euler(&mut rng)));

    let mut res = CommandResult::default();
    let tol = res.tolerance("exterior_derivative", inv.tol_or(1e-6));
    let mut series = Series::new(
        "geometry",
        &[
            "phi", "theta", "psi", "k_phi", "k_theta", "k_psi", "w_theta_phi", "w_phi_psi", "w_psi_theta", "a_theta",
            "a_xi", "a_eta", "fd_deviation",
        ],
    );
    let (mut exterior, mut singular, mut single): (f64, usize, f64) = (0.0, 0, 0.0);
    let mut records = Vec::new();
    for o in &points {
        let (phi, theta, psi) = (o.phi(), o.theta(), o.psi());
        let k = one_form(&fv, *o);
        let w = two_form(&fv, *o);
        let g = gauge_potential(&fv, theta, phi + psi, phi - psi);
        let fd = w.distance(&numeric_two_form(&fv, *o, 1e-5));
        exterior = exterior.max(fd);
        for pole in [0.0, PI] {
            if !gauge_potential(&fv, pole, phi + psi, phi - psi).is_finite() {
                singular += 1;
            }
        }
        if fv.is_single_weight() {
            let m = fv.a0();
            single = single
                .max((k.k_phi - m * theta.cos()).abs())
                .max(k.k_theta.abs())
                .max((k.k_psi - m).abs());
        }
        series.push(cells(&[
            phi, theta, psi, k.k_phi, k.k_theta, k.k_psi, w.w_theta_phi, w.w_phi_psi, w.w_psi_theta, g.a_theta, g.a_xi,
            g.a_eta, fd,
        ]));
        records.push(json!({ "omega": o.as_array(), "one_form": k, "two_form": w, "gauge_potential": g }));
    }
    let mut phases = Vec::new();
    let outcome = (|| -> su2cs::Result<()> {
        for l in &p.loops {
            let path: Vec<PathSample> = (0..=l.samples)
                .map(|k| {
                    let t = k as f64 / l.samples as f64;
                    PathSample { t, phi: 2.0 * PI * t, theta: l.theta, psi: l.psi }
                })
                .collect();
            phases.push(json!({ "theta": l.theta, "psi": l.psi, "phase": geometric_phase(&fv, &path)? }));
        }
        Ok(())
    })();
    res.outputs = json!({
        "fv": FiducialFile::from(fv.clone()),
        "single_weight": fv.is_single_weight(),
        "points": records,
        "latitude_loops": phases,
    });
    res.checks.push(Metric::at_most("exterior derivative vs finite difference", exterior, tol));
    res.checks.push(Metric::none("non-finite gauge potentials at the poles", singular));
    if fv.is_single_weight() {
        res.checks.push(Metric::at_most("single-weight one-form deviation", single, 0.0));
    }
    res.series.push(series);
    Ok(res.settle(outcome))
}
