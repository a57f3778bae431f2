use super::{cells, number, CommandResult, Series};
use crate::config::{angles, fiducial, hamiltonian, ConfigError, Invocation, OneOrMany};
use serde::Deserialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use su2cs::coherent::{build_path_grid, FiducialFile, DEFAULT_OVERSAMPLE};
use su2cs::geometry::{geometric_phase, kinetic_term, path_rates, PathSample};
use su2cs::propagator::{
    action_along_path, discrete_action, discrete_cspi, h_expectation, oracle_amplitude, GridSpec, KernelMode,
    Schedule, Term,
};
use su2cs::semiclassical::{integrate_trajectory, SemiclassicalOptions};
use su2cs::spin_core::Spin;
use su2cs_validation::Metric;

fn default_oversample() -> f64 {
    DEFAULT_OVERSAMPLE
}

fn all_modes() -> OneOrMany<KernelMode> {
    OneOrMany::Many(KernelMode::ALL.to_vec())
}

pub fn propagate(inv: &Invocation) -> Result<CommandResult, ConfigError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Params {
        two_s: u32,
        fv: Value,
        #[serde(default)]
        hamiltonian: Vec<Term>,
        omega_i: [f64; 3],
        omega_f: [f64; 3],
        #[serde(default)]
        t_i: f64,
        t_f: f64,
        n_slices: OneOrMany<usize>,
        #[serde(default = "all_modes")]
        mode: OneOrMany<KernelMode>,
        #[serde(default = "default_oversample")]
        grid_oversample: f64,
    }
    let p: Params = inv.parse()?;
    let spin = Spin::new(p.two_s);
    let fv = fiducial(&p.fv, spin, inv, &mut inv.rng())?;
    let spec = hamiltonian(spin, p.hamiltonian)?;
    let slices = p.n_slices.into_vec();
    let modes = p.mode.into_vec();
    if slices.is_empty() || slices.contains(&0) {
        return Err(ConfigError("`n_slices` must be a non-empty list of positive integers".into()));
    }
    if modes.is_empty() {
        return Err(ConfigError("`mode` must not be empty".into()));
    }
    if !(p.t_f >= p.t_i) {
        return Err(ConfigError(format!("`t_f` = {} precedes `t_i` = {}", p.t_f, p.t_i)));
    }
    if !(p.grid_oversample >= 1.0) {
        return Err(ConfigError(format!("`grid_oversample` must be at least 1, got {}", p.grid_oversample)));
    }
    let (om_i, om_f) = (angles(p.omega_i), angles(p.omega_f));
    let grid = build_path_grid(spin, p.grid_oversample);

    let mut res = CommandResult::default();
    let tol = res.tolerance("error_at_largest_n", inv.tol_or(0.02));
    res.tolerances.insert("ratio_lo".into(), 1.7);
    res.tolerances.insert("ratio_hi".into(), 2.3);
    res.tolerances.insert("oracle".into(), 1e-12);

    let mut per_mode = Vec::new();
    let mut oracle = None;
    let outcome = (|| -> su2cs::Result<()> {
        let exact = oracle_amplitude(&fv, &spec, om_i, om_f, &Schedule::new(p.t_i, p.t_f, 1).with_hbar(inv.hbar), 1e-12)?;
        oracle = Some(exact);
        for &mode in &modes {
            let mut series = Series::new(format!("propagate_{mode}"), &["n_slices", "re", "im", "abs_err_vs_oracle"]);
            let mut rows = Vec::new();
            let mut errs = BTreeMap::new();
            for &n in &slices {
                let schedule = Schedule::new(p.t_i, p.t_f, n).with_hbar(inv.hbar);
                let r = discrete_cspi(&fv, &spec, om_i, om_f, &schedule, &grid, mode)?.with_oracle(exact);
                let err = r.error_estimate.unwrap_or(f64::NAN);
                errs.insert(n, err);
                let mut row = vec![n.to_string()];
                row.extend(cells(&[r.amplitude.re, r.amplitude.im, err]));
                series.push(row);
                rows.push(json!({
                    "n_slices": n,
                    "amplitude": r.amplitude,
                    "abs_err": err,
                    "zeroed_pairs": r.zeroed_pairs,
                }));
            }
            let (&n_last, &e_last) = errs.iter().next_back().expect("non-empty");
            res.checks.push(Metric::at_most(format!("{mode} error at n={n_last}"), e_last, tol));
            let sorted: Vec<(usize, f64)> = errs.into_iter().collect();
            for w in sorted.windows(2) {
                let ((n1, e1), (n2, e2)) = (w[0], w[1]);
                if n2 == 2 * n1 && e1 > 1e-10 {
                    res.checks.push(Metric::between(format!("{mode} error ratio {n1}/{n2}"), e1 / e2, 1.7, 2.3));
                }
            }
            per_mode.push(json!({ "mode": mode, "rows": rows }));
            res.series.push(series);
        }
        Ok(())
    })();
    res.outputs = json!({
        "fv": FiducialFile::from(fv.clone()),
        "grid": GridSpec::from(&grid),
        "oracle": oracle,
        "modes": per_mode,
    });
    Ok(res.settle(outcome))
}

pub fn action(inv: &Invocation) -> Result<CommandResult, ConfigError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Params {
        two_s: u32,
        fv: Value,
        #[serde(default)]
        hamiltonian: Vec<Term>,
        path: Vec<PathSample>,
    }
    let p: Params = inv.parse()?;
    let spin = Spin::new(p.two_s);
    let fv = fiducial(&p.fv, spin, inv, &mut inv.rng())?;
    let spec = hamiltonian(spin, p.hamiltonian)?;
    if p.path.len() < 2 {
        return Err(ConfigError(format!("`path` needs at least 2 samples, got {}", p.path.len())));
    }
    let mut res = CommandResult::default();
    let mut series = Series::new("action", &["t", "phi", "theta", "psi", "kinetic", "energy"]);
    let mut summary = Value::Null;
    let outcome = (|| -> su2cs::Result<()> {
        let rates = path_rates(&p.path)?;
        for (s, r) in p.path.iter().zip(&rates) {
            let kin = kinetic_term(&fv, s.omega(), *r);
            let energy = h_expectation(&fv, &spec, s.omega(), s.t)?;
            series.push(cells(&[s.t, s.phi, s.theta, s.psi, kin, energy]));
        }
        summary = json!({
            "action_along_path": action_along_path(&fv, &spec, &p.path, inv.hbar)?,
            "discrete_action": discrete_action(&fv, &spec, &p.path, inv.hbar)?,
            "geometric_phase": geometric_phase(&fv, &p.path)?,
        });
        Ok(())
    })();
    res.outputs = json!({
        "fv": FiducialFile::from(fv.clone()),
        "samples": p.path.len(),
        "result": summary,
    });
    res.series.push(series);
    Ok(res.settle(outcome))
}

pub fn semiclassical(inv: &Invocation) -> Result<CommandResult, ConfigError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Params {
        two_s: u32,
        fv: Value,
        #[serde(default)]
        hamiltonian: Vec<Term>,
        omega0: [f64; 3],
        #[serde(default)]
        t0: f64,
        t1: f64,
        dt: f64,
        #[serde(default)]
        drop_interference: bool,
    }
    let p: Params = inv.parse()?;
    let spin = Spin::new(p.two_s);
    let fv = fiducial(&p.fv, spin, inv, &mut inv.rng())?;
    let spec = hamiltonian(spin, p.hamiltonian)?;
    if !(p.dt > 0.0 && p.dt.is_finite()) {
        return Err(ConfigError(format!("`dt` must be positive, got {}", p.dt)));
    }
    if !(p.t1 >= p.t0) {
        return Err(ConfigError(format!("`t1` = {} precedes `t0` = {}", p.t1, p.t0)));
    }
    let options = SemiclassicalOptions {
        hbar: inv.hbar,
        drop_interference: p.drop_interference,
    };
    let mut res = CommandResult::default();
    let tol = res.tolerance("energy_drift", inv.tol_or(1e-8));
    let mut series = Series::new("semiclassical", &["t", "phi", "theta", "psi", "H", "rank", "residual"]);
    let mut summary = Value::Null;
    let outcome = (|| -> su2cs::Result<()> {
        let traj = integrate_trajectory(&fv, &spec, angles(p.omega0), (p.t0, p.t1), p.dt, &options)?;
        let e0 = traj.samples[0].energy;
        let mut drift: f64 = 0.0;
        let mut ranks = BTreeMap::new();
        for s in &traj.samples {
            drift = drift.max((s.energy - e0).abs());
            *ranks.entry(s.rank.to_string()).or_insert(0usize) += 1;
            let mut row = cells(&[s.t, s.phi, s.theta, s.psi, s.energy]);
            row.push(s.rank.to_string());
            row.push(number(s.residual));
            series.push(row);
        }
        let last = traj.samples.last().expect("non-empty");
        summary = json!({
            "final": [last.phi, last.theta, last.psi],
            "final_time": last.t,
            "steps": traj.samples.len() - 1,
            "energy_drift": drift,
            "error_estimate": traj.error_estimate,
            "rank_counts": ranks,
        });
        if spec.is_time_independent() {
            res.checks.push(Metric::at_most("energy drift", drift, tol));
        }
        Ok(())
    })();
    res.outputs = json!({
        "fv": FiducialFile::from(fv.clone()),
        "drop_interference": p.drop_interference,
        "trajectory": summary,
    });
    res.series.push(series);
    Ok(res.settle(outcome))
}
