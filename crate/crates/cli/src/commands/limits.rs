use super::{cells, number, CommandResult, Series};
use crate::config::{complex, ConfigError, Invocation, OneOrMany};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::json;
use su2cs::contraction::{contraction_row, ContractionRow, FockVector};
use su2cs::spin_core::Spin;
use su2cs_validation::{criterion, run, Metric, CRITERIA};

fn unit_alpha() -> [f64; 2] {
    [1.0, 0.0]
}

fn forty() -> usize {
    40
}

pub fn contract(inv: &Invocation) -> Result<CommandResult, ConfigError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Params {
        two_s: OneOrMany<u32>,
        #[serde(default = "unit_alpha")]
        alpha: [f64; 2],
        fock_fv: Option<Vec<[f64; 2]>>,
        #[serde(default = "forty")]
        n_max: usize,
    }
    let p: Params = inv.parse()?;
    let mut spins = p.two_s.into_vec();
    spins.sort_unstable();
    spins.dedup();
    if spins.is_empty() || spins.contains(&0) {
        return Err(ConfigError("`two_s` must list positive integers".into()));
    }
    if p.n_max == 0 {
        return Err(ConfigError("`n_max` must be at least 1".into()));
    }
    let fock = match p.fock_fv {
        Some(c) => FockVector::new(c.into_iter().map(complex).collect())?,
        None => FockVector::vacuum(),
    };
    let alpha = complex(p.alpha);

    let mut res = CommandResult::default();
    let tol = res.tolerance("final_deviation", inv.tol_or(0.01));
    let mut series = Series::new("contract", &["s", "max_abs_dev", "measure_dev", "kinetic_dev"]);
    let computed: su2cs::Result<Vec<ContractionRow>> = spins
        .par_iter()
        .map(|&two_s| contraction_row(&fock, alpha, Spin::new(two_s), p.n_max))
        .collect();
    let outcome = computed.map(|rows| {
        for r in &rows {
            let mut row = vec![number(f64::from(r.two_s) / 2.0)];
            row.extend(cells(&[r.max_abs_dev, r.measure_dev, r.kinetic_dev]));
            series.push(row);
        }
        let increases = rows.windows(2).filter(|w| w[1].max_abs_dev >= w[0].max_abs_dev).count();
        let last = rows.last().expect("non-empty");
        res.checks.push(Metric::none("non-decreasing steps in the amplitude deviation", increases));
        res.checks.push(Metric::at_most(format!("amplitude deviation at 2s={}", last.two_s), last.max_abs_dev, tol));
        res.outputs = json!({ "alpha": alpha, "fock_fv": fock, "n_max": p.n_max, "rows": rows });
    });
    res.series.push(series);
    Ok(res.settle(outcome))
}

/// Runs the built-in criteria. Timings are left out of the report so that
/// repeated runs produce identical files.
pub fn acceptance(inv: &Invocation, only: Option<u8>) -> Result<CommandResult, ConfigError> {
    if !inv.params.is_empty() {
        let keys: Vec<&String> = inv.params.keys().collect();
        return Err(ConfigError(format!("`acceptance` takes no parameters, got {keys:?}")));
    }
    let selected: Vec<_> = match only {
        Some(id) => vec![criterion(id).ok_or_else(|| ConfigError(format!("no criterion {id}; expected 1 to 12")))?],
        None => CRITERIA.iter().collect(),
    };
    let mut res = CommandResult::default();
    let mut series = Series::new("acceptance", &["criterion", "passed", "failing_metrics"]);
    let mut records = Vec::new();
    for c in selected {
        let mut outcome = run(c);
        eprintln!("{}", outcome.line());
        outcome.metrics.retain(|m| m.name != "runtime seconds");
        let failing = outcome.metrics.iter().filter(|m| !m.passed).count() + usize::from(outcome.error.is_some());
        series.push(vec![c.id.to_string(), (failing == 0).to_string(), failing.to_string()]);
        res.checks.push(Metric::none(format!("criterion {} failing metrics", c.id), failing));
        records.push(json!({
            "id": outcome.id,
            "title": outcome.title,
            "metrics": outcome.metrics,
            "error": outcome.error,
        }));
    }
    res.outputs = json!({ "criteria": records });
    res.series.push(series);
    Ok(res)
}
