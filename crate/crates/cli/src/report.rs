//! Report records (JSON) and series (CSV).

use crate::commands::{CommandResult, Series};
use crate::config::Invocation;
use crate::Command;
use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use su2cs_validation::Metric;

#[derive(Debug, Clone, Serialize)]
pub struct ReportRecord {
    pub experiment_id: String,
    pub command: &'static str,
    pub version: &'static str,
    /// `SOURCE_DATE_EPOCH` when set; otherwise null so reports stay byte-identical.
    pub timestamp: Option<u64>,
    pub inputs_hash: String,
    pub seed: u64,
    pub hbar: f64,
    pub tolerances: BTreeMap<String, f64>,
    pub outputs: Value,
    pub checks: Vec<Metric>,
    pub passed: bool,
    pub error: Option<String>,
    #[serde(skip)]
    pub series: Vec<Series>,
}

impl ReportRecord {
    pub fn new(command: &Command, inv: &Invocation, result: CommandResult) -> Self {
        let hash = inputs_hash(command.name(), inv);
        let passed = result.error.is_none() && result.checks.iter().all(|c| c.passed);
        ReportRecord {
            experiment_id: format!("{}-{}", command.name(), &hash[..12]),
            command: command.name(),
            version: env!("CARGO_PKG_VERSION"),
            timestamp: std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.trim().parse().ok()),
            inputs_hash: hash,
            seed: inv.seed,
            hbar: inv.hbar,
            tolerances: result.tolerances,
            outputs: result.outputs,
            checks: result.checks,
            passed,
            error: result.error,
            series: result.series,
        }
    }
}

/// SHA-256 of the canonical (key-sorted) JSON of everything that determines
/// the outputs. Thread count and output directory are left out.
pub fn inputs_hash(command: &str, inv: &Invocation) -> String {
    let canonical = json!({
        "command": command,
        "params": inv.params,
        "seed": inv.seed,
        "hbar": inv.hbar,
        "tol": inv.tol,
    });
    let digest = Sha256::digest(canonical.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `<command>.json` and one CSV per series; returns the paths.
pub fn write(record: &ReportRecord, out: &Path) -> anyhow::Result<Vec<PathBuf>> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut written = Vec::new();
    let path = out.join(format!("{}.json", record.command));
    let mut text = serde_json::to_string_pretty(record)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    written.push(path);
    for s in &record.series {
        let path = out.join(format!("{}.csv", s.name));
        fs::write(&path, s.to_csv()).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    Ok(written)
}
