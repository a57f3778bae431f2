//! One function per subcommand. Each parses its parameters (config errors
//! surface as [`ConfigError`]) and then computes; numerical errors end up in
//! the report instead.

mod dynamics;
mod limits;
mod states;

use crate::config::{ConfigError, Invocation};
use crate::Command;
use serde_json::Value;
use std::collections::BTreeMap;
use su2cs_validation::Metric;

#[derive(Debug, Clone, Default)]
pub struct CommandResult {
    pub outputs: Value,
    pub checks: Vec<Metric>,
    pub tolerances: BTreeMap<String, f64>,
    pub series: Vec<Series>,
    pub error: Option<String>,
}

impl CommandResult {
    pub fn tolerance(&mut self, name: &str, value: f64) -> f64 {
        self.tolerances.insert(name.to_string(), value);
        value
    }

    /// Folds a numerical error into the result.
    pub fn settle(mut self, outcome: su2cs::Result<()>) -> Self {
        if let Err(e) = outcome {
            self.error = Some(e.to_string());
        }
        self
    }
}

/// A table written as `<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Series {
    pub fn new(name: impl Into<String>, header: &[&'static str]) -> Self {
        Series {
            name: name.into(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// Shortest round-trip text of a number, in exponent form when very small or large.
pub fn number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 {
        "0".to_string()
    } else if (1e-4..1e15).contains(&a) || !a.is_finite() {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

pub fn cells(values: &[f64]) -> Vec<String> {
    values.iter().map(|&v| number(v)).collect()
}

pub fn run(command: &Command, inv: &Invocation) -> Result<CommandResult, ConfigError> {
    match command {
        Command::Wigner(_) => states::wigner(inv),
        Command::VerifyResolution => states::verify_resolution(inv),
        Command::Overlap => states::overlap(inv),
        Command::Geometry => states::geometry(inv),
        Command::Propagate => dynamics::propagate(inv),
        Command::Action => dynamics::action(inv),
        Command::Semiclassical => dynamics::semiclassical(inv),
        Command::Contract => limits::contract(inv),
        Command::Acceptance(flags) => limits::acceptance(inv, flags.criterion),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut s = Series::new("x", &["a", "b"]);
        s.push(cells(&[1.0, 0.1]));
        s.push(vec!["2".into(), number(-3e-20)]);
        assert_eq!(s.to_csv(), "a,b\n1,0.1\n2,-3e-20\n");
        assert_eq!(number(2.5e17), "2.5e17");
        assert_eq!(number(0.0), "0");
    }

    #[test]
    fn settle_records_errors() {
        let r = CommandResult::default().settle(Err(su2cs::Error::ZeroVector));
        assert_eq!(r.error.as_deref(), Some("fiducial vector has zero norm"));
        assert!(CommandResult::default().settle(Ok(())).error.is_none());
    }
}
