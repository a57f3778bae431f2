//! Runs every acceptance criterion and prints one PASS/FAIL line for each.
//! Exits nonzero when any criterion fails.

use std::process::ExitCode;

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for c in su2cs_validation::CRITERIA.iter() {
        let outcome = su2cs_validation::run(c);
        println!("{}", outcome.line());
        if !outcome.passed {
            failed.push(outcome.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", su2cs_validation::CRITERIA.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
