//! Fixtures shared by the benchmarks.

use std::path::PathBuf;

use coverage_core::Scenario;

/// Loads a scenario from the workspace `scenarios/` directory.
pub fn fixture(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    Scenario::load(&path).unwrap_or_else(|e| panic!("{e}"))
}
