//! Workloads shared by the benchmarks.

use anw_core::{generate, Dataset, Scenario, SimConfig};

/// Sharpening dataset with `n` observations and two waypoints.
pub fn sharpen_data(n: usize, seed: u64) -> Dataset {
    let sim = SimConfig {
        n,
        ..SimConfig::preset(Scenario::Sharpen1D, seed)
    };
    generate(&sim).expect("preset generates").data
}
