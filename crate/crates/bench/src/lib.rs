//! Shared fixtures for the criterion benchmarks.

use wunt_core::sim::{generate, ModelId, SimModel};
use wunt_core::{Dataset, EstimatorConfig};

/// A labeled Y3 draw of size `n` with a fixed seed.
pub fn y3_draw(n: usize) -> Dataset {
    let model = SimModel::y3_y4(ModelId::Y3, n).expect("valid Y3 size");
    generate(&model, 2024).expect("Y3 draw").labeled
}

/// Default configuration with `h` and `L` pinned at their rule values for `n`,
/// so sizes are compared at equal tuning.
pub fn frozen_config(n: usize) -> EstimatorConfig {
    wunt_core::sim::timing::freeze_tuning(&EstimatorConfig::default(), n, ModelId::Y3.dim()).expect("tuning")
}
