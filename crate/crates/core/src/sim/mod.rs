//! Simulation harness: outcome models Y1–Y4, the replication engine, timing
//! and the one-dimensional warm-up experiment.

pub mod models;
pub mod replicate;
pub mod rng;
pub mod timing;
pub mod warmup;

pub use models::{generate, generate_y1_y2, generate_y3_y4, true_att, true_att_check, ModelId, SimDraw, SimModel};
pub use replicate::{run_replications, CellSummary, EstimatorSpec, ReplicationResult, TransformerChoice};
pub use timing::{adaptive_build_seconds, timing_bench, TimingTable};
pub use warmup::{run_warmup, WarmupConfig, WarmupReport, WarmupResponse};
