//! Shared test procedure, parameter sweeps, grid search and aggregation.
//!
//! Every random draw comes from a ChaCha20 stream keyed by its position in the
//! experiment tree, so results do not depend on scheduling or thread count.

mod params;
mod procedure;
mod report;
mod seeds;
mod sweep;

pub use params::{ExperimentParams, GridPoint, SweepParameter, SweepSpec};
pub use procedure::{
    generate_ground_truth, generate_ground_truths, run_arm, run_shared_procedure, sample_expert,
    ArmOutput, GroundTruth, PointLabel, RunManifest, TrainedModel,
};
pub use report::{
    aggregate_instantiations, aggregate_report, summarize_instantiations, write_instantiations_csv,
    write_summary_csv, GroupKey, InstantiationSummary, SummaryRow, INSTANTIATION_HEADER, SUMMARY_HEADER,
};
pub use seeds::{StreamKey, StreamRole};
pub use sweep::{run_grid_search, run_sweep, PointFailure, SweepOutcome, GRID_REGIMES};
