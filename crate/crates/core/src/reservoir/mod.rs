//! Echo state networks: construction, state collection, ridge readout and
//! autoregressive forecasting with phase-component renormalisation.

mod build;
mod config;
mod dump;
mod network;
mod ridge;
mod sparse;
mod spectral;

pub use build::{build_input_matrix, build_internal_matrix, MAX_RESAMPLE_ATTEMPTS};
pub use config::ReservoirConfig;
pub use dump::{read_dump, write_dump, ModelDump, DUMP_MAGIC, DUMP_VERSION};
pub use network::{
    collect_states, forecast, forecast_partial, nonlinear_transform, update_state, EchoStateNetwork,
    Expert, ForecastOutcome, ReservoirMatrices, ReservoirState, StateHistory,
};
pub use ridge::{regularized_loss, train_readout, Readout};
pub use sparse::{InputMatrix, SparseMatrix};
pub use spectral::{dense_spectral_radius, power_iteration, spectral_radius, DENSE_FALLBACK_LIMIT};
