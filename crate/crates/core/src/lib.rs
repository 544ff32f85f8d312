//! Hybrid reservoir computing for networks of coupled phase oscillators.
//!
//! The crate is organised bottom-up:
//!
//! * [`dynamics`] holds the Kuramoto and bi-harmonic Kuramoto models, their
//!   phase-component form, regime sampling, parameter perturbation and a
//!   fixed-step RK4 integrator.
//! * [`reservoir`] builds echo state networks, collects training states,
//!   fits the ridge readout and runs autoregressive forecasts.
//! * [`hybrid`] wires a (perturbed) Kuramoto expert into the reservoir.
//! * [`evaluation`] segments ground-truth records and scores forecasts.
//! * [`experiments`] runs the shared test procedure, sweeps and grid search.

pub mod dynamics;
pub mod error;
pub mod evaluation;
pub mod experiments;
pub mod hybrid;
pub mod reservoir;

pub use error::{Error, Result};

/// Column-major dense matrix used for trajectories and feature histories.
/// Rows index state dimensions, columns index time samples.
pub type Matrix = nalgebra::DMatrix<f64>;
