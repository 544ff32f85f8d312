//! Kuramoto-family oscillator models.
//!
//! States are carried either as phases ([`PhaseVector`]) or as flattened
//! phase components ([`ComponentVector`], ordered `x_1, y_1, ..., x_N, y_N`).
//! The component form is what the reservoirs consume and what ground truth
//! is integrated in.

mod integrate;
mod model;
mod regime;
mod trajectory;
mod transform;

pub use integrate::{
    integrate_phase_step, integrate_step, rk4_step, ComponentField, IntegratorConfig, PhaseField,
    Rk4Scratch, VectorField,
};
pub use model::{
    biharmonic_rhs, component_rhs, kuramoto_rhs, perturb_params, BiHarmonicParams,
    KuramotoParams, Model,
};
pub use regime::{sample_frequencies, FrequencyLaw, ModelFamily, RegimeName, RegimeSpec, Task};
pub use trajectory::{generate_trajectory, write_trajectory_csv, Trajectory};
pub use transform::{
    components_to_phases, normalize_components, normalize_pairs_in_place, phases_to_components,
    wrap_angle, ComponentVector, PhaseVector, ZERO_PAIR_TOLERANCE,
};
