use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;

use super::integrate::{rk4_step, ComponentField, IntegratorConfig, Rk4Scratch};
use super::model::Model;
use super::regime::RegimeSpec;
use super::transform::{normalize_pairs_in_place, phases_to_components, PhaseVector};
use crate::error::{Error, Result};
use crate::Matrix;

/// A ground-truth record together with the parameters that produced it.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub model: Model,
    pub initial_phases: PhaseVector,
    /// `2N x (n_steps + 1)`, one column per sample.
    pub samples: Matrix,
    pub dt: f64,
}

impl Trajectory {
    /// Integrates `model` from `initial_phases`, renormalising each sample
    /// back onto the unit circles.
    pub fn evolve(
        model: Model,
        initial_phases: PhaseVector,
        cfg: &IntegratorConfig,
        n_steps: usize,
    ) -> Result<Self> {
        cfg.validate()?;
        if n_steps == 0 {
            return Err(Error::InvalidParameter("n_steps must be >= 1".into()));
        }
        if initial_phases.len() != model.n_oscillators() {
            return Err(Error::DimensionMismatch {
                what: "initial phases",
                expected: model.n_oscillators(),
                found: initial_phases.len(),
            });
        }
        let dim = 2 * model.n_oscillators();
        let mut samples = Matrix::zeros(dim, n_steps + 1);
        let mut state = phases_to_components(&initial_phases).into_inner();
        samples.column_mut(0).copy_from_slice(&state);

        let field = ComponentField(&model);
        let mut scratch = Rk4Scratch::new(dim);
        let h = cfg.substep();
        for step in 1..=n_steps {
            for _ in 0..cfg.substeps_per_sample {
                rk4_step(&field, &mut state, h, &mut scratch);
            }
            if state.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericalBlowUp { step });
            }
            normalize_pairs_in_place(&mut state).map_err(|_| Error::NumericalBlowUp { step })?;
            samples.column_mut(step).copy_from_slice(&state);
        }
        Ok(Self {
            model,
            initial_phases,
            samples,
            dt: cfg.dt,
        })
    }
}

/// Samples the regime's natural frequencies, then `theta_i(0) ~ U(-pi, pi)`,
/// and integrates `n_steps` samples of size `cfg.dt`.
pub fn generate_trajectory<R: Rng + ?Sized>(
    regime: &RegimeSpec,
    cfg: &IntegratorConfig,
    n_steps: usize,
    rng: &mut R,
) -> Result<Trajectory> {
    let model = regime.sample_model(rng)?;
    let theta = (0..regime.n_oscillators)
        .map(|_| rng.random_range(-PI..PI))
        .collect();
    Trajectory::evolve(model, PhaseVector::new(theta)?, cfg, n_steps)
}

/// Writes `t, x_1, y_1, ..., x_N, y_N` rows with 17 significant digits.
pub fn write_trajectory_csv<W: Write>(out: &mut W, samples: &Matrix, dt: f64) -> Result<()> {
    let n = samples.nrows() / 2;
    let mut header = String::from("t");
    for i in 1..=n {
        header.push_str(&format!(",x_{i},y_{i}"));
    }
    writeln!(out, "{header}")?;
    let mut line = String::new();
    for (k, col) in samples.column_iter().enumerate() {
        line.clear();
        line.push_str(&format!("{:.16e}", k as f64 * dt));
        for v in col.iter() {
            line.push_str(&format!(",{v:.16e}"));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}
