use serde::{Deserialize, Serialize};

use super::model::Model;
use super::transform::{ComponentVector, PhaseVector};
use crate::error::{ensure_finite, Error, Result};

/// Autonomous vector field `dx/dt = f(x)`.
pub trait VectorField {
    fn dim(&self) -> usize;
    fn eval(&self, state: &[f64], out: &mut [f64]);
}

/// Component-form vector field of a model.
pub struct ComponentField<'a>(pub &'a Model);

impl VectorField for ComponentField<'_> {
    fn dim(&self) -> usize {
        2 * self.0.n_oscillators()
    }

    fn eval(&self, state: &[f64], out: &mut [f64]) {
        self.0.component_derivative(state, out);
    }
}

/// Phase-form vector field of a model.
pub struct PhaseField<'a>(pub &'a Model);

impl VectorField for PhaseField<'_> {
    fn dim(&self) -> usize {
        self.0.n_oscillators()
    }

    fn eval(&self, state: &[f64], out: &mut [f64]) {
        self.0.phase_derivative(state, out);
    }
}

/// Stage buffers for [`rk4_step`], reused across steps.
#[derive(Debug, Clone)]
pub struct Rk4Scratch {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Scratch {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }
}

/// One classical fourth-order Runge-Kutta step of size `h`, in place.
pub fn rk4_step<F: VectorField + ?Sized>(field: &F, state: &mut [f64], h: f64, s: &mut Rk4Scratch) {
    let half = 0.5 * h;
    field.eval(state, &mut s.k1);
    for ((t, x), k) in s.tmp.iter_mut().zip(state.iter()).zip(&s.k1) {
        *t = x + half * k;
    }
    field.eval(&s.tmp, &mut s.k2);
    for ((t, x), k) in s.tmp.iter_mut().zip(state.iter()).zip(&s.k2) {
        *t = x + half * k;
    }
    field.eval(&s.tmp, &mut s.k3);
    for ((t, x), k) in s.tmp.iter_mut().zip(state.iter()).zip(&s.k3) {
        *t = x + h * k;
    }
    field.eval(&s.tmp, &mut s.k4);
    let sixth = h / 6.0;
    for (i, x) in state.iter_mut().enumerate() {
        *x += sixth * (s.k1[i] + 2.0 * s.k2[i] + 2.0 * s.k3[i] + s.k4[i]);
    }
}

/// Fixed-step RK4 settings. `dt` is the sampling interval, each sample is
/// reached through `substeps_per_sample` RK4 steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub substeps_per_sample: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            substeps_per_sample: 10,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.substeps_per_sample == 0 {
            return Err(Error::InvalidParameter("substeps_per_sample must be >= 1".into()));
        }
        Ok(())
    }

    pub fn substep(&self) -> f64 {
        self.dt / self.substeps_per_sample as f64
    }

    /// Number of substeps covering `duration`, which must be a positive
    /// integer multiple of the substep.
    fn substep_count(&self, duration: f64) -> Result<usize> {
        self.validate()?;
        let h = self.substep();
        let n = duration / h;
        let rounded = n.round();
        if !(duration > 0.0) || rounded < 1.0 || (n - rounded).abs() > 1e-9 * rounded.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "duration {duration} is not a positive multiple of the substep {h}"
            )));
        }
        Ok(rounded as usize)
    }
}

fn integrate_raw<F: VectorField>(field: &F, state: &mut [f64], h: f64, n: usize) -> Result<()> {
    let mut scratch = Rk4Scratch::new(state.len());
    for step in 0..n {
        rk4_step(field, state, h, &mut scratch);
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalBlowUp { step });
        }
    }
    Ok(())
}

/// Integrates the component form over `duration` with RK4 substeps of
/// `cfg.dt / cfg.substeps_per_sample`. No renormalisation is applied.
pub fn integrate_step(
    state: &ComponentVector,
    model: &Model,
    cfg: &IntegratorConfig,
    duration: f64,
) -> Result<ComponentVector> {
    if state.len() != 2 * model.n_oscillators() {
        return Err(Error::DimensionMismatch {
            what: "component state",
            expected: 2 * model.n_oscillators(),
            found: state.len(),
        });
    }
    let n = cfg.substep_count(duration)?;
    let mut x = state.as_slice().to_vec();
    integrate_raw(&ComponentField(model), &mut x, cfg.substep(), n)?;
    ComponentVector::new(x)
}

/// Phase-form counterpart of [`integrate_step`]; the result is wrapped to `[-pi, pi)`.
pub fn integrate_phase_step(
    state: &PhaseVector,
    model: &Model,
    cfg: &IntegratorConfig,
    duration: f64,
) -> Result<PhaseVector> {
    if state.len() != model.n_oscillators() {
        return Err(Error::DimensionMismatch {
            what: "phase state",
            expected: model.n_oscillators(),
            found: state.len(),
        });
    }
    let n = cfg.substep_count(duration)?;
    let mut x = state.as_slice().to_vec();
    integrate_raw(&PhaseField(model), &mut x, cfg.substep(), n)?;
    ensure_finite(&x, "phase state")?;
    PhaseVector::new(x)
}
