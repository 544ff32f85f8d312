use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::params::ExperimentParams;
use super::seeds::{StreamKey, StreamRole};
use crate::dynamics::{
    generate_trajectory, perturb_params, IntegratorConfig, Model, RegimeName, RegimeSpec, Task,
};
use crate::error::{Error, Result};
use crate::evaluation::{score_forecast, segment, MetricRecord, ModelKind, Segments, SpanLayout, FAILED_NMSE};
use crate::hybrid::{ExpertModel, HybridReservoir};
use crate::reservoir::{EchoStateNetwork, Expert, ReservoirMatrices};
use crate::Matrix;

/// What to run: task, regimes, counts, layout and seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub task: Task,
    pub regimes: Vec<RegimeName>,
    pub n_instantiations: usize,
    pub n_realizations: usize,
    pub layout: SpanLayout,
    pub integrator: IntegratorConfig,
    pub master_seed: u64,
    /// Valid-time threshold.
    pub epsilon: f64,
}

impl RunManifest {
    /// Full-scale defaults for `task`: every regime, 40 instantiations.
    pub fn new(task: Task, master_seed: u64) -> Self {
        Self {
            task,
            regimes: task.regimes().to_vec(),
            n_instantiations: 40,
            n_realizations: task.default_realizations(),
            layout: SpanLayout::default(),
            integrator: IntegratorConfig::default(),
            master_seed,
            epsilon: 0.4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.regimes.is_empty() {
            return Err(Error::InvalidParameter("at least one regime is required".into()));
        }
        for r in &self.regimes {
            if !self.task.regimes().contains(r) {
                return Err(Error::InvalidParameter(format!(
                    "regime {r} does not belong to task {}",
                    self.task
                )));
            }
        }
        if self.n_instantiations == 0 || self.n_realizations == 0 {
            return Err(Error::InvalidParameter(
                "n_instantiations and n_realizations must be >= 1".into(),
            ));
        }
        self.layout.validate()?;
        self.integrator.validate()?;
        if (self.layout.dt - self.integrator.dt).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "layout.dt ({}) must equal integrator.dt ({})",
                self.layout.dt, self.integrator.dt
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        Ok(())
    }

    pub fn key(
        &self,
        regime: RegimeName,
        realization: usize,
        sweep_index: usize,
        instantiation: usize,
        role: StreamRole,
    ) -> StreamKey {
        StreamKey {
            master: self.master_seed,
            task: self.task,
            regime,
            realization: realization as u32,
            sweep_index: sweep_index as u32,
            instantiation: instantiation as u32,
            role,
        }
    }
}

/// One ground-truth realization, shared read-only by every arm.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub regime: RegimeName,
    pub realization: usize,
    pub model: Model,
    pub record: Matrix,
    pub segments: Segments,
}

impl GroundTruth {
    /// Hash of the sampled record's bit pattern.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for v in self.record.iter() {
            v.to_bits().hash(&mut h);
        }
        h.finish()
    }
}

/// Depends only on `(master seed, task, regime, realization)`.
pub fn generate_ground_truth(
    manifest: &RunManifest,
    regime: RegimeName,
    realization: usize,
) -> Result<GroundTruth> {
    let spec = RegimeSpec::new(manifest.task, regime)?;
    let mut rng = manifest.key(regime, realization, 0, 0, StreamRole::GroundTruth).rng();
    let traj = generate_trajectory(&spec, &manifest.integrator, manifest.layout.total_steps(), &mut rng)?;
    let segments = segment(&traj.samples, &manifest.layout)?;
    Ok(GroundTruth {
        regime,
        realization,
        model: traj.model,
        record: traj.samples,
        segments,
    })
}

pub fn generate_ground_truths(manifest: &RunManifest, regime: RegimeName) -> Result<Vec<GroundTruth>> {
    (0..manifest.n_realizations)
        .into_par_iter()
        .map(|r| generate_ground_truth(manifest, regime, r))
        .collect()
}

/// Perturbed standard-Kuramoto expert for one `(realization, instantiation)`.
pub fn sample_expert(
    manifest: &RunManifest,
    truth: &GroundTruth,
    params: &ExperimentParams,
    sweep_index: usize,
    instantiation: usize,
    role: StreamRole,
) -> Result<ExpertModel> {
    let mut rng = manifest
        .key(truth.regime, truth.realization, sweep_index, instantiation, role)
        .rng();
    let standard = Model::Standard(truth.model.standard_part());
    let perturbed = perturb_params(&standard, params.sigma_k, params.sigma_omega, &mut rng)?;
    ExpertModel::new(perturbed.base().clone(), manifest.layout.dt)
}

/// Records of one arm at one sweep point plus descriptions of failed forecasts.
#[derive(Debug, Clone, Default)]
pub struct ArmOutput {
    pub records: Vec<MetricRecord>,
    pub failures: Vec<String>,
}

/// Labels attached to every record of an arm run.
#[derive(Debug, Clone)]
pub struct PointLabel {
    pub sweep_index: usize,
    pub param_name: String,
    pub param_value: f64,
}

impl PointLabel {
    pub fn baseline() -> Self {
        Self {
            sweep_index: 0,
            param_name: "baseline".into(),
            param_value: 0.0,
        }
    }
}

/// A trained model ready to forecast spans of one realization.
#[derive(Debug, Clone)]
pub enum TrainedModel {
    Standard(EchoStateNetwork),
    Hybrid(HybridReservoir),
    Ode(ExpertModel),
}

impl TrainedModel {
    /// Draws and trains instantiation `instantiation` of `kind` at sweep point
    /// `sweep_index` from the same streams the sweeps use.
    pub fn build(
        kind: ModelKind,
        manifest: &RunManifest,
        truth: &GroundTruth,
        params: &ExperimentParams,
        sweep_index: usize,
        instantiation: usize,
    ) -> Result<Self> {
        let training = &truth.segments.training;
        let d_u = training.nrows();
        match kind {
            ModelKind::Standard => {
                let mut rng = manifest
                    .key(truth.regime, 0, sweep_index, instantiation, StreamRole::StandardReservoir)
                    .rng();
                let m = ReservoirMatrices::random(&params.reservoir, d_u, false, &mut rng)?;
                Ok(TrainedModel::Standard(EchoStateNetwork::train_with(params.reservoir, m, training)?))
            }
            ModelKind::Hybrid => {
                let expert =
                    sample_expert(manifest, truth, params, sweep_index, instantiation, StreamRole::HybridExpert)?;
                let mut rng = manifest
                    .key(truth.regime, 0, sweep_index, instantiation, StreamRole::HybridReservoir)
                    .rng();
                let m = ReservoirMatrices::random(&params.reservoir, d_u, true, &mut rng)?;
                Ok(TrainedModel::Hybrid(HybridReservoir::train_with(params.reservoir, expert, m, training)?))
            }
            ModelKind::Ode => Ok(TrainedModel::Ode(sample_expert(
                manifest,
                truth,
                params,
                sweep_index,
                instantiation,
                StreamRole::OdeExpert,
            )?)),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::Standard(_) => ModelKind::Standard,
            TrainedModel::Hybrid(_) => ModelKind::Hybrid,
            TrainedModel::Ode(_) => ModelKind::Ode,
        }
    }

    /// Predictions for the `horizon` samples after the warm-up span, and the
    /// reason for stopping early if any.
    pub fn forecast(&self, warmup: &Matrix, horizon: usize) -> (Matrix, Option<Error>) {
        let outcome = match self {
            TrainedModel::Standard(esn) => esn.forecast(warmup, horizon),
            TrainedModel::Hybrid(h) => h.forecast(warmup, horizon),
            TrainedModel::Ode(e) => return ode_forecast(e, warmup, horizon),
        };
        match outcome {
            Ok(o) => (o.predictions, o.failure),
            Err(e) => (Matrix::zeros(warmup.nrows(), 0), Some(e)),
        }
    }
}

/// Iterates the expert from the last warm-up sample without any reservoir.
fn ode_forecast(expert: &ExpertModel, warmup: &Matrix, horizon: usize) -> (Matrix, Option<Error>) {
    let d_u = warmup.nrows();
    let mut out = Matrix::zeros(d_u, horizon);
    if warmup.ncols() == 0 {
        return (Matrix::zeros(d_u, 0), Some(Error::InvalidParameter("empty warm-up span".into())));
    }
    let mut state = warmup.column(warmup.ncols() - 1).into_owned();
    let mut next = vec![0.0; d_u];
    for k in 0..horizon {
        if let Err(e) = expert.predict(state.as_slice(), &mut next) {
            let err = Error::ForecastAborted {
                step: k,
                reason: e.to_string(),
            };
            return (out.columns(0, k).into_owned(), Some(err));
        }
        state.copy_from_slice(&next);
        out.column_mut(k).copy_from_slice(&next);
    }
    (out, None)
}

/// Trains (where applicable) and scores one `(realization, instantiation)`.
fn run_unit(
    kind: ModelKind,
    manifest: &RunManifest,
    truth: &GroundTruth,
    params: &ExperimentParams,
    label: &PointLabel,
    instantiation: usize,
) -> ArmOutput {
    let n_tests = manifest.layout.n_tests;
    let record = |k: usize, mean_nmse: f64, valid_time: f64| MetricRecord {
        task: manifest.task,
        regime: truth.regime,
        model: kind,
        param_name: label.param_name.clone(),
        param_value: label.param_value,
        instantiation,
        span: truth.realization * n_tests + k,
        mean_nmse,
        valid_time,
    };
    let mut out = ArmOutput::default();
    let model = match TrainedModel::build(kind, manifest, truth, params, label.sweep_index, instantiation) {
        Ok(f) => f,
        Err(e) => {
            out.failures.push(format!(
                "{} {} realization {} instantiation {instantiation}: training failed: {e}",
                kind, truth.regime, truth.realization
            ));
            out.records = (0..n_tests).map(|k| record(k, FAILED_NMSE, 0.0)).collect();
            return out;
        }
    };
    for (k, (warmup, test)) in truth.segments.spans.iter().enumerate() {
        let (pred, failure) = model.forecast(warmup, test.ncols());
        if let Some(e) = failure {
            out.failures.push(format!(
                "{} {} realization {} instantiation {instantiation} span {k}: {e}",
                kind, truth.regime, truth.realization
            ));
        }
        let (m, vt) = score_forecast(&pred, test, manifest.layout.dt, manifest.epsilon)
            .unwrap_or((FAILED_NMSE, 0.0));
        out.records.push(record(k, m, vt));
    }
    out
}

/// Runs one arm over every instantiation and realization of `truths`.
/// Records come out ordered by instantiation, then span.
pub fn run_arm(
    manifest: &RunManifest,
    kind: ModelKind,
    params: &ExperimentParams,
    label: &PointLabel,
    truths: &[GroundTruth],
) -> Result<ArmOutput> {
    manifest.validate()?;
    params.validate()?;
    let units: Vec<(usize, &GroundTruth)> = (0..manifest.n_instantiations)
        .flat_map(|i| truths.iter().map(move |t| (i, t)))
        .collect();
    let parts: Vec<ArmOutput> = units
        .par_iter()
        .map(|&(i, t)| run_unit(kind, manifest, t, params, label, i))
        .collect();
    let mut out = ArmOutput::default();
    for p in parts {
        out.records.extend(p.records);
        out.failures.extend(p.failures);
    }
    Ok(out)
}

/// Generates the ground truth of `regime` and runs one arm at `params`.
pub fn run_shared_procedure(
    manifest: &RunManifest,
    kind: ModelKind,
    params: &ExperimentParams,
    regime: RegimeName,
) -> Result<Vec<MetricRecord>> {
    manifest.validate()?;
    let truths = generate_ground_truths(manifest, regime)?;
    Ok(run_arm(manifest, kind, params, &PointLabel::baseline(), &truths)?.records)
}
