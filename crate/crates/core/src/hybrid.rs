//! Hybrid reservoir: a standard Kuramoto expert integrated one step ahead
//! and fed both into the reservoir input (`[u~_{t+1}; u_t]`) and straight
//! through to the readout (`[u~_{t+1}; g(r_{t+1})]`).

use rand::Rng;

use crate::dynamics::{
    normalize_pairs_in_place, rk4_step, ComponentField, ComponentVector, KuramotoParams, Model,
    Rk4Scratch,
};
use crate::error::{Error, Result};
use crate::reservoir::{
    collect_states, forecast_partial, nonlinear_transform, train_readout, Expert, ForecastOutcome,
    Readout, ReservoirConfig, ReservoirMatrices, ReservoirState,
};
use crate::Matrix;

/// Standard Kuramoto model advanced by a single RK4 step of size `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertModel {
    model: Model,
    dt: f64,
}

impl ExpertModel {
    pub fn new(params: KuramotoParams, dt: f64) -> Result<Self> {
        params.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("expert dt must be > 0, got {dt}")));
        }
        Ok(Self {
            model: Model::Standard(params),
            dt,
        })
    }

    pub fn params(&self) -> &KuramotoParams {
        self.model.base()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

impl Expert for ExpertModel {
    fn dim(&self) -> usize {
        2 * self.model.n_oscillators()
    }

    fn predict(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(u);
        let mut scratch = Rk4Scratch::new(out.len());
        rk4_step(&ComponentField(&self.model), out, self.dt, &mut scratch);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "expert prediction" });
        }
        normalize_pairs_in_place(out)
    }
}

fn check_on_circle(u: &ComponentVector) -> Result<()> {
    for i in 0..u.n_oscillators() {
        let (x, y) = u.pair(i);
        if (x.hypot(y) - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParameter(format!(
                "oscillator {i} is off the unit circle (|(x, y)| = {})",
                x.hypot(y)
            )));
        }
    }
    Ok(())
}

/// One expert step followed by renormalisation.
pub fn expert_step(u: &ComponentVector, expert: &ExpertModel) -> Result<ComponentVector> {
    if u.len() != expert.dim() {
        return Err(Error::DimensionMismatch {
            what: "expert input",
            expected: expert.dim(),
            found: u.len(),
        });
    }
    check_on_circle(u)?;
    let mut out = vec![0.0; u.len()];
    expert.predict(u.as_slice(), &mut out)?;
    ComponentVector::new(out)
}

/// `[expert_step(u); u]`.
pub fn hybrid_input(u: &ComponentVector, expert: &ExpertModel) -> Result<Vec<f64>> {
    let mut v = expert_step(u, expert)?.into_inner();
    v.extend_from_slice(u.as_slice());
    Ok(v)
}

/// `[u~; g(r)]`; the expert block is never transformed.
pub fn hybrid_features(r_next: &ReservoirState, u_tilde: &ComponentVector) -> Vec<f64> {
    let mut v = u_tilde.as_slice().to_vec();
    v.extend(nonlinear_transform(&r_next.0));
    v
}

/// A trained hybrid reservoir.
#[derive(Debug, Clone)]
pub struct HybridReservoir {
    pub config: ReservoirConfig,
    pub expert: ExpertModel,
    pub matrices: ReservoirMatrices,
    pub readout: Readout,
}

impl HybridReservoir {
    pub fn train_with(
        config: ReservoirConfig,
        expert: ExpertModel,
        matrices: ReservoirMatrices,
        training: &Matrix,
    ) -> Result<Self> {
        let (history, targets) = collect_states(training, &matrices, Some(&expert))?;
        let readout = train_readout(&history, &targets, config.regularization)?;
        Ok(Self {
            config,
            expert,
            matrices,
            readout,
        })
    }

    /// Draws `A` and a hybrid `B` from `rng`, then trains.
    pub fn train<R: Rng + ?Sized>(
        config: ReservoirConfig,
        expert: ExpertModel,
        training: &Matrix,
        rng: &mut R,
    ) -> Result<Self> {
        let matrices = ReservoirMatrices::random(&config, training.nrows(), true, rng)?;
        Self::train_with(config, expert, matrices, training)
    }

    pub fn forecast(&self, warmup: &Matrix, horizon: usize) -> Result<ForecastOutcome> {
        forecast_partial(warmup, horizon, &self.matrices, &self.readout, Some(&self.expert))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{phases_to_components, PhaseVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use std::f64::consts::PI;

    fn unit_state(theta: &[f64]) -> ComponentVector {
        phases_to_components(&PhaseVector::new(theta.to_vec()).unwrap())
    }

    #[test]
    fn frozen_expert_is_identity() {
        let e = ExpertModel::new(KuramotoParams::new(vec![0.0; 3], 0.0).unwrap(), 0.1).unwrap();
        let u = unit_state(&[0.3, -1.0, 2.5]);
        let out = expert_step(&u, &e).unwrap();
        for (a, b) in out.as_slice().iter().zip(u.as_slice()) {
            assert!((a - b).abs() < 1e-15);
        }
        let input = hybrid_input(&u, &e).unwrap();
        assert_eq!(input.len(), 12);
        for i in 0..6 {
            assert!((input[i] - input[6 + i]).abs() < 1e-15);
        }
    }

    #[test]
    fn free_rotation() {
        let e = ExpertModel::new(KuramotoParams::new(vec![1.0; 5], 0.0).unwrap(), 0.1).unwrap();
        let theta = [0.0, 1.0, -2.0, 3.0, -0.5];
        let out = expert_step(&unit_state(&theta), &e).unwrap();
        for (i, t) in theta.iter().enumerate() {
            let (x, y) = out.pair(i);
            let expected = unit_state(&[t + 0.1]);
            assert!((x - expected.pair(0).0).abs() < 1e-7);
            assert!((y - expected.pair(0).1).abs() < 1e-7);
        }
    }

    #[test]
    fn input_layout_and_shapes() {
        let e = ExpertModel::new(
            KuramotoParams::new(vec![0.2, -0.1, 0.4, 0.9, -0.7], 2.0).unwrap(),
            0.1,
        )
        .unwrap();
        let u = unit_state(&[0.1, 0.2, 0.3, 0.4, 0.5]);
        let input = hybrid_input(&u, &e).unwrap();
        assert_eq!(input.len(), 20);
        assert_eq!(&input[..10], expert_step(&u, &e).unwrap().as_slice());
        assert_eq!(&input[10..], u.as_slice());
    }

    #[test]
    fn features_pass_expert_block_through() {
        let u_tilde = ComponentVector::new(vec![-0.6, -0.8, -1.0, 0.0]).unwrap();
        let r = ReservoirState(vec![-0.5, -0.5, 0.25]);
        assert_eq!(
            hybrid_features(&r, &u_tilde),
            vec![-0.6, -0.8, -1.0, 0.0, -0.5, 0.25, 0.25]
        );
        let zeros = hybrid_features(&ReservoirState::zeros(300), &unit_state(&[0.0; 5]));
        assert_eq!(zeros.len(), 310);
        assert!(zeros[10..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn off_circle_input_rejected() {
        let e = ExpertModel::new(KuramotoParams::new(vec![0.0], 0.0).unwrap(), 0.1).unwrap();
        let u = ComponentVector::new(vec![0.5, 0.0]).unwrap();
        assert!(expert_step(&u, &e).is_err());
        assert!(ExpertModel::new(KuramotoParams::new(vec![0.0], 0.0).unwrap(), 0.0).is_err());
    }

    #[test]
    fn hybrid_forecast_shape_matches_standard() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let theta0: Vec<f64> = (0..3).map(|_| rng.random_range(-PI..PI)).collect();
        let params = KuramotoParams::new(vec![0.3, -0.2, 0.5], 0.5).unwrap();
        let cfg = crate::dynamics::IntegratorConfig::default();
        let traj = crate::dynamics::Trajectory::evolve(
            Model::Standard(params.clone()),
            PhaseVector::new(theta0).unwrap(),
            &cfg,
            400,
        )
        .unwrap();
        let rc = ReservoirConfig {
            size: 60,
            ..ReservoirConfig::default()
        };
        let training = traj.samples.columns(0, 201).into_owned();
        let warm = traj.samples.columns(250, 20).into_owned();
        let hybrid = HybridReservoir::train(rc, ExpertModel::new(params, 0.1).unwrap(), &training, &mut rng)
            .unwrap();
        let std = crate::reservoir::EchoStateNetwork::train(rc, &training, &mut rng).unwrap();
        let a = hybrid.forecast(&warm, 30).unwrap().predictions;
        let b = std.forecast(&warm, 30).unwrap().predictions;
        assert_eq!(a.shape(), b.shape());
        assert_eq!(hybrid.readout.feature_dim(), 66);
        assert_eq!(hybrid.matrices.input_dim(), 12);
    }
}
