use rand::Rng;

use super::build::{build_input_matrix, build_internal_matrix};
use super::config::ReservoirConfig;
use super::ridge::{train_readout, Readout};
use super::sparse::{InputMatrix, SparseMatrix};
use crate::dynamics::normalize_pairs_in_place;
use crate::error::{Error, Result};
use crate::Matrix;

/// A one-step predictor whose output is fed to a hybrid reservoir alongside
/// the observed state.
pub trait Expert: Sync {
    /// Dimension of the states it maps, `D_u`.
    fn dim(&self) -> usize;
    /// Writes the predicted next state of `u` into `out`.
    fn predict(&self, u: &[f64], out: &mut [f64]) -> Result<()>;
}

/// Fixed random weights of an echo state network.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirMatrices {
    pub internal: SparseMatrix,
    pub input: InputMatrix,
}

impl ReservoirMatrices {
    pub fn new(internal: SparseMatrix, input: InputMatrix) -> Result<Self> {
        if internal.dim() != input.n_nodes() {
            return Err(Error::DimensionMismatch {
                what: "input matrix rows",
                expected: internal.dim(),
                found: input.n_nodes(),
            });
        }
        Ok(Self { internal, input })
    }

    /// Draws `A` and then `B` from `rng`.
    pub fn random<R: Rng + ?Sized>(
        cfg: &ReservoirConfig,
        d_u: usize,
        hybrid: bool,
        rng: &mut R,
    ) -> Result<Self> {
        let internal = build_internal_matrix(cfg, rng)?;
        let input = build_input_matrix(cfg, d_u, hybrid, rng)?;
        Self::new(internal, input)
    }

    pub fn size(&self) -> usize {
        self.internal.dim()
    }

    pub fn input_dim(&self) -> usize {
        self.input.n_inputs()
    }

    /// `out = tanh(A r + B u)`.
    fn update_into(&self, r: &[f64], u: &[f64], out: &mut [f64]) {
        self.internal.mul_vec(r, out);
        self.input.add_mul_vec(u, out);
        out.iter_mut().for_each(|v| *v = v.tanh());
    }
}

/// Reservoir activations `r_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirState(pub Vec<f64>);

impl ReservoirState {
    pub fn zeros(size: usize) -> Self {
        Self(vec![0.0; size])
    }
}

/// `r' = tanh(A r + B u)`.
pub fn update_state(
    r: &ReservoirState,
    input: &[f64],
    m: &ReservoirMatrices,
) -> Result<ReservoirState> {
    if r.0.len() != m.size() {
        return Err(Error::DimensionMismatch {
            what: "reservoir state",
            expected: m.size(),
            found: r.0.len(),
        });
    }
    if input.len() != m.input_dim() {
        return Err(Error::DimensionMismatch {
            what: "reservoir input",
            expected: m.input_dim(),
            found: input.len(),
        });
    }
    let mut out = vec![0.0; m.size()];
    m.update_into(&r.0, input, &mut out);
    Ok(ReservoirState(out))
}

/// Odd (1-based) entries pass through, even entries are squared.
pub fn nonlinear_transform(r: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; r.len()];
    transform_into(r, &mut out);
    out
}

fn transform_into(r: &[f64], out: &mut [f64]) {
    for (i, (o, &v)) in out.iter_mut().zip(r).enumerate() {
        *o = if i % 2 == 0 { v } else { v * v };
    }
}

/// Feature columns collected while driving a reservoir over training data.
#[derive(Debug, Clone, PartialEq)]
pub struct StateHistory {
    features: Matrix,
}

impl StateHistory {
    pub fn new(features: Matrix) -> Result<Self> {
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "state history" });
        }
        Ok(Self { features })
    }

    /// `D_feat x n_T`.
    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn feature_dim(&self) -> usize {
        self.features.nrows()
    }

    pub fn len(&self) -> usize {
        self.features.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.features.ncols() == 0
    }
}

/// Drives a reservoir one input at a time. For hybrid reservoirs the input is
/// `[expert(u); u]` and the features are `[expert(u); g(r)]`.
struct Driver<'a> {
    matrices: &'a ReservoirMatrices,
    expert: Option<&'a dyn Expert>,
    d_u: usize,
    r: Vec<f64>,
    next: Vec<f64>,
    input: Vec<f64>,
}

impl<'a> Driver<'a> {
    fn new(matrices: &'a ReservoirMatrices, expert: Option<&'a dyn Expert>, d_u: usize) -> Result<Self> {
        let expected_in = if expert.is_some() { 2 * d_u } else { d_u };
        if matrices.input_dim() != expected_in {
            return Err(Error::DimensionMismatch {
                what: "reservoir input dimension",
                expected: expected_in,
                found: matrices.input_dim(),
            });
        }
        if let Some(e) = expert {
            if e.dim() != d_u {
                return Err(Error::DimensionMismatch {
                    what: "expert state dimension",
                    expected: d_u,
                    found: e.dim(),
                });
            }
        }
        Ok(Self {
            matrices,
            expert,
            d_u,
            r: vec![0.0; matrices.size()],
            next: vec![0.0; matrices.size()],
            input: vec![0.0; expected_in],
        })
    }

    fn feature_dim(&self) -> usize {
        self.matrices.size() + if self.expert.is_some() { self.d_u } else { 0 }
    }

    fn step(&mut self, u: &[f64]) -> Result<()> {
        match self.expert {
            Some(e) => {
                let (pred, obs) = self.input.split_at_mut(self.d_u);
                e.predict(u, pred)?;
                obs.copy_from_slice(u);
            }
            None => self.input.copy_from_slice(u),
        }
        self.matrices.update_into(&self.r, &self.input, &mut self.next);
        std::mem::swap(&mut self.r, &mut self.next);
        if self.r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "reservoir activation" });
        }
        Ok(())
    }

    fn features_into(&self, out: &mut [f64]) {
        match self.expert {
            Some(_) => {
                let (head, tail) = out.split_at_mut(self.d_u);
                head.copy_from_slice(&self.input[..self.d_u]);
                transform_into(&self.r, tail);
            }
            None => transform_into(&self.r, out),
        }
    }
}

/// Drives the reservoir from `r_0 = 0` through `training` (`D_u x (n_T + 1)`);
/// column `t` of the history holds the features after consuming `u_t` and
/// the targets are `u_{t+1}`.
pub fn collect_states(
    training: &Matrix,
    m: &ReservoirMatrices,
    expert: Option<&dyn Expert>,
) -> Result<(StateHistory, Matrix)> {
    if training.ncols() < 2 {
        return Err(Error::InvalidParameter(
            "training span needs at least two samples".into(),
        ));
    }
    let d_u = training.nrows();
    let mut driver = Driver::new(m, expert, d_u)?;
    let n_t = training.ncols() - 1;
    let mut features = Matrix::zeros(driver.feature_dim(), n_t);
    for t in 0..n_t {
        driver
            .step(training.column(t).as_slice())
            .map_err(|e| match e {
                Error::NonFinite { .. } => Error::NumericalBlowUp { step: t },
                other => other,
            })?;
        driver.features_into(features.column_mut(t).as_mut_slice());
    }
    let targets = training.columns(1, n_t).into_owned();
    Ok((StateHistory::new(features)?, targets))
}

/// Forecast predictions plus the reason it stopped early, if it did.
#[derive(Debug, Clone)]
pub struct ForecastOutcome {
    /// `D_u x completed` predictions.
    pub predictions: Matrix,
    pub failure: Option<Error>,
}

/// Synchronises on `warmup` from `r_0 = 0`, then runs autoregressively for
/// `horizon` steps. Column `k` of the output predicts the sample `k + 1`
/// steps after the last warm-up sample. Every prediction is renormalised to
/// unit phase-component pairs before it is stored and fed back.
pub fn forecast_partial(
    warmup: &Matrix,
    horizon: usize,
    m: &ReservoirMatrices,
    readout: &Readout,
    expert: Option<&dyn Expert>,
) -> Result<ForecastOutcome> {
    if warmup.ncols() == 0 {
        return Err(Error::InvalidParameter("warm-up span must be non-empty".into()));
    }
    let d_u = warmup.nrows();
    let mut driver = Driver::new(m, expert, d_u)?;
    if readout.feature_dim() != driver.feature_dim() || readout.output_dim() != d_u {
        return Err(Error::DimensionMismatch {
            what: "readout shape",
            expected: driver.feature_dim(),
            found: readout.feature_dim(),
        });
    }
    let abort = |step: usize, e: Error| Error::ForecastAborted {
        step,
        reason: e.to_string(),
    };

    for u in warmup.column_iter() {
        driver.step(u.as_slice()).map_err(|e| abort(0, e))?;
    }
    let mut features = vec![0.0; driver.feature_dim()];
    let mut prediction = vec![0.0; d_u];
    let mut out = Matrix::zeros(d_u, horizon);
    for k in 0..horizon {
        if k > 0 {
            if let Err(e) = driver.step(&prediction) {
                return Ok(truncated(out, k, abort(k, e)));
            }
        }
        driver.features_into(&mut features);
        readout.predict(&features, &mut prediction);
        if prediction.iter().any(|v| !v.is_finite()) {
            return Ok(truncated(out, k, abort(k, Error::NonFinite { what: "prediction" })));
        }
        if let Err(e) = normalize_pairs_in_place(&mut prediction) {
            return Ok(truncated(out, k, abort(k, e)));
        }
        out.column_mut(k).copy_from_slice(&prediction);
    }
    Ok(ForecastOutcome {
        predictions: out,
        failure: None,
    })
}

fn truncated(out: Matrix, completed: usize, failure: Error) -> ForecastOutcome {
    ForecastOutcome {
        predictions: out.columns(0, completed).into_owned(),
        failure: Some(failure),
    }
}

/// [`forecast_partial`] that turns an early stop into an error.
pub fn forecast(
    warmup: &Matrix,
    horizon: usize,
    m: &ReservoirMatrices,
    readout: &Readout,
    expert: Option<&dyn Expert>,
) -> Result<Matrix> {
    let outcome = forecast_partial(warmup, horizon, m, readout, expert)?;
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(outcome.predictions),
    }
}

/// A trained standard echo state network.
#[derive(Debug, Clone)]
pub struct EchoStateNetwork {
    pub config: ReservoirConfig,
    pub matrices: ReservoirMatrices,
    pub readout: Readout,
}

impl EchoStateNetwork {
    pub fn train_with(
        config: ReservoirConfig,
        matrices: ReservoirMatrices,
        training: &Matrix,
    ) -> Result<Self> {
        let (history, targets) = collect_states(training, &matrices, None)?;
        let readout = train_readout(&history, &targets, config.regularization)?;
        Ok(Self {
            config,
            matrices,
            readout,
        })
    }

    pub fn train<R: Rng + ?Sized>(
        config: ReservoirConfig,
        training: &Matrix,
        rng: &mut R,
    ) -> Result<Self> {
        let matrices = ReservoirMatrices::random(&config, training.nrows(), false, rng)?;
        Self::train_with(config, matrices, training)
    }

    pub fn forecast(&self, warmup: &Matrix, horizon: usize) -> Result<ForecastOutcome> {
        forecast_partial(warmup, horizon, &self.matrices, &self.readout, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn small_matrices(seed: u64, d_u: usize, hybrid: bool) -> ReservoirMatrices {
        let cfg = ReservoirConfig {
            size: 40,
            ..ReservoirConfig::default()
        };
        ReservoirMatrices::random(&cfg, d_u, hybrid, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn transform_examples() {
        assert_eq!(nonlinear_transform(&[2.0, 3.0, 4.0]), vec![2.0, 9.0, 4.0]);
        assert_eq!(nonlinear_transform(&[-1.0, -1.0]), vec![-1.0, 1.0]);
        assert_eq!(nonlinear_transform(&[0.0; 4]), vec![0.0; 4]);
    }

    #[test]
    fn update_from_rest_and_saturation() {
        let m = small_matrices(1, 4, false);
        let r = update_state(&ReservoirState::zeros(40), &[0.0; 4], &m).unwrap();
        assert!(r.0.iter().all(|v| *v == 0.0));

        let b = InputMatrix::new(1, vec![0; 3], vec![1.0; 3]).unwrap();
        let sat = ReservoirMatrices::new(SparseMatrix::zeros(3), b).unwrap();
        let r = update_state(&ReservoirState::zeros(3), &[1e6], &sat).unwrap();
        assert!(r.0.iter().all(|v| v.is_finite() && *v <= 1.0 && *v > 0.99));

        assert!(update_state(&ReservoirState::zeros(3), &[1.0, 2.0], &sat).is_err());
        assert!(update_state(&ReservoirState::zeros(4), &[1.0], &sat).is_err());
    }

    #[test]
    fn activations_stay_in_tanh_range() {
        let m = small_matrices(2, 4, false);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let mut r = ReservoirState::zeros(40);
        for _ in 0..200 {
            let u: Vec<f64> = (0..4).map(|_| rng.random_range(-50.0..50.0)).collect();
            r = update_state(&r, &u, &m).unwrap();
            assert!(r.0.iter().all(|v| v.abs() <= 1.0));
        }
    }

    fn circle_data(n: usize, cols: usize) -> Matrix {
        Matrix::from_fn(2 * n, cols, |i, t| {
            let theta = 0.1 * t as f64 * (1.0 + i as f64 / 2.0).floor() + i as f64;
            if i % 2 == 0 {
                theta.cos()
            } else {
                theta.sin()
            }
        })
    }

    #[test]
    fn collection_shapes_and_determinism() {
        let data = circle_data(2, 51);
        let m = small_matrices(4, 4, false);
        let (h1, y1) = collect_states(&data, &m, None).unwrap();
        let (h2, y2) = collect_states(&data, &m, None).unwrap();
        assert_eq!(h1, h2);
        assert_eq!(y1, y2);
        assert_eq!((h1.feature_dim(), h1.len()), (40, 50));
        assert_eq!(y1.column(0), data.column(1));
        assert!(collect_states(&data.columns(0, 1).into_owned(), &m, None).is_err());
    }

    #[test]
    fn forecast_is_on_circle_and_deterministic() {
        let data = circle_data(2, 300);
        let m = small_matrices(5, 4, false);
        let esn = EchoStateNetwork::train_with(ReservoirConfig::default(), m, &data.columns(0, 201).into_owned())
            .unwrap();
        let warm = data.columns(200, 20).into_owned();
        let a = esn.forecast(&warm, 50).unwrap();
        let b = esn.forecast(&warm, 50).unwrap();
        assert!(a.failure.is_none());
        assert_eq!(a.predictions, b.predictions);
        assert_eq!(a.predictions.ncols(), 50);
        for col in a.predictions.column_iter() {
            for xy in col.as_slice().chunks_exact(2) {
                assert!((xy[0].hypot(xy[1]) - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_readout_aborts_with_prefix() {
        let m = small_matrices(6, 4, false);
        let readout = Readout::new(Matrix::zeros(4, 40)).unwrap();
        let out = forecast_partial(&circle_data(2, 10), 5, &m, &readout, None).unwrap();
        assert_eq!(out.predictions.ncols(), 0);
        assert!(matches!(out.failure, Some(Error::ForecastAborted { step: 0, .. })));
        assert!(forecast(&circle_data(2, 10), 5, &m, &readout, None).is_err());

        let wrong = Readout::new(Matrix::zeros(4, 39)).unwrap();
        assert!(forecast_partial(&circle_data(2, 10), 5, &m, &wrong, None).is_err());
    }
}
