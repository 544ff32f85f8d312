use nalgebra::Cholesky;

use super::network::StateHistory;
use crate::error::{Error, Result};
use crate::Matrix;

/// Linear readout `u_{t+1} = C phi_t`, `C` of shape `D_u x D_feat`.
#[derive(Debug, Clone, PartialEq)]
pub struct Readout {
    weights: Matrix,
}

impl Readout {
    pub fn new(weights: Matrix) -> Result<Self> {
        if weights.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "readout weights" });
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn output_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn feature_dim(&self) -> usize {
        self.weights.ncols()
    }

    /// `out = C features`.
    pub fn predict(&self, features: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (col, &f) in self.weights.column_iter().zip(features) {
            if f != 0.0 {
                for (o, c) in out.iter_mut().zip(col.iter()) {
                    *o += c * f;
                }
            }
        }
    }
}

/// Closed-form ridge fit `C = Y Phi^T (Phi Phi^T + beta I)^{-1}` with features
/// as columns of `Phi`. Solved through a Cholesky factorisation of the
/// regularised Gram matrix.
pub fn train_readout(history: &StateHistory, targets: &Matrix, beta: f64) -> Result<Readout> {
    let phi = history.features();
    if phi.ncols() == 0 {
        return Err(Error::InvalidParameter("state history is empty".into()));
    }
    if targets.ncols() != phi.ncols() {
        return Err(Error::DimensionMismatch {
            what: "training targets (columns)",
            expected: phi.ncols(),
            found: targets.ncols(),
        });
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("regularization must be >= 0, got {beta}")));
    }

    let mut gram = phi * phi.transpose();
    let scale = gram.diagonal().max();
    for i in 0..gram.nrows() {
        gram[(i, i)] += beta;
    }
    let rhs = phi * targets.transpose();
    let chol = Cholesky::new(gram).ok_or(Error::SingularGram { regularization: beta })?;
    if beta == 0.0 {
        // Cholesky can succeed on a numerically singular Gram matrix with a
        // round-off sized pivot; treat that as rank deficiency.
        let min_pivot = chol.l_dirty().diagonal().map(|d| d * d).min();
        if min_pivot <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::SingularGram { regularization: beta });
        }
    }
    Readout::new(chol.solve(&rhs).transpose())
}

/// `sum_t ||C phi_t - y_t||^2 + beta ||C||_F^2`.
pub fn regularized_loss(readout: &Readout, history: &StateHistory, targets: &Matrix, beta: f64) -> f64 {
    let residual = readout.weights() * history.features() - targets;
    residual.norm_squared() + beta * readout.weights().norm_squared()
}
