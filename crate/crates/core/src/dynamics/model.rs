use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::transform::{ComponentVector, PhaseVector};
use crate::error::{ensure_finite, Error, Result};

/// All-to-all Kuramoto network: natural frequencies (rad/s) and global coupling K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KuramotoParams {
    pub omega: Vec<f64>,
    pub coupling: f64,
}

impl KuramotoParams {
    pub fn new(omega: Vec<f64>, coupling: f64) -> Result<Self> {
        let p = Self { omega, coupling };
        p.validate()?;
        Ok(p)
    }

    pub fn n_oscillators(&self) -> usize {
        self.omega.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega.is_empty() {
            return Err(Error::InvalidParameter("at least one oscillator is required".into()));
        }
        ensure_finite(&self.omega, "natural frequencies")?;
        ensure_finite(&[self.coupling], "coupling strength")
    }
}

/// Kuramoto network with a shifted first harmonic and a second harmonic of
/// relative strength `second_harmonic_scale` in the coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiHarmonicParams {
    pub base: KuramotoParams,
    pub gamma1: f64,
    pub gamma2: f64,
    pub second_harmonic_scale: f64,
}

impl BiHarmonicParams {
    pub fn new(base: KuramotoParams, gamma1: f64, gamma2: f64, a: f64) -> Result<Self> {
        base.validate()?;
        ensure_finite(&[gamma1, gamma2, a], "bi-harmonic coupling parameters")?;
        Ok(Self {
            base,
            gamma1,
            gamma2,
            second_harmonic_scale: a,
        })
    }
}

/// Either member of the model family. The vector fields below are the
/// single source of truth for both the ground truth and the expert.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Model {
    Standard(KuramotoParams),
    #[serde(rename = "biharmonic")]
    BiHarmonic(BiHarmonicParams),
}

impl Model {
    pub fn base(&self) -> &KuramotoParams {
        match self {
            Model::Standard(p) => p,
            Model::BiHarmonic(p) => &p.base,
        }
    }

    fn base_mut(&mut self) -> &mut KuramotoParams {
        match self {
            Model::Standard(p) => p,
            Model::BiHarmonic(p) => &mut p.base,
        }
    }

    pub fn n_oscillators(&self) -> usize {
        self.base().n_oscillators()
    }

    /// `dtheta/dt`, evaluated by the literal pairwise sum.
    pub fn phase_derivative(&self, theta: &[f64], out: &mut [f64]) {
        let base = self.base();
        let n = base.n_oscillators();
        let k_over_n = base.coupling / n as f64;
        match self {
            Model::Standard(_) => {
                for i in 0..n {
                    let coupling: f64 = theta.iter().map(|&tj| (tj - theta[i]).sin()).sum();
                    out[i] = base.omega[i] + k_over_n * coupling;
                }
            }
            Model::BiHarmonic(p) => {
                let a = p.second_harmonic_scale;
                for i in 0..n {
                    let coupling: f64 = theta
                        .iter()
                        .map(|&tj| {
                            let d = tj - theta[i];
                            (d + p.gamma1).sin() + a * (2.0 * d + p.gamma2).sin()
                        })
                        .sum();
                    out[i] = base.omega[i] + k_over_n * coupling;
                }
            }
        }
    }

    /// Time derivative of the phase components, `dx_i = -y_i w_i`, `dy_i = x_i w_i`
    /// with `w_i` the instantaneous frequency written in terms of `(x, y)`.
    /// Uses the order-parameter sums, so the cost is linear in N.
    pub fn component_derivative(&self, state: &[f64], out: &mut [f64]) {
        let base = self.base();
        let n = base.n_oscillators();
        let k_over_n = base.coupling / n as f64;
        let (mut sum_x, mut sum_y) = (0.0, 0.0);
        for xy in state.chunks_exact(2) {
            sum_x += xy[0];
            sum_y += xy[1];
        }
        match self {
            Model::Standard(_) => {
                for (i, (xy, d)) in state.chunks_exact(2).zip(out.chunks_exact_mut(2)).enumerate() {
                    let (x, y) = (xy[0], xy[1]);
                    // sum_j (y_j x_i - x_j y_i)
                    let s1 = x * sum_y - y * sum_x;
                    d[0] = -base.omega[i] * y - k_over_n * y * s1;
                    d[1] = base.omega[i] * x + k_over_n * x * s1;
                }
            }
            Model::BiHarmonic(p) => {
                let (mut sum_c2, mut sum_s2) = (0.0, 0.0);
                for xy in state.chunks_exact(2) {
                    sum_c2 += xy[0] * xy[0] - xy[1] * xy[1];
                    sum_s2 += 2.0 * xy[0] * xy[1];
                }
                let (sg1, cg1) = p.gamma1.sin_cos();
                let (sg2, cg2) = p.gamma2.sin_cos();
                let a = p.second_harmonic_scale;
                for (i, (xy, d)) in state.chunks_exact(2).zip(out.chunks_exact_mut(2)).enumerate() {
                    let (x, y) = (xy[0], xy[1]);
                    let s1 = x * sum_y - y * sum_x;
                    let c1 = x * sum_x + y * sum_y;
                    let (c2, s2i) = (x * x - y * y, 2.0 * x * y);
                    let s2 = c2 * sum_s2 - s2i * sum_c2;
                    let cc2 = c2 * sum_c2 + s2i * sum_s2;
                    let freq = base.omega[i]
                        + k_over_n * (cg1 * s1 + sg1 * c1 + a * (cg2 * s2 + sg2 * cc2));
                    d[0] = -y * freq;
                    d[1] = x * freq;
                }
            }
        }
    }

    /// Drops any higher-harmonic structure, leaving the standard model that
    /// serves as the expert.
    pub fn standard_part(&self) -> KuramotoParams {
        self.base().clone()
    }
}

fn check_len(found: usize, expected: usize, what: &'static str) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { what, expected, found })
    }
}

pub fn kuramoto_rhs(state: &PhaseVector, params: &KuramotoParams) -> Result<Vec<f64>> {
    check_len(state.len(), params.n_oscillators(), "phase state")?;
    params.validate()?;
    let mut out = vec![0.0; state.len()];
    Model::Standard(params.clone()).phase_derivative(state.as_slice(), &mut out);
    ensure_finite(&out, "phase derivative")?;
    Ok(out)
}

pub fn biharmonic_rhs(state: &PhaseVector, params: &BiHarmonicParams) -> Result<Vec<f64>> {
    check_len(state.len(), params.base.n_oscillators(), "phase state")?;
    params.base.validate()?;
    let mut out = vec![0.0; state.len()];
    Model::BiHarmonic(params.clone()).phase_derivative(state.as_slice(), &mut out);
    ensure_finite(&out, "phase derivative")?;
    Ok(out)
}

pub fn component_rhs(state: &ComponentVector, model: &Model) -> Result<Vec<f64>> {
    check_len(state.len(), 2 * model.n_oscillators(), "component state")?;
    let mut out = vec![0.0; state.len()];
    model.component_derivative(state.as_slice(), &mut out);
    ensure_finite(&out, "component derivative")?;
    Ok(out)
}

/// Multiplicative parameter error: `K <- (1 + xi_K) K`, `w_i <- (1 + xi_i) w_i`
/// with `xi_K ~ N(0, sigma_k^2)` drawn first, then one `xi_i ~ N(0, sigma_omega^2)`
/// per oscillator. Harmonic parameters are untouched.
pub fn perturb_params<R: Rng + ?Sized>(
    model: &Model,
    sigma_k: f64,
    sigma_omega: f64,
    rng: &mut R,
) -> Result<Model> {
    if !(sigma_k >= 0.0 && sigma_omega >= 0.0) || !sigma_k.is_finite() || !sigma_omega.is_finite()
    {
        return Err(Error::InvalidParameter(format!(
            "parameter-error standard deviations must be finite and >= 0 (sigma_k = {sigma_k}, sigma_omega = {sigma_omega})"
        )));
    }
    let mut out = model.clone();
    let base = out.base_mut();
    let xi_k: f64 = rng.sample::<f64, _>(StandardNormal) * sigma_k;
    base.coupling *= 1.0 + xi_k;
    for w in base.omega.iter_mut() {
        let xi: f64 = rng.sample::<f64, _>(StandardNormal) * sigma_omega;
        *w *= 1.0 + xi;
    }
    Ok(out)
}
