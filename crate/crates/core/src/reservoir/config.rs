use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reservoir hyperparameters. Defaults are the baseline settings used by
/// both tasks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReservoirConfig {
    /// Number of reservoir nodes.
    pub size: usize,
    pub spectral_radius: f64,
    /// Half-width of the uniform input weight law.
    pub input_scaling: f64,
    /// Expected degree of the internal Erdos-Renyi graph.
    pub mean_degree: f64,
    /// Ridge penalty.
    pub regularization: f64,
    /// Probability that a node's input connection attaches to the expert block
    /// (hybrid reservoirs only).
    pub knowledge_ratio: f64,
}

impl Default for ReservoirConfig {
    fn default() -> Self {
        Self {
            size: 300,
            spectral_radius: 0.4,
            input_scaling: 0.15,
            mean_degree: 3.0,
            regularization: 1e-6,
            knowledge_ratio: 0.5,
        }
    }
}

impl ReservoirConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.size == 0 {
            return bad("reservoir size must be >= 1".into());
        }
        if !(self.spectral_radius > 0.0 && self.spectral_radius.is_finite()) {
            return bad(format!("spectral_radius must be > 0, got {}", self.spectral_radius));
        }
        if !(self.input_scaling > 0.0 && self.input_scaling.is_finite()) {
            return bad(format!("input_scaling must be > 0, got {}", self.input_scaling));
        }
        if !(self.mean_degree > 0.0 && self.mean_degree <= self.size as f64) {
            return bad(format!(
                "mean_degree must lie in (0, size = {}], got {}",
                self.size, self.mean_degree
            ));
        }
        if !(self.regularization >= 0.0 && self.regularization.is_finite()) {
            return bad(format!("regularization must be >= 0, got {}", self.regularization));
        }
        if !(0.0..=1.0).contains(&self.knowledge_ratio) {
            return bad(format!(
                "knowledge_ratio must lie in [0, 1], got {}",
                self.knowledge_ratio
            ));
        }
        Ok(())
    }

    pub fn edge_probability(&self) -> f64 {
        self.mean_degree / self.size as f64
    }
}
