use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::Task;
use crate::error::{Error, Result};
use crate::reservoir::ReservoirConfig;

/// Reservoir hyperparameters plus the expert's parameter-error levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentParams {
    pub reservoir: ReservoirConfig,
    pub sigma_k: f64,
    pub sigma_omega: f64,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        Self {
            reservoir: ReservoirConfig::default(),
            sigma_k: 0.05,
            sigma_omega: 0.05,
        }
    }
}

impl ExperimentParams {
    pub fn validate(&self) -> Result<()> {
        self.reservoir.validate()?;
        for (name, v) in [("sigma_k", self.sigma_k), ("sigma_omega", self.sigma_omega)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn get(&self, p: SweepParameter) -> f64 {
        let r = &self.reservoir;
        match p {
            SweepParameter::SpectralRadius => r.spectral_radius,
            SweepParameter::InputScaling => r.input_scaling,
            SweepParameter::Regularization => r.regularization,
            SweepParameter::Size => r.size as f64,
            SweepParameter::SigmaK => self.sigma_k,
            SweepParameter::SigmaOmega => self.sigma_omega,
            SweepParameter::KnowledgeRatio => r.knowledge_ratio,
            SweepParameter::MeanDegree => r.mean_degree,
        }
    }

    /// Copy with one parameter replaced.
    pub fn with(&self, p: SweepParameter, value: f64) -> Result<Self> {
        let mut out = *self;
        let r = &mut out.reservoir;
        match p {
            SweepParameter::SpectralRadius => r.spectral_radius = value,
            SweepParameter::InputScaling => r.input_scaling = value,
            SweepParameter::Regularization => r.regularization = value,
            SweepParameter::Size => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
                    return Err(Error::InvalidParameter(format!(
                        "size must be a positive integer, got {value}"
                    )));
                }
                r.size = value as usize;
            }
            SweepParameter::SigmaK => out.sigma_k = value,
            SweepParameter::SigmaOmega => out.sigma_omega = value,
            SweepParameter::KnowledgeRatio => r.knowledge_ratio = value,
            SweepParameter::MeanDegree => r.mean_degree = value,
        }
        out.validate()?;
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    SpectralRadius,
    InputScaling,
    Regularization,
    Size,
    SigmaK,
    SigmaOmega,
    KnowledgeRatio,
    MeanDegree,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 8] = [
        SweepParameter::SpectralRadius,
        SweepParameter::InputScaling,
        SweepParameter::Regularization,
        SweepParameter::Size,
        SweepParameter::SigmaK,
        SweepParameter::SigmaOmega,
        SweepParameter::KnowledgeRatio,
        SweepParameter::MeanDegree,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepParameter::SpectralRadius => "spectral_radius",
            SweepParameter::InputScaling => "input_scaling",
            SweepParameter::Regularization => "regularization",
            SweepParameter::Size => "size",
            SweepParameter::SigmaK => "sigma_k",
            SweepParameter::SigmaOmega => "sigma_omega",
            SweepParameter::KnowledgeRatio => "knowledge_ratio",
            SweepParameter::MeanDegree => "mean_degree",
        }
    }

    /// Published sweep range for `task`; `None` where only the baseline was used.
    pub fn range(self, task: Task) -> Option<(f64, f64)> {
        use SweepParameter::*;
        match (task, self) {
            (_, Size) => Some((50.0, 1000.0)),
            (_, SpectralRadius) => Some((0.1, 2.0)),
            (Task::ParameterError, InputScaling) => Some((0.05, 2.0)),
            (Task::ResidualPhysics, InputScaling) => Some((0.1, 2.0)),
            (Task::ParameterError, SigmaK | SigmaOmega) => Some((0.004, 0.48)),
            (Task::ParameterError, KnowledgeRatio) => Some((0.05, 1.0)),
            (Task::ResidualPhysics, Regularization) => Some((1e-8, 0.5)),
            _ => None,
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepParameter::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| {
                let valid: Vec<_> = SweepParameter::ALL.iter().map(|p| p.as_str()).collect();
                Error::InvalidParameter(format!(
                    "unknown sweep parameter '{s}'; valid parameters: {}",
                    valid.join(", ")
                ))
            })
    }
}

/// One-at-a-time sweep of `parameter` over `values`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidParameter("sweep needs at least one value".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "sweep values" });
        }
        Ok(())
    }

    /// Values outside the published range (other than the baseline itself).
    pub fn extrapolated(&self, task: Task, baseline: &ExperimentParams) -> Vec<f64> {
        let base = baseline.get(self.parameter);
        let range = self.parameter.range(task);
        self.values
            .iter()
            .copied()
            .filter(|&v| v != base && !range.is_some_and(|(lo, hi)| v >= lo && v <= hi))
            .collect()
    }
}

/// A corner of the regularization / spectral radius / input scaling cube.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub label: char,
    pub regularization: f64,
    pub spectral_radius: f64,
    pub input_scaling: f64,
}

impl GridPoint {
    /// `A`-`D` at low input scaling, `E`-`H` at high; within each half the
    /// order is (low beta, low rho), (high beta, low rho), (low beta, high rho),
    /// (high beta, high rho).
    pub fn all() -> [GridPoint; 8] {
        std::array::from_fn(|i| GridPoint {
            label: (b'A' + i as u8) as char,
            regularization: if i % 2 == 0 { 1e-4 } else { 1e-1 },
            spectral_radius: if (i / 2) % 2 == 0 { 0.1 } else { 2.0 },
            input_scaling: if i < 4 { 0.05 } else { 0.20 },
        })
    }

    pub fn index(&self) -> usize {
        (self.label as u8 - b'A') as usize
    }

    pub fn apply(&self, base: &ExperimentParams) -> Result<ExperimentParams> {
        base.with(SweepParameter::Regularization, self.regularization)?
            .with(SweepParameter::SpectralRadius, self.spectral_radius)?
            .with(SweepParameter::InputScaling, self.input_scaling)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_and_setters() {
        let p = ExperimentParams::default();
        assert_eq!(p.reservoir.size, 300);
        assert_eq!((p.sigma_k, p.sigma_omega), (0.05, 0.05));
        for param in SweepParameter::ALL {
            assert_eq!(param.as_str().parse::<SweepParameter>().unwrap(), param);
            let v = p.get(param);
            assert_eq!(p.with(param, v).unwrap(), p);
        }
        assert_eq!(p.with(SweepParameter::Size, 50.0).unwrap().reservoir.size, 50);
        assert!(p.with(SweepParameter::Size, 50.5).is_err());
        assert!(p.with(SweepParameter::SigmaK, -0.1).is_err());
        assert!("rho".parse::<SweepParameter>().is_err());
    }

    #[test]
    fn grid_corners() {
        let g = GridPoint::all();
        let a = g[0];
        assert_eq!((a.label, a.regularization, a.spectral_radius, a.input_scaling), ('A', 1e-4, 0.1, 0.05));
        assert_eq!(g[7].label, 'H');
        for (i, p) in g.iter().enumerate() {
            assert_eq!(p.index(), i);
            assert_eq!(p.spectral_radius == 2.0, "CDGH".contains(p.label));
        }
        let mut corners: Vec<_> = g
            .iter()
            .map(|p| (p.regularization.to_bits(), p.spectral_radius.to_bits(), p.input_scaling.to_bits()))
            .collect();
        corners.sort();
        corners.dedup();
        assert_eq!(corners.len(), 8);
    }

    #[test]
    fn extrapolation_flags() {
        let base = ExperimentParams::default();
        let s = SweepSpec {
            parameter: SweepParameter::SpectralRadius,
            values: vec![0.1, 0.4, 2.0, 3.0],
        };
        assert_eq!(s.extrapolated(Task::ParameterError, &base), vec![3.0]);
        let beta = SweepSpec {
            parameter: SweepParameter::Regularization,
            values: vec![1e-6, 1e-8],
        };
        assert_eq!(beta.extrapolated(Task::ParameterError, &base), vec![1e-8]);
        assert!(beta.extrapolated(Task::ResidualPhysics, &base).is_empty());
    }
}
