use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::model::{BiHarmonicParams, KuramotoParams, Model};
use crate::error::{Error, Result};

/// Which ground-truth family a task uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Standard Kuramoto ground truth; the expert differs only by parameter error.
    ParameterError,
    /// Bi-harmonic ground truth; the expert is the mismatched standard model.
    ResidualPhysics,
}

impl Task {
    pub const ALL: [Task; 2] = [Task::ParameterError, Task::ResidualPhysics];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::ParameterError => "parameter_error",
            Task::ResidualPhysics => "residual_physics",
        }
    }

    pub fn family(self) -> ModelFamily {
        match self {
            Task::ParameterError => ModelFamily::Standard,
            Task::ResidualPhysics => ModelFamily::BiHarmonic,
        }
    }

    pub fn regimes(self) -> &'static [RegimeName] {
        use RegimeName::*;
        match self {
            Task::ParameterError => &[Synchrony, Asynchrony, MultiFrequency],
            Task::ResidualPhysics => &[Synchrony, Asynchrony, HeteroclinicCycles, PartialSynchrony],
        }
    }

    /// Ground-truth realizations per regime in the shared test procedure.
    pub fn default_realizations(self) -> usize {
        match self {
            Task::ParameterError => 3,
            Task::ResidualPhysics => 1,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Task::ParameterError => 0,
            Task::ResidualPhysics => 1,
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown task '{s}'; valid tasks: parameter_error, residual_physics"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeName {
    Synchrony,
    Asynchrony,
    MultiFrequency,
    HeteroclinicCycles,
    PartialSynchrony,
}

impl RegimeName {
    pub const ALL: [RegimeName; 5] = [
        RegimeName::Synchrony,
        RegimeName::Asynchrony,
        RegimeName::MultiFrequency,
        RegimeName::HeteroclinicCycles,
        RegimeName::PartialSynchrony,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RegimeName::Synchrony => "synchrony",
            RegimeName::Asynchrony => "asynchrony",
            RegimeName::MultiFrequency => "multi_frequency",
            RegimeName::HeteroclinicCycles => "heteroclinic_cycles",
            RegimeName::PartialSynchrony => "partial_synchrony",
        }
    }

    pub fn index(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for RegimeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegimeName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RegimeName::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| {
                let valid: Vec<_> = RegimeName::ALL.iter().map(|r| r.as_str()).collect();
                Error::InvalidParameter(format!(
                    "unknown regime '{s}'; valid regimes: {}",
                    valid.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Standard,
    #[serde(rename = "biharmonic")]
    BiHarmonic,
}

/// How natural frequencies are drawn for a regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum FrequencyLaw {
    Uniform { lo: f64, hi: f64 },
    /// Lorentzian centred at `mu` with half-width `width`.
    Cauchy { mu: f64, width: f64 },
    /// `N - 1` uniform draws on `(lo, hi)` and one fast oscillator
    /// `z (3 + w)`, `w ~ U(0, 1)`, `z = +-1` with equal probability.
    MultiFrequency { lo: f64, hi: f64 },
}

/// A named dynamical regime with its frequency law and coupling parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub name: RegimeName,
    pub family: ModelFamily,
    pub n_oscillators: usize,
    pub frequency_law: FrequencyLaw,
    pub coupling: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub second_harmonic_scale: f64,
}

impl RegimeSpec {
    /// Parameters of `name` for the given task.
    pub fn new(task: Task, name: RegimeName) -> Result<Self> {
        use RegimeName::*;
        let uniform = FrequencyLaw::Uniform { lo: -1.0, hi: 1.0 };
        let spec = match (task, name) {
            (Task::ParameterError, Synchrony) => Self::standard(name, uniform, 4.0),
            (Task::ParameterError, Asynchrony) => Self::standard(name, uniform, 1.0),
            (Task::ParameterError, MultiFrequency) => Self::standard(
                name,
                FrequencyLaw::MultiFrequency { lo: -1.0, hi: 1.0 },
                2.0,
            ),
            (Task::ResidualPhysics, Synchrony) => Self::biharmonic(name, 2.0 * PI),
            (Task::ResidualPhysics, Asynchrony) => Self::biharmonic(name, PI),
            (Task::ResidualPhysics, HeteroclinicCycles) => Self::biharmonic(name, 1.3),
            (Task::ResidualPhysics, PartialSynchrony) => Self::biharmonic(name, 1.5),
            _ => {
                let valid: Vec<_> = task.regimes().iter().map(|r| r.as_str()).collect();
                return Err(Error::InvalidParameter(format!(
                    "regime '{name}' is not defined for task {task}; valid regimes: {}",
                    valid.join(", ")
                )));
            }
        };
        Ok(spec)
    }

    fn standard(name: RegimeName, law: FrequencyLaw, coupling: f64) -> Self {
        Self {
            name,
            family: ModelFamily::Standard,
            n_oscillators: 5,
            frequency_law: law,
            coupling,
            gamma1: 0.0,
            gamma2: 0.0,
            second_harmonic_scale: 0.0,
        }
    }

    fn biharmonic(name: RegimeName, gamma1: f64) -> Self {
        Self {
            name,
            family: ModelFamily::BiHarmonic,
            n_oscillators: 10,
            frequency_law: FrequencyLaw::Cauchy { mu: 0.0, width: 0.01 },
            coupling: 1.0,
            gamma1,
            gamma2: PI,
            second_harmonic_scale: 0.2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_oscillators == 0 {
            return Err(Error::InvalidParameter("regime needs at least one oscillator".into()));
        }
        match self.frequency_law {
            FrequencyLaw::Uniform { lo, hi } | FrequencyLaw::MultiFrequency { lo, hi }
                if !(lo < hi) =>
            {
                Err(Error::InvalidParameter(format!("empty frequency interval ({lo}, {hi})")))
            }
            FrequencyLaw::Cauchy { width, .. } if !(width > 0.0) => Err(
                Error::InvalidParameter(format!("Cauchy width must be > 0, got {width}")),
            ),
            _ => Ok(()),
        }
    }

    /// Samples natural frequencies and returns the ground-truth model.
    pub fn sample_model<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Model> {
        let base = KuramotoParams::new(sample_frequencies(self, rng)?, self.coupling)?;
        Ok(match self.family {
            ModelFamily::Standard => Model::Standard(base),
            ModelFamily::BiHarmonic => Model::BiHarmonic(BiHarmonicParams::new(
                base,
                self.gamma1,
                self.gamma2,
                self.second_harmonic_scale,
            )?),
        })
    }
}

pub fn sample_frequencies<R: Rng + ?Sized>(regime: &RegimeSpec, rng: &mut R) -> Result<Vec<f64>> {
    regime.validate()?;
    let n = regime.n_oscillators;
    let omega = match regime.frequency_law {
        FrequencyLaw::Uniform { lo, hi } => (0..n).map(|_| rng.random_range(lo..hi)).collect(),
        FrequencyLaw::Cauchy { mu, width } => (0..n)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                mu + width * (PI * (u - 0.5)).tan()
            })
            .collect(),
        FrequencyLaw::MultiFrequency { lo, hi } => {
            let mut omega: Vec<f64> = (0..n - 1).map(|_| rng.random_range(lo..hi)).collect();
            let w: f64 = rng.random_range(0.0..1.0);
            let z = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            omega.push(z * (3.0 + w));
            omega
        }
    };
    Ok(omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn table_parameters() {
        let s = RegimeSpec::new(Task::ParameterError, RegimeName::Synchrony).unwrap();
        assert_eq!((s.n_oscillators, s.coupling), (5, 4.0));
        let a = RegimeSpec::new(Task::ParameterError, RegimeName::Asynchrony).unwrap();
        assert_eq!(a.coupling, 1.0);
        let m = RegimeSpec::new(Task::ParameterError, RegimeName::MultiFrequency).unwrap();
        assert_eq!(m.coupling, 2.0);
        let h = RegimeSpec::new(Task::ResidualPhysics, RegimeName::HeteroclinicCycles).unwrap();
        assert_eq!(h.n_oscillators, 10);
        assert_eq!((h.gamma1, h.gamma2, h.second_harmonic_scale), (1.3, PI, 0.2));
        assert_eq!(h.frequency_law, FrequencyLaw::Cauchy { mu: 0.0, width: 0.01 });
        let p = RegimeSpec::new(Task::ResidualPhysics, RegimeName::PartialSynchrony).unwrap();
        assert_eq!(p.gamma1, 1.5);
        let sy = RegimeSpec::new(Task::ResidualPhysics, RegimeName::Synchrony).unwrap();
        assert_eq!(sy.gamma1, 2.0 * PI);
        assert!(RegimeSpec::new(Task::ParameterError, RegimeName::HeteroclinicCycles).is_err());
        assert!(RegimeSpec::new(Task::ResidualPhysics, RegimeName::MultiFrequency).is_err());
    }

    #[test]
    fn regime_names_parse() {
        for r in RegimeName::ALL {
            assert_eq!(r.as_str().parse::<RegimeName>().unwrap(), r);
        }
        let err = "chaos".parse::<RegimeName>().unwrap_err().to_string();
        assert!(err.contains("heteroclinic_cycles"));
    }

    #[test]
    fn multi_frequency_fast_oscillator() {
        let spec = RegimeSpec::new(Task::ParameterError, RegimeName::MultiFrequency).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let mut signs = [0usize; 2];
        for _ in 0..2000 {
            let w = sample_frequencies(&spec, &mut rng).unwrap();
            assert_eq!(w.len(), 5);
            assert!((3.0..=4.0).contains(&w[4].abs()));
            assert!(w[..4].iter().all(|x| x.abs() < 1.0));
            signs[(w[4] > 0.0) as usize] += 1;
        }
        assert!(signs[0] > 800 && signs[1] > 800);
    }

    #[test]
    fn uniform_draws_in_open_interval() {
        let spec = RegimeSpec::new(Task::ParameterError, RegimeName::Synchrony).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        for _ in 0..2000 {
            let w = sample_frequencies(&spec, &mut rng).unwrap();
            assert!(w.iter().all(|x| *x > -1.0 && *x < 1.0));
        }
    }

    #[test]
    fn cauchy_median() {
        let mut spec = RegimeSpec::new(Task::ResidualPhysics, RegimeName::Synchrony).unwrap();
        spec.n_oscillators = 100_000;
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let mut w = sample_frequencies(&spec, &mut rng).unwrap();
        w.sort_by(f64::total_cmp);
        let median = 0.5 * (w[49_999] + w[50_000]);
        assert!(median.abs() < 0.002, "median {median}");
        // Interquartile range of a Cauchy law is twice its half-width.
        let iqr = w[75_000] - w[25_000];
        assert!((iqr - 0.02).abs() < 0.002, "iqr {iqr}");
    }
}
