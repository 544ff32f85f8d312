use std::fmt;
use std::path::{Path, PathBuf};

use hybrid_esn::dynamics::{IntegratorConfig, RegimeName, Task};
use hybrid_esn::evaluation::{ModelKind, SpanLayout};
use hybrid_esn::experiments::{ExperimentParams, RunManifest, SweepSpec, GRID_REGIMES};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;
pub const SEED_ENV: &str = "HYBRID_ESN_SEED";

/// Experiment configuration file. Every key except `schema_version` may be
/// omitted and falls back to the baseline settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default = "default_task")]
    pub task: Task,
    /// Every regime of the task when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regimes: Option<Vec<RegimeName>>,
    #[serde(default)]
    pub model: ExperimentParams,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub layout: SpanLayout,
    #[serde(default = "default_instantiations")]
    pub n_instantiations: usize,
    /// Task default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_realizations: Option<usize>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_arms")]
    pub arms: Vec<ModelKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Worker threads; all cores when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

fn default_task() -> Task {
    Task::ParameterError
}

fn default_instantiations() -> usize {
    40
}

fn default_epsilon() -> f64 {
    0.4
}

fn default_arms() -> Vec<ModelKind> {
    ModelKind::ALL.to_vec()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            task: default_task(),
            regimes: None,
            model: ExperimentParams::default(),
            integrator: IntegratorConfig::default(),
            layout: SpanLayout::default(),
            n_instantiations: default_instantiations(),
            n_realizations: None,
            epsilon: default_epsilon(),
            arms: default_arms(),
            sweep: None,
            seed: 0,
            output_dir: default_output_dir(),
            threads: None,
        }
    }
}

/// Problems with the configuration or command line; exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            if e.line() > 0 {
                ConfigError(format!("{origin}:{}:{}: {e}", e.line(), e.column()))
            } else {
                ConfigError(format!("{origin}: {e}"))
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// `path` when given, otherwise the defaults.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self, ConfigError> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.arms.is_empty() {
            return Err(ConfigError("arms must list at least one of standard, hybrid, ode".into()));
        }
        if self.threads == Some(0) {
            return Err(ConfigError("threads must be >= 1".into()));
        }
        self.model.validate().map_err(|e| ConfigError(e.to_string()))?;
        if let Some(s) = &self.sweep {
            s.validate().map_err(|e| ConfigError(e.to_string()))?;
        }
        self.manifest(self.seed).validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(())
    }

    pub fn regimes(&self) -> Vec<RegimeName> {
        self.regimes.clone().unwrap_or_else(|| self.task.regimes().to_vec())
    }

    pub fn manifest(&self, seed: u64) -> RunManifest {
        RunManifest {
            task: self.task,
            regimes: self.regimes(),
            n_instantiations: self.n_instantiations,
            n_realizations: self.n_realizations.unwrap_or(self.task.default_realizations()),
            layout: self.layout,
            integrator: self.integrator,
            master_seed: seed,
            epsilon: self.epsilon,
        }
    }

    /// Grid searches skip regimes outside the grid unless listed explicitly.
    pub fn grid_manifest(&self, seed: u64) -> RunManifest {
        let mut m = self.manifest(seed);
        if self.regimes.is_none() {
            m.regimes.retain(|r| GRID_REGIMES.contains(r));
        }
        m
    }

    /// `--seed`, then the environment, then the config file. Returns the seed
    /// and where it came from.
    pub fn resolve_seed(&self, flag: Option<u64>) -> Result<(u64, &'static str), ConfigError> {
        if let Some(s) = flag {
            return Ok((s, "flag"));
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map(|s| (s, "env"))
                .map_err(|_| ConfigError(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
            Err(_) => Ok((self.seed, "config")),
        }
    }

    /// Checks a regime given on the command line against the task.
    pub fn parse_regime(&self, name: &str) -> Result<RegimeName, ConfigError> {
        let valid = self.task.regimes().iter().map(|r| r.as_str()).collect::<Vec<_>>().join(", ");
        let regime: RegimeName = name
            .parse()
            .map_err(|_| ConfigError(format!("unknown regime '{name}'; valid regimes for {}: {valid}", self.task)))?;
        if !self.task.regimes().contains(&regime) {
            return Err(ConfigError(format!(
                "regime '{name}' does not belong to task {}; valid regimes: {valid}",
                self.task
            )));
        }
        Ok(regime)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hybrid_esn::experiments::SweepParameter;

    #[test]
    fn minimal_config_gets_baselines() {
        let cfg = ExperimentConfig::parse(r#"{"schema_version": 1}"#, "test").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        let r = &cfg.model.reservoir;
        assert_eq!(r.size, 300);
        assert_eq!(r.spectral_radius, 0.4);
        assert_eq!(r.input_scaling, 0.15);
        assert_eq!(r.regularization, 1e-6);
        assert_eq!(r.knowledge_ratio, 0.5);
        assert_eq!(cfg.model.sigma_k, 0.05);
        assert_eq!(cfg.model.sigma_omega, 0.05);
        assert_eq!(cfg.layout.total_steps(), 62000);
        assert_eq!(cfg.manifest(0).n_realizations, 3);
    }

    #[test]
    fn schema_version_required_and_unknown_keys_rejected() {
        assert!(ExperimentConfig::parse("{}", "t").unwrap_err().0.contains("schema_version"));
        let e = ExperimentConfig::parse(r#"{"schema_version": 1, "spectral_radius": 0.3}"#, "t").unwrap_err();
        assert!(e.0.contains("unknown field"), "{e}");
        let e = ExperimentConfig::parse(r#"{"schema_version": 1, "model": {"reservoir": {"sise": 3}}}"#, "t")
            .unwrap_err();
        assert!(e.0.contains("sise"), "{e}");
        assert!(ExperimentConfig::parse(r#"{"schema_version": 2}"#, "t").is_err());
    }

    #[test]
    fn malformed_json_reports_position() {
        let e = ExperimentConfig::parse("{\n  \"schema_version\": 1,\n  \"task\" \"x\"\n}", "cfg.json").unwrap_err();
        assert!(e.0.starts_with("cfg.json:3:10:"), "{e}");
    }

    #[test]
    fn round_trip_is_idempotent() {
        let mut cfg = ExperimentConfig {
            task: Task::ResidualPhysics,
            regimes: Some(vec![RegimeName::HeteroclinicCycles]),
            n_realizations: Some(2),
            sweep: Some(SweepSpec {
                parameter: SweepParameter::Regularization,
                values: vec![1e-8, 0.1, 0.5],
            }),
            threads: Some(3),
            seed: u64::MAX,
            ..ExperimentConfig::default()
        };
        cfg.model.reservoir.spectral_radius = 0.123456789012345;
        for c in [ExperimentConfig::default(), cfg] {
            let once = c.to_json();
            let back = ExperimentConfig::parse(&once, "t").unwrap();
            assert_eq!(back, c);
            assert_eq!(back.to_json(), once);
        }
    }

    #[test]
    fn regime_errors_name_valid_regimes() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.parse_regime("synchrony").unwrap(), RegimeName::Synchrony);
        let e = cfg.parse_regime("chaos").unwrap_err();
        assert!(e.0.contains("synchrony, asynchrony, multi_frequency"), "{e}");
        assert!(cfg.parse_regime("heteroclinic_cycles").is_err());
    }

    #[test]
    fn grid_manifest_drops_asynchrony_by_default() {
        let cfg = ExperimentConfig {
            task: Task::ResidualPhysics,
            ..ExperimentConfig::default()
        };
        assert_eq!(cfg.grid_manifest(1).regimes, GRID_REGIMES.to_vec());
    }
}
