//! Experiment configuration.
//!
//! A config names one estimator, one process source, the sampling budget,
//! estimator parameters, a repetition count, and the base seed. The JSON
//! form mirrors the field names; command-line flags override file values.

use std::path::PathBuf;

use serde::Deserialize;

use mrp_eval::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Td,
    Ml,
    Mcmi,
    Lstd,
    Lsmcmi,
}

impl EstimatorKind {
    pub fn label(self) -> &'static str {
        match self {
            EstimatorKind::Td => "td",
            EstimatorKind::Ml => "ml",
            EstimatorKind::Mcmi => "mcmi",
            EstimatorKind::Lstd => "lstd",
            EstimatorKind::Lsmcmi => "lsmcmi",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "td" => Ok(EstimatorKind::Td),
            "ml" => Ok(EstimatorKind::Ml),
            "mcmi" => Ok(EstimatorKind::Mcmi),
            "lstd" => Ok(EstimatorKind::Lstd),
            "lsmcmi" => Ok(EstimatorKind::Lsmcmi),
            other => Err(Error::InvalidArgument(format!("unknown estimator {other:?}"))),
        }
    }

    pub fn uses_lambda(self) -> bool {
        matches!(self, EstimatorKind::Td | EstimatorKind::Lstd)
    }

    pub fn uses_alpha(self) -> bool {
        matches!(self, EstimatorKind::Td)
    }

    pub fn uses_features(self) -> bool {
        matches!(self, EstimatorKind::Lstd | EstimatorKind::Lsmcmi)
    }
}

/// Where the process under evaluation comes from.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MrpSource {
    /// Load from a process JSON file.
    File { path: PathBuf },
    /// Generate a random explicit process per repetition.
    Generator {
        n: usize,
        /// Successors per state; defaults to `n` (fully dense rows).
        out_degree: Option<usize>,
        #[serde(default)]
        reward_min: f64,
        #[serde(default = "one")]
        reward_max: f64,
    },
    /// Generate a procedural process with a closed reachable subset.
    Procedural { n: usize, reachable: usize, out_degree: usize },
}

fn one() -> f64 {
    1.0
}

/// How feature rows are produced for the least-squares estimators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureSpec {
    Identity,
    Gaussian { k: usize },
    File(PathBuf),
}

impl FeatureSpec {
    /// Accepts `identity`, `gaussian:K`, or a file path.
    pub fn parse(text: &str) -> Result<Self> {
        if text == "identity" {
            return Ok(FeatureSpec::Identity);
        }
        if let Some(k_text) = text.strip_prefix("gaussian:") {
            let k: usize = k_text
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad feature dimension {k_text:?}")))?;
            if k == 0 {
                return Err(Error::InvalidArgument("feature dimension must be positive".into()));
            }
            return Ok(FeatureSpec::Gaussian { k });
        }
        Ok(FeatureSpec::File(PathBuf::from(text)))
    }
}

impl<'de> Deserialize<'de> for FeatureSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        FeatureSpec::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// A swept parameter and its value list.
#[derive(Debug, Clone, Deserialize)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Steps,
    Gamma,
    N,
    ProceduralN,
}

/// One experiment description. The defaults mirror the benchmark protocol:
/// `lambda = 0.9`, `alpha = 0.5`, `gamma = 0.8`, `steps = 20000`, twenty
/// repetitions.
#[derive(Debug, Clone, Deserialize)]
pub struct ExperimentConfig {
    pub estimator: EstimatorKind,
    pub source: MrpSource,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Overrides the gamma stored in a process file when set explicitly.
    #[serde(default)]
    pub gamma_override: bool,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_steps")]
    pub steps: u64,
    #[serde(default)]
    pub features: Option<FeatureSpec>,
    #[serde(default = "default_reps")]
    pub reps: u64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub sweep: Option<SweepAxis>,
}

fn default_gamma() -> f64 {
    0.8
}
fn default_lambda() -> f64 {
    0.9
}
fn default_alpha() -> f64 {
    0.5
}
fn default_steps() -> u64 {
    20_000
}
fn default_reps() -> u64 {
    20
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
        }
        if self.steps == 0 {
            return Err(Error::InvalidArgument("steps must be at least 1".into()));
        }
        if self.estimator.uses_features() && self.features.is_none() {
            return Err(Error::InvalidArgument(format!(
                "estimator {} needs --features",
                self.estimator.label()
            )));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(Error::InvalidArgument("sweep has no values".into()));
            }
            match sweep.param {
                SweepParam::N => {
                    if !matches!(self.source, MrpSource::Generator { .. }) {
                        return Err(Error::InvalidArgument(
                            "sweeping n requires a generator source".into(),
                        ));
                    }
                }
                SweepParam::ProceduralN => {
                    if !matches!(self.source, MrpSource::Procedural { .. }) {
                        return Err(Error::InvalidArgument(
                            "sweeping procedural_n requires a procedural source".into(),
                        ));
                    }
                }
                SweepParam::Steps | SweepParam::Gamma => {}
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Apply one sweep value, returning the concrete per-run config.
    pub fn with_sweep_value(&self, param: SweepParam, value: f64) -> Result<Self> {
        let mut config = self.clone();
        config.sweep = None;
        match param {
            SweepParam::Steps => {
                config.steps = value as u64;
                if config.steps == 0 {
                    return Err(Error::InvalidArgument("swept steps must be positive".into()));
                }
            }
            SweepParam::Gamma => {
                config.gamma = value;
                config.gamma_override = true;
            }
            SweepParam::N => match &mut config.source {
                MrpSource::Generator { n, .. } => *n = value as usize,
                _ => unreachable!("validated"),
            },
            SweepParam::ProceduralN => match &mut config.source {
                MrpSource::Procedural { n, .. } => *n = value as usize,
                _ => unreachable!("validated"),
            },
        }
        Ok(config)
    }
}
