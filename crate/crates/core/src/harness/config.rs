use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::{ConstrainedConfig, Strategy, TrainConfig};
use crate::env::{EnvConfig, HighwayConfig, RewardConfig, RewardMode, OBS_DIM, N_ACTIONS};
use crate::error::{Error, Result};
use crate::neural::DEFAULT_HIDDEN;
use crate::safety::{SafetyConfig, SafetyMode};
use crate::sim::{RoadConfig, TrafficConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub hidden: Vec<usize>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            hidden: DEFAULT_HIDDEN.to_vec(),
        }
    }
}

impl NetworkConfig {
    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![OBS_DIM];
        d.extend(&self.hidden);
        d.push(N_ACTIONS);
        d
    }
}

/// Reward section as written in the file; the mode defaults per strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardSection {
    pub b: f64,
    pub c: f64,
    pub mode: Option<RewardMode>,
}

impl Default for RewardSection {
    fn default() -> Self {
        let r = RewardConfig::default();
        Self { b: r.b, c: r.c, mode: None }
    }
}

/// Safety section as written in the file; the mode defaults per strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SafetySection {
    pub mode: Option<SafetyMode>,
    pub horizon: f64,
    pub psi_max_other: f64,
    pub eps_den: f64,
    pub margin: f64,
}

impl Default for SafetySection {
    fn default() -> Self {
        let s = SafetyConfig::<f64>::default();
        Self {
            mode: None,
            horizon: s.horizon,
            psi_max_other: s.psi_max_other,
            eps_den: s.eps_den,
            margin: s.margin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentFile {
    pub strategy: Strategy,
    /// Name used in comparison outputs; defaults to the strategy name.
    pub label: Option<String>,
    pub seeds: Vec<u64>,
    pub out_dir: Option<PathBuf>,
    pub train: TrainConfig,
    pub network: NetworkConfig,
    pub reward: RewardSection,
    pub safety: SafetySection,
    pub constrained: ConstrainedConfig,
    pub road: RoadConfig<f64>,
    pub traffic: TrafficConfig<f64>,
    pub env: EnvConfig,
}

impl Default for ExperimentFile {
    fn default() -> Self {
        Self {
            strategy: Strategy::RobustQmask,
            label: None,
            seeds: vec![0],
            out_dir: None,
            train: TrainConfig::default(),
            network: NetworkConfig::default(),
            reward: RewardSection::default(),
            safety: SafetySection::default(),
            constrained: ConstrainedConfig::default(),
            road: RoadConfig::default(),
            traffic: TrafficConfig::default(),
            env: EnvConfig::default(),
        }
    }
}

/// Validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub strategy: Strategy,
    pub label: String,
    pub seeds: Vec<u64>,
    pub out_dir: Option<PathBuf>,
    pub train: TrainConfig,
    pub network: NetworkConfig,
    pub reward: RewardConfig,
    /// Parameters of the safety check; `mode` matches the strategy (basic for
    /// strategies that do not consult a mask).
    pub safety: SafetyConfig<f64>,
    pub constrained: ConstrainedConfig,
    pub road: RoadConfig<f64>,
    pub traffic: TrafficConfig<f64>,
    pub env: EnvConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentFile::default().resolve().expect("defaults are valid")
    }
}

impl ExperimentFile {
    pub fn resolve(self) -> Result<ExperimentConfig> {
        let strategy = self.strategy;
        let reward_mode = strategy.reward_mode();
        if let Some(mode) = self.reward.mode {
            if mode != reward_mode {
                return Err(Error::config(
                    "reward.mode",
                    format!("strategy {strategy} uses the {reward_mode:?} reward, got {mode:?}"),
                ));
            }
        }
        let safety_mode = match (strategy.safety_mode(), self.safety.mode) {
            (Some(want), Some(got)) if want != got => {
                return Err(Error::config(
                    "safety.mode",
                    format!("strategy {strategy} requires the {want:?} mask, got {got:?}"),
                ));
            }
            (None, Some(got)) => {
                return Err(Error::config(
                    "safety.mode",
                    format!("strategy {strategy} does not use a safety mask, got {got:?}"),
                ));
            }
            (Some(want), _) => want,
            (None, None) => SafetyMode::Basic,
        };
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "at least one seed is required"));
        }
        if self.network.hidden.is_empty() || self.network.hidden.contains(&0) {
            return Err(Error::config("network.hidden", "layer widths must be positive"));
        }
        let label = self.label.unwrap_or_else(|| strategy.name().to_string());
        if label.is_empty() || label.contains(['/', '\\']) {
            return Err(Error::config("label", format!("invalid label `{label}`")));
        }
        let cfg = ExperimentConfig {
            strategy,
            label,
            seeds: self.seeds,
            out_dir: self.out_dir,
            train: self.train,
            network: self.network,
            reward: RewardConfig {
                b: self.reward.b,
                c: self.reward.c,
                mode: reward_mode,
            },
            safety: SafetyConfig {
                mode: safety_mode,
                horizon: self.safety.horizon,
                psi_max_other: self.safety.psi_max_other,
                eps_den: self.safety.eps_den,
                margin: self.safety.margin,
            },
            constrained: self.constrained,
            road: self.road,
            traffic: self.traffic,
            env: self.env,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        self.safety.validate()?;
        self.constrained.validate()?;
        self.highway().validate()
    }

    pub fn highway(&self) -> HighwayConfig {
        HighwayConfig {
            road: self.road,
            traffic: self.traffic,
            env: self.env,
            reward: self.reward,
        }
    }

    /// Whether two experiments run in the same world.
    pub fn same_environment(&self, other: &ExperimentConfig) -> bool {
        self.road == other.road && self.traffic == other.traffic && self.env == other.env
    }
}

/// Parses TOML text. Unknown keys and invalid values are reported with their
/// key path.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| Error::config("<root>", e.to_string().trim().to_string()))?;
    let file: ExperimentFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "<root>".to_string() } else { path };
        Error::config(path, first_line(&e.into_inner().to_string()))
    })?;
    file.resolve()
}

fn first_line(msg: &str) -> String {
    // toml messages carry a source excerpt after the summary line
    msg.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with("TOML parse error") && !l.trim_start().starts_with('|'))
        .map(str::trim)
        .find(|l| !l.chars().next().is_some_and(|c| c.is_ascii_digit()))
        .unwrap_or(msg)
        .to_string()
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}
