use serde::{Deserialize, Serialize};

use crate::env::RewardMode;
use crate::error::{Error, Result};
use crate::safety::SafetyMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Plain DQN with a collision penalty in the reward.
    Traditional,
    /// Lagrangian penalties on free-space violations.
    Constrained,
    /// Unsafe actions filtered out of selection.
    Qmask,
    /// Worst-case masking plus regression of unsafe pairs toward low values.
    RobustQmask,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Traditional, Strategy::Constrained, Strategy::Qmask, Strategy::RobustQmask];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Traditional => "traditional",
            Strategy::Constrained => "constrained",
            Strategy::Qmask => "qmask",
            Strategy::RobustQmask => "robust_qmask",
        }
    }

    pub fn reward_mode(self) -> RewardMode {
        match self {
            Strategy::Traditional => RewardMode::Traditional,
            _ => RewardMode::SpeedOnly,
        }
    }

    /// Safety check the strategy consults each step, if any.
    pub fn safety_mode(self) -> Option<SafetyMode> {
        match self {
            Strategy::Traditional => None,
            Strategy::Constrained | Strategy::Qmask => Some(SafetyMode::Basic),
            Strategy::RobustQmask => Some(SafetyMode::Robust),
        }
    }

    /// Whether the mask restricts which actions may be executed.
    pub fn is_masked(self) -> bool {
        matches!(self, Strategy::Qmask | Strategy::RobustQmask)
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Linear decay from `start` to `end` over `horizon` episodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub horizon: usize,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self {
            start: 1.0,
            end: 0.05,
            horizon: 150,
        }
    }
}

pub fn epsilon_at(schedule: &EpsilonSchedule, episode: usize) -> f64 {
    if schedule.horizon == 0 || episode >= schedule.horizon {
        return schedule.end;
    }
    let frac = episode as f64 / schedule.horizon as f64;
    schedule.start + (schedule.end - schedule.start) * frac
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub gamma: f64,
    pub alpha: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub episodes: usize,
    pub eval_episodes: usize,
    /// Gradient iterations run at the end of every episode.
    pub iterations_per_update: usize,
    pub epsilon: EpsilonSchedule,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            alpha: 0.01,
            batch_size: 50,
            buffer_capacity: 50,
            episodes: 200,
            eval_episodes: 20,
            iterations_per_update: 150,
            epsilon: EpsilonSchedule::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::config("train.gamma", format!("must lie in [0, 1], got {}", self.gamma)));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::config("train.alpha", format!("must be positive, got {}", self.alpha)));
        }
        if self.buffer_capacity == 0 {
            return Err(Error::config("train.buffer_capacity", "must be at least 1"));
        }
        if self.batch_size == 0 || self.batch_size > self.buffer_capacity {
            return Err(Error::config(
                "train.batch_size",
                format!("must lie in [1, buffer_capacity = {}], got {}", self.buffer_capacity, self.batch_size),
            ));
        }
        let e = &self.epsilon;
        for (path, v) in [("train.epsilon.start", e.start), ("train.epsilon.end", e.end)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(path, format!("must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}
