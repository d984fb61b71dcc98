use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::RoadConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    /// Normalized speed minus a collision penalty.
    Traditional,
    /// Normalized speed only.
    SpeedOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    /// Speed coefficient.
    pub b: f64,
    /// Collision penalty coefficient.
    pub c: f64,
    pub mode: RewardMode,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            b: 1.0,
            c: 10.0,
            mode: RewardMode::Traditional,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.b.is_finite() && self.b > 0.0) {
            return Err(Error::config("reward.b", format!("must be positive, got {}", self.b)));
        }
        if !(self.c.is_finite() && self.c >= 0.0) {
            return Err(Error::config("reward.c", format!("must be non-negative, got {}", self.c)));
        }
        Ok(())
    }

    pub fn reward(&self, ego_v: f64, collided: bool, road: &RoadConfig<f64>) -> f64 {
        match self.mode {
            RewardMode::Traditional => reward_traditional(ego_v, collided, self, road),
            RewardMode::SpeedOnly => reward_speed(ego_v, self, road),
        }
    }
}

fn speed_fraction(v: f64, road: &RoadConfig<f64>) -> f64 {
    ((v - road.v_min) / (road.v_max - road.v_min)).clamp(0.0, 1.0)
}

pub fn reward_traditional(ego_v: f64, collided: bool, cfg: &RewardConfig, road: &RoadConfig<f64>) -> f64 {
    let penalty = if collided { cfg.c } else { 0.0 };
    cfg.b * speed_fraction(ego_v, road) - penalty
}

pub fn reward_speed(ego_v: f64, cfg: &RewardConfig, road: &RoadConfig<f64>) -> f64 {
    cfg.b * speed_fraction(ego_v, road)
}
