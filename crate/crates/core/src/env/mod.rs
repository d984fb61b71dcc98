//! Episodic MDP wrapper: meta-actions, observations, rewards and traces.

mod action;
mod observation;
mod reward;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use action::{admissible_actions, apply_meta_action, ActionSet, EgoController, MetaAction, N_ACTIONS};
pub use observation::{build_observation, Observation, N_SLOTS, OBS_DIM, SLOT_WIDTH};
pub use reward::{reward_speed, reward_traditional, RewardConfig, RewardMode};

use crate::error::{Error, Result};
use crate::records::{write_records, CsvRecord};
use crate::sim::{RoadConfig, Scene, TrafficConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    /// Seconds between meta-actions.
    pub policy_period: f64,
    /// Simulation micro-step.
    pub dt: f64,
    /// Episode horizon in seconds.
    pub episode_duration: f64,
    pub sensing_range: f64,
    /// Speed change requested by FASTER / SLOWER.
    pub delta_v: f64,
    /// Proportional gain of the ego speed tracker (1/s).
    pub speed_gain: f64,
    /// Lane keeping gain (1/s).
    pub lateral_gain: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            policy_period: 1.0,
            dt: 0.1,
            episode_duration: 40.0,
            sensing_range: 100.0,
            delta_v: 5.0,
            speed_gain: 5.0,
            lateral_gain: 1.0,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("env.policy_period", self.policy_period),
            ("env.dt", self.dt),
            ("env.episode_duration", self.episode_duration),
            ("env.sensing_range", self.sensing_range),
            ("env.delta_v", self.delta_v),
            ("env.speed_gain", self.speed_gain),
            ("env.lateral_gain", self.lateral_gain),
        ];
        for (path, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(path, format!("must be positive, got {v}")));
            }
        }
        let ratio = self.policy_period / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
            return Err(Error::config("env.dt", "must divide env.policy_period"));
        }
        let steps = self.episode_duration / self.policy_period;
        if (steps - steps.round()).abs() > 1e-9 {
            return Err(Error::config("env.episode_duration", "must be a multiple of env.policy_period"));
        }
        Ok(())
    }

    pub fn micro_steps(&self) -> usize {
        (self.policy_period / self.dt).round() as usize
    }

    pub fn max_steps(&self) -> usize {
        (self.episode_duration / self.policy_period).round() as usize
    }
}

/// Everything needed to build an environment.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HighwayConfig {
    pub road: RoadConfig<f64>,
    pub traffic: TrafficConfig<f64>,
    pub env: EnvConfig,
    pub reward: RewardConfig,
}

impl HighwayConfig {
    pub fn validate(&self) -> Result<()> {
        self.road.validate()?;
        self.traffic.validate()?;
        self.env.validate()?;
        self.reward.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    /// The ego collided during this policy period.
    pub collision: bool,
    /// Ambient-only collisions during this period (should stay zero).
    pub ambient_collisions: usize,
    pub ego_v: f64,
    pub ego_lane: usize,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub obs: Observation,
    pub reward: f64,
    pub terminal: bool,
    pub info: StepInfo,
}

/// One row of an episode trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub action: MetaAction,
    pub reward: f64,
    pub ego_v: f64,
    pub ego_lane: usize,
    pub collision: bool,
    pub terminal: bool,
}

impl CsvRecord for TraceRow {
    const HEADER: &'static [&'static str] = &["step", "action", "reward", "ego_v", "ego_lane", "collision", "terminal"];
}

pub fn write_trace_csv<W: Write>(rows: &[TraceRow], out: W) -> Result<()> {
    write_records(rows, out)
}

pub struct HighwayEnv {
    pub config: HighwayConfig,
    scene: Option<Scene<f64>>,
    steps: usize,
    terminal: bool,
}

impl HighwayEnv {
    pub fn new(config: HighwayConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            scene: None,
            steps: 0,
            terminal: false,
        })
    }

    pub fn reset(&mut self, seed: u64) -> Result<Observation> {
        let scene = Scene::generate(self.config.road, self.config.traffic, seed)?;
        let obs = build_observation(&scene, &self.config.env);
        self.scene = Some(scene);
        self.steps = 0;
        self.terminal = false;
        Ok(obs)
    }

    /// Replaces the current scene, e.g. with one loaded from a snapshot.
    pub fn reset_to(&mut self, scene: Scene<f64>) -> Observation {
        let obs = build_observation(&scene, &self.config.env);
        self.terminal = scene.collision().involves(scene.ego().id);
        self.scene = Some(scene);
        self.steps = 0;
        obs
    }

    pub fn scene(&self) -> Option<&Scene<f64>> {
        self.scene.as_ref()
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal
    }

    pub fn observation(&self) -> Result<Observation> {
        let scene = self.scene.as_ref().ok_or(Error::NotReset)?;
        Ok(build_observation(scene, &self.config.env))
    }

    pub fn admissible(&self) -> Result<ActionSet> {
        let scene = self.scene.as_ref().ok_or(Error::NotReset)?;
        Ok(admissible_actions(scene, &self.config.env))
    }

    /// Runs one policy period under meta-action `a`. The episode ends on an ego
    /// collision or when the horizon is reached.
    pub fn step(&mut self, a: MetaAction) -> Result<StepResult> {
        let cfg = self.config;
        let scene = self.scene.as_mut().ok_or(Error::NotReset)?;
        if self.terminal {
            return Err(Error::EpisodeTerminated);
        }
        let mut ctl = apply_meta_action(scene, a, &cfg.env)?;
        let ego_id = scene.ego().id;
        let mut collision = false;
        let mut ambient_collisions = 0;
        for _ in 0..cfg.env.micro_steps() {
            let c = ctl.controls(scene.ego(), &scene.road);
            let report = scene.step(Some(c), cfg.env.dt)?;
            if report.involves(ego_id) {
                collision = true;
                break;
            }
            ambient_collisions += report.pairs.len();
        }
        self.steps += 1;
        let ego = *scene.ego();
        let reward = cfg.reward.reward(ego.v, collision, &cfg.road);
        self.terminal = collision || self.steps >= cfg.env.max_steps();
        Ok(StepResult {
            obs: build_observation(scene, &cfg.env),
            reward,
            terminal: self.terminal,
            info: StepInfo {
                collision,
                ambient_collisions,
                ego_v: ego.v,
                ego_lane: ego.lane,
                t: scene.t,
            },
        })
    }
}
