use std::fmt;

use serde::{Deserialize, Serialize};

use super::EnvConfig;
use crate::error::{Error, Result};
use crate::sim::{heading_rate_toward, Controls, RoadConfig, Scene, VehicleState};

pub const N_ACTIONS: usize = 5;

/// High-level tactical decision taken once per policy period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MetaAction {
    Idle = 0,
    LaneRight = 1,
    LaneLeft = 2,
    Faster = 3,
    Slower = 4,
}

impl MetaAction {
    pub const ALL: [MetaAction; N_ACTIONS] = [
        MetaAction::Idle,
        MetaAction::LaneRight,
        MetaAction::LaneLeft,
        MetaAction::Faster,
        MetaAction::Slower,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            MetaAction::Idle => "IDLE",
            MetaAction::LaneRight => "LANE_RIGHT",
            MetaAction::LaneLeft => "LANE_LEFT",
            MetaAction::Faster => "FASTER",
            MetaAction::Slower => "SLOWER",
        }
    }

    pub fn is_lane_change(self) -> bool {
        matches!(self, MetaAction::LaneLeft | MetaAction::LaneRight)
    }
}

impl fmt::Display for MetaAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Subset of the five meta-actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ActionSet(pub [bool; N_ACTIONS]);

impl ActionSet {
    pub fn full() -> Self {
        ActionSet([true; N_ACTIONS])
    }

    pub fn empty() -> Self {
        ActionSet([false; N_ACTIONS])
    }

    pub fn from_actions(actions: &[MetaAction]) -> Self {
        let mut set = Self::empty();
        for a in actions {
            set.insert(*a);
        }
        set
    }

    pub fn contains(&self, a: MetaAction) -> bool {
        self.0[a.index()]
    }

    pub fn insert(&mut self, a: MetaAction) {
        self.0[a.index()] = true;
    }

    pub fn remove(&mut self, a: MetaAction) {
        self.0[a.index()] = false;
    }

    pub fn len(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn intersect(&self, other: &ActionSet) -> ActionSet {
        let mut out = *self;
        for (o, b) in out.0.iter_mut().zip(other.0) {
            *o &= b;
        }
        out
    }

    pub fn is_subset(&self, other: &ActionSet) -> bool {
        self.0.iter().zip(other.0).all(|(a, b)| !*a || b)
    }

    pub fn iter(&self) -> impl Iterator<Item = MetaAction> + '_ {
        MetaAction::ALL.into_iter().filter(|a| self.contains(*a))
    }
}

/// Actions that respect the speed bounds and road edges. IDLE is always present.
pub fn admissible_actions(scene: &Scene<f64>, cfg: &EnvConfig) -> ActionSet {
    let ego = scene.ego();
    let road = &scene.road;
    let mut set = ActionSet::full();
    if ego.v + cfg.delta_v > road.v_max + 1e-9 {
        set.remove(MetaAction::Faster);
    }
    if ego.v - cfg.delta_v < road.v_min - 1e-9 {
        set.remove(MetaAction::Slower);
    }
    if ego.lane == 0 {
        set.remove(MetaAction::LaneRight);
    }
    if ego.lane + 1 >= road.n_lanes {
        set.remove(MetaAction::LaneLeft);
    }
    set
}

/// Closed-loop low-level controller realizing one meta-action over a policy period.
///
/// Speed tracks a target with a saturated proportional law. Lane changes follow a
/// lateral reference whose velocity ramps in and out over one micro-step each, so
/// the displacement of one lane width completes exactly at the end of the period.
#[derive(Debug, Clone)]
pub struct EgoController {
    pub action: MetaAction,
    pub v_target: f64,
    y_start: f64,
    y_target: f64,
    steps_total: usize,
    step: usize,
    dt: f64,
    speed_gain: f64,
    lateral_gain: f64,
}

impl EgoController {
    pub fn new(scene: &Scene<f64>, action: MetaAction, cfg: &EnvConfig) -> Result<Self> {
        if !admissible_actions(scene, cfg).contains(action) {
            return Err(Error::InadmissibleAction {
                action: action.to_string(),
            });
        }
        Ok(Self::for_state(scene.ego(), &scene.road, action, cfg))
    }

    /// Builds the controller without the admissibility check.
    pub fn for_state(ego: &VehicleState<f64>, road: &RoadConfig<f64>, action: MetaAction, cfg: &EnvConfig) -> Self {
        let v_target = match action {
            MetaAction::Faster => (ego.v + cfg.delta_v).min(road.v_max),
            MetaAction::Slower => (ego.v - cfg.delta_v).max(road.v_min),
            _ => ego.v,
        };
        let target_lane = match action {
            MetaAction::LaneLeft => (ego.lane + 1).min(road.n_lanes - 1),
            MetaAction::LaneRight => ego.lane.saturating_sub(1),
            _ => ego.lane,
        };
        EgoController {
            action,
            v_target,
            y_start: ego.y,
            y_target: road.lane_center(target_lane),
            steps_total: cfg.micro_steps(),
            step: 0,
            dt: cfg.dt,
            speed_gain: cfg.speed_gain,
            lateral_gain: cfg.lateral_gain,
        }
    }

    /// Lateral reference after `k` micro-steps of a lane change.
    fn lane_change_reference(&self, k: usize) -> f64 {
        let n = self.steps_total;
        if k >= n || n < 2 {
            return self.y_target;
        }
        // trapezoid weights 0.5, 1, ..., 1, 0.5 sum to n - 1
        let covered = if k == 0 { 0.0 } else { k as f64 - 0.5 };
        self.y_start + (self.y_target - self.y_start) * covered / (n as f64 - 1.0)
    }

    pub fn controls(&mut self, ego: &VehicleState<f64>, road: &RoadConfig<f64>) -> Controls<f64> {
        let dt = self.dt;
        let accel = (self.speed_gain * (self.v_target - ego.v)).clamp(-ego.a_max, ego.a_max);
        let y_ref = if self.action.is_lane_change() && self.step < self.steps_total {
            self.lane_change_reference(self.step + 1)
        } else {
            ego.y + (self.y_target - ego.y) * (self.lateral_gain * dt).min(1.0)
        };
        self.step += 1;
        Controls::new(accel, heading_rate_toward(ego, y_ref, dt, road.psi_max))
    }

    /// Ego-only rollout: the state after each of `steps` micro-steps (ego
    /// dynamics do not depend on other vehicles).
    pub fn rollout(mut self, ego: &VehicleState<f64>, road: &RoadConfig<f64>, steps: usize) -> Result<Vec<VehicleState<f64>>> {
        let mut state = *ego;
        let mut out = Vec::with_capacity(steps);
        for _ in 0..steps {
            let c = self.controls(&state, road);
            state = crate::sim::advance_vehicle(&state, c, self.dt, road)?;
            out.push(state);
        }
        Ok(out)
    }
}

/// Low-level controller for `a`, rejecting inadmissible actions.
pub fn apply_meta_action(scene: &Scene<f64>, a: MetaAction, cfg: &EnvConfig) -> Result<EgoController> {
    EgoController::new(scene, a, cfg)
}
