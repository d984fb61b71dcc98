use std::fmt::Write as _;

use super::{free_space, predict_position, predict_speed, safe_distance, worst_case_merge_set, Bound, FreeSpace};
use super::{SafetyConfig, SafetyMode, VirtualNeighbor};
use crate::env::{admissible_actions, ActionSet, EgoController, EnvConfig, MetaAction, N_ACTIONS};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sim::{occupies, RoadConfig, Scene, VehicleState};

/// A vehicle constraining one lane, with its role fixed by its position at t = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneNeighbor<T> {
    pub id: u32,
    pub lane: usize,
    pub x: T,
    pub v: T,
    pub a_max: T,
    pub length: T,
    pub leader: bool,
    /// The constraint applies from this time on (0 for real occupants).
    pub active_from: T,
    pub is_virtual: bool,
}

/// Position bound imposed by `n` on the ego's center at time `t`: an upper bound
/// for a leader, a lower bound for a follower.
///
/// The neighbor may either brake or accelerate at its limit. Because the
/// required buffer grows with the squared speed difference, either extreme can
/// be the binding one, so the tighter of the two is returned.
pub fn envelope_bound<T: Scalar>(n: &LaneNeighbor<T>, t: T, ego: &VehicleState<T>, cfg: &SafetyConfig<T>) -> T {
    let half_lengths = (n.length + ego.length) * T::half();
    let mut tightest: Option<T> = None;
    for a in [-n.a_max, n.a_max] {
        let x = predict_position(n.x, n.v, a, t);
        let v = predict_speed(n.v, a, t);
        let buffer = half_lengths + safe_distance(v, ego.v, n.a_max, ego.a_max, cfg);
        let bound = if n.leader { x - buffer } else { x + buffer };
        tightest = Some(match tightest {
            None => bound,
            Some(b) if n.leader => b.min(bound),
            Some(b) => b.max(bound),
        });
    }
    tightest.unwrap_or(n.x)
}

/// Outcome of checking one meta-action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionCheck<T> {
    pub admissible: bool,
    pub safe: bool,
    /// Smallest signed distance to any bound over the checked instants.
    pub clearance: T,
    /// Smallest distance to a leader bound (negative means penetration).
    pub leader_clearance: T,
    pub follower_clearance: T,
}

impl<T: Scalar> ActionCheck<T> {
    fn inadmissible() -> Self {
        ActionCheck {
            admissible: false,
            safe: false,
            clearance: T::neg_infinity(),
            leader_clearance: T::neg_infinity(),
            follower_clearance: T::neg_infinity(),
        }
    }

    pub fn leader_violation(&self) -> T {
        (-self.leader_clearance).max(T::zero())
    }

    pub fn follower_violation(&self) -> T {
        (-self.follower_clearance).max(T::zero())
    }
}

/// Checks a predicted ego path `(t, state)` against the neighbors of every lane
/// in `lanes` plus any lane the ego overlaps at that instant. Clearances are
/// capped at `cap`.
pub fn evaluate_path<T: Scalar>(
    path: &[(T, VehicleState<T>)],
    lanes: &[usize],
    neighbors: &[LaneNeighbor<T>],
    road: &RoadConfig<T>,
    cfg: &SafetyConfig<T>,
    cap: T,
) -> ActionCheck<T> {
    let mut leader_clearance = cap;
    let mut follower_clearance = cap;
    for (t, ego) in path {
        for n in neighbors {
            if *t < n.active_from {
                continue;
            }
            if !lanes.contains(&n.lane) && !occupies(ego, n.lane, road) {
                continue;
            }
            let bound = envelope_bound(n, *t, ego, cfg);
            if n.leader {
                leader_clearance = leader_clearance.min(bound - ego.x);
            } else {
                follower_clearance = follower_clearance.min(ego.x - bound);
            }
        }
    }
    let clearance = leader_clearance.min(follower_clearance);
    ActionCheck {
        admissible: true,
        safe: clearance > T::zero(),
        clearance,
        leader_clearance,
        follower_clearance,
    }
}

/// Real occupants of every lane within the sensing range.
pub fn lane_neighbors<T: Scalar>(scene: &Scene<T>, sensing_range: T) -> Vec<LaneNeighbor<T>> {
    let ego = scene.ego();
    let mut out = Vec::new();
    for other in scene.vehicles().iter().skip(1).map(|v| &v.state) {
        if (other.x - ego.x).abs() > sensing_range {
            continue;
        }
        for lane in 0..scene.road.n_lanes {
            if occupies(other, lane, &scene.road) {
                out.push(LaneNeighbor {
                    id: other.id,
                    lane,
                    x: other.x,
                    v: other.v,
                    a_max: other.a_max,
                    length: other.length,
                    leader: other.x >= ego.x,
                    active_from: T::zero(),
                    is_virtual: false,
                });
            }
        }
    }
    out
}

fn virtual_lane_neighbors<T: Scalar>(scene: &Scene<T>, merges: &[VirtualNeighbor<T>]) -> Vec<LaneNeighbor<T>> {
    let ego = scene.ego();
    merges
        .iter()
        .filter_map(|m| {
            let src = scene.vehicles().iter().find(|v| v.state.id == m.source_id)?.state;
            Some(LaneNeighbor {
                id: m.source_id,
                lane: m.lane,
                x: m.x,
                v: m.v,
                a_max: src.a_max,
                length: src.length,
                leader: m.x >= ego.x,
                active_from: m.entry_time,
                is_virtual: true,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SafetyMask<T> {
    pub mode: SafetyMode,
    pub admissible: ActionSet,
    /// Actions that passed the check, before the fallback rule.
    pub raw_safe: ActionSet,
    /// Final mask; never empty.
    pub safe: ActionSet,
    /// Action forced safe when nothing passed.
    pub fallback: Option<MetaAction>,
    pub checks: [ActionCheck<T>; N_ACTIONS],
    /// Free space of every lane at the current instant.
    pub free_spaces: Vec<FreeSpace<T>>,
    pub virtual_neighbors: Vec<VirtualNeighbor<T>>,
}

impl<T: Scalar> SafetyMask<T> {
    pub fn is_safe(&self, a: MetaAction) -> bool {
        self.safe.contains(a)
    }

    /// Human-readable listing of the mask and per-lane free space.
    pub fn report(&self) -> String {
        let mode = match self.mode {
            SafetyMode::Basic => "basic",
            SafetyMode::Robust => "robust",
        };
        let mut s = format!("mode {mode}\naction,admissible,safe,clearance\n");
        for a in MetaAction::ALL {
            let c = &self.checks[a.index()];
            let _ = writeln!(s, "{},{},{},{:.3}", a, c.admissible, self.safe.contains(a), c.clearance);
        }
        if let Some(a) = self.fallback {
            let _ = writeln!(s, "fallback {a}");
        }
        s.push_str("lane,lower,upper,empty\n");
        for f in &self.free_spaces {
            let _ = writeln!(s, "{},{:.3},{:.3},{}", f.lane, f.lower, f.upper, f.empty);
        }
        if !self.virtual_neighbors.is_empty() {
            s.push_str("virtual,source,lane,x,entry_time\n");
            for v in &self.virtual_neighbors {
                let _ = writeln!(s, "virtual,{},{},{:.3},{:.3}", v.source_id, v.lane, v.x, v.entry_time);
            }
        }
        s
    }
}

fn argmax_clearance(checks: &[ActionCheck<f64>; N_ACTIONS], among: &ActionSet) -> Option<MetaAction> {
    let mut best: Option<(MetaAction, f64)> = None;
    for a in among.iter() {
        let c = checks[a.index()].clearance;
        if best.is_none_or(|(_, b)| c > b) {
            best = Some((a, c));
        }
    }
    best.map(|(a, _)| a)
}

fn check_all(
    scene: &Scene<f64>,
    env: &EnvConfig,
    cfg: &SafetyConfig<f64>,
    admissible: &ActionSet,
    neighbors: &[LaneNeighbor<f64>],
) -> Result<[ActionCheck<f64>; N_ACTIONS]> {
    let ego = scene.ego();
    let road = &scene.road;
    let steps = (cfg.horizon / env.dt).round().max(1.0) as usize;
    let mut checks = [ActionCheck::inadmissible(); N_ACTIONS];
    for a in admissible.iter() {
        let ctl = EgoController::for_state(ego, road, a, env);
        let lanes = [ego.lane, road.lane_of(road.lane_center(ego.lane) + lane_shift(a) * road.lane_width)];
        let path: Vec<(f64, VehicleState<f64>)> = ctl
            .rollout(ego, road, steps)?
            .into_iter()
            .enumerate()
            .map(|(k, s)| ((k + 1) as f64 * env.dt, s))
            .collect();
        checks[a.index()] = evaluate_path(&path, &lanes, neighbors, road, cfg, env.sensing_range);
    }
    Ok(checks)
}

fn lane_shift(a: MetaAction) -> f64 {
    match a {
        MetaAction::LaneLeft => 1.0,
        MetaAction::LaneRight => -1.0,
        _ => 0.0,
    }
}

fn resolve(checks: &[ActionCheck<f64>; N_ACTIONS], admissible: &ActionSet) -> ActionSet {
    let mut set = ActionSet::empty();
    for a in admissible.iter() {
        if checks[a.index()].safe {
            set.insert(a);
        }
    }
    set
}

/// Marks each admissible meta-action safe iff the ego's predicted path over the
/// horizon stays inside the free space of every lane it uses, at every
/// micro-step after the decision, under worst-case neighbor behavior.
///
/// When nothing passes, the admissible action with the largest clearance is
/// marked safe. In robust mode the fallback is drawn from the basic-safe actions
/// whenever there are any, so the robust mask is always a subset of the basic one.
pub fn mask_actions(scene: &Scene<f64>, env: &EnvConfig, cfg: &SafetyConfig<f64>) -> Result<SafetyMask<f64>> {
    let ego = *scene.ego();
    if scene.collision().involves(ego.id) {
        return Err(Error::SceneColliding);
    }
    let admissible = admissible_actions(scene, env);
    let neighbors = lane_neighbors(scene, env.sensing_range);
    let basic = check_all(scene, env, cfg, &admissible, &neighbors)?;
    let basic_safe = resolve(&basic, &admissible);
    let free_spaces = current_free_spaces(scene, &neighbors, env.sensing_range, cfg);

    let (checks, raw_safe, fallback, virtual_neighbors) = match cfg.mode {
        SafetyMode::Basic => {
            let fallback = if basic_safe.is_empty() {
                argmax_clearance(&basic, &admissible)
            } else {
                None
            };
            (basic, basic_safe, fallback, Vec::new())
        }
        SafetyMode::Robust => {
            let lanes: Vec<usize> = (0..scene.road.n_lanes).collect();
            let merges = worst_case_merge_set(scene, &lanes, env.sensing_range, cfg);
            let mut all = neighbors.clone();
            all.extend(virtual_lane_neighbors(scene, &merges));
            let robust = check_all(scene, env, cfg, &admissible, &all)?;
            let raw = resolve(&robust, &admissible).intersect(&basic_safe);
            let fallback = if !raw.is_empty() {
                None
            } else if !basic_safe.is_empty() {
                argmax_clearance(&robust, &basic_safe)
            } else {
                argmax_clearance(&basic, &admissible)
            };
            (robust, raw, fallback, merges)
        }
    };
    let mut safe = raw_safe;
    if let Some(a) = fallback {
        safe.insert(a);
    }
    Ok(SafetyMask {
        mode: cfg.mode,
        admissible,
        raw_safe,
        safe,
        fallback,
        checks,
        free_spaces,
        virtual_neighbors,
    })
}

fn current_free_spaces(
    scene: &Scene<f64>,
    neighbors: &[LaneNeighbor<f64>],
    sensing_range: f64,
    cfg: &SafetyConfig<f64>,
) -> Vec<FreeSpace<f64>> {
    let ego = scene.ego();
    (0..scene.road.n_lanes)
        .map(|lane| {
            let mut leader: Option<Bound<f64>> = None;
            let mut follower: Option<Bound<f64>> = None;
            for n in neighbors.iter().filter(|n| n.lane == lane) {
                let half = (n.length + ego.length) * 0.5;
                let b = Bound {
                    position: if n.leader { n.x - half } else { n.x + half },
                    safe_distance: safe_distance(n.v, ego.v, n.a_max, ego.a_max, cfg),
                };
                if n.leader {
                    let tighter = leader.is_none_or(|l| b.position - b.safe_distance < l.position - l.safe_distance);
                    if tighter {
                        leader = Some(b);
                    }
                } else {
                    let tighter =
                        follower.is_none_or(|f| b.position + b.safe_distance > f.position + f.safe_distance);
                    if tighter {
                        follower = Some(b);
                    }
                }
            }
            free_space(lane, ego.x, leader, follower, sensing_range)
        })
        .collect()
}
