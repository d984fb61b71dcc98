#![allow(dead_code)]

use highway_core::env::{admissible_actions, EgoController, EnvConfig, MetaAction};
use highway_core::safety::SafetyConfig;
use highway_core::sim::{advance_vehicle, RoadConfig, Scene, TrafficConfig, VehicleState};

/// Seeded scene with some history: traffic evolves for a seed-dependent time
/// before the snapshot is taken.
pub fn sample_scene(seed: u64) -> Scene<f64> {
    let mut scene = Scene::generate(RoadConfig::default(), TrafficConfig::default(), seed).unwrap();
    for _ in 0..(seed % 97) {
        scene.step(None, 0.1).unwrap();
    }
    scene
}

fn overlaps_lane(y: f64, width: f64, lane: usize, road: &RoadConfig<f64>) -> bool {
    let right = lane as f64 * road.lane_width;
    let left = right + road.lane_width;
    y + width / 2.0 > right && y - width / 2.0 < left
}

/// Ego path sampled every `fine` seconds: the controller runs at the
/// environment step, and positions inside a step follow the same kinematics
/// evaluated at the finer instants.
pub fn fine_ego_path(ego: &VehicleState<f64>, road: &RoadConfig<f64>, a: MetaAction, env: &EnvConfig, horizon: f64, fine: f64) -> Vec<(f64, f64, f64, f64)> {
    let mut ctl = EgoController::for_state(ego, road, a, env);
    let steps = (horizon / env.dt).round() as usize;
    let sub = (env.dt / fine).round() as usize;
    let mut out = Vec::new();
    let mut s = *ego;
    for k in 0..steps {
        let c = ctl.controls(&s, road);
        let next = advance_vehicle(&s, c, env.dt, road).unwrap();
        let (sin, cos) = next.psi.sin_cos();
        for j in 1..=sub {
            let tau = j as f64 * fine;
            let t = k as f64 * env.dt + tau;
            let v_end = s.v + c.accel * tau;
            let (travel, v) = if v_end < 0.0 {
                let ts = s.v / -c.accel;
                (s.v * ts / 2.0, 0.0)
            } else {
                (s.v * tau + 0.5 * c.accel * tau * tau, v_end)
            };
            out.push((t, s.x + travel * cos, s.y + s.v * sin * tau, v));
        }
        s = next;
    }
    out
}

/// Result of the exhaustive check of one action.
#[derive(Debug, Clone, Copy)]
pub struct OracleVerdict {
    pub safe: bool,
    /// Smallest signed clearance over every combination and instant.
    pub clearance: f64,
}

/// Simulates the action against every combination of extreme behaviors (full
/// brake / full throttle) of the vehicles occupying the lanes involved, at
/// `fine` resolution, and checks the safe-distance bounds at each instant.
pub fn oracle_action(scene: &Scene<f64>, a: MetaAction, env: &EnvConfig, cfg: &SafetyConfig<f64>, fine: f64) -> OracleVerdict {
    let road = &scene.road;
    let ego = *scene.ego();
    let path = fine_ego_path(&ego, road, a, env, cfg.horizon, fine);
    let target = match a {
        MetaAction::LaneLeft => ego.lane + 1,
        MetaAction::LaneRight => ego.lane - 1,
        _ => ego.lane,
    };
    let lane_used = |lane: usize, y: f64| lane == ego.lane || lane == target || overlaps_lane(y, ego.width, lane, road);

    struct N {
        lanes: Vec<usize>,
        x: f64,
        v: f64,
        a_max: f64,
        length: f64,
        leader: bool,
    }
    let neighbors: Vec<N> = scene
        .vehicles()
        .iter()
        .skip(1)
        .map(|v| v.state)
        .filter(|s| (s.x - ego.x).abs() <= env.sensing_range)
        .map(|s| N {
            lanes: (0..road.n_lanes).filter(|&l| overlaps_lane(s.y, s.width, l, road)).collect(),
            x: s.x,
            v: s.v,
            a_max: s.a_max,
            length: s.length,
            leader: s.x >= ego.x,
        })
        .filter(|n| n.lanes.iter().any(|&l| path.iter().any(|p| lane_used(l, p.2))))
        .collect();

    // neighbor trajectories under both extremes, integrated at the fine step
    let traj = |n: &N, accel: f64| -> Vec<(f64, f64)> {
        let (mut x, mut v) = (n.x, n.v);
        let mut out = Vec::with_capacity(path.len());
        for _ in 0..path.len() {
            let v_end = v + accel * fine;
            if v_end < 0.0 {
                x += v * (v / -accel) / 2.0;
                v = 0.0;
            } else {
                x += v * fine + 0.5 * accel * fine * fine;
                v = v_end;
            }
            out.push((x, v));
        }
        out
    };
    let trajectories: Vec<[Vec<(f64, f64)>; 2]> = neighbors.iter().map(|n| [traj(n, -n.a_max), traj(n, n.a_max)]).collect();

    let p_safe = |v_o: f64, v_e: f64, a_o: f64| {
        let den = (a_o.abs() - ego.a_max.abs()).max(cfg.eps_den);
        (v_o - v_e).powi(2) / (2.0 * den) + cfg.margin
    };

    let mut worst = f64::INFINITY;
    let n = neighbors.len();
    for combo in 0u64..(1u64 << n) {
        for (i, p) in path.iter().enumerate() {
            let (_, xe, ye, ve) = *p;
            for (j, nb) in neighbors.iter().enumerate() {
                if !nb.lanes.iter().any(|&l| lane_used(l, ye)) {
                    continue;
                }
                let (xo, vo) = trajectories[j][((combo >> j) & 1) as usize][i];
                let buffer = (nb.length + ego.length) / 2.0 + p_safe(vo, ve, nb.a_max);
                let c = if nb.leader { xo - buffer - xe } else { xe - xo - buffer };
                worst = worst.min(c);
            }
        }
    }
    OracleVerdict {
        safe: worst > 0.0,
        clearance: worst,
    }
}

pub fn oracle_mask(scene: &Scene<f64>, env: &EnvConfig, cfg: &SafetyConfig<f64>, fine: f64) -> Vec<(MetaAction, OracleVerdict)> {
    admissible_actions(scene, env).iter().map(|a| (a, oracle_action(scene, a, env, cfg, fine))).collect()
}
