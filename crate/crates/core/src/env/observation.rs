use super::EnvConfig;
use crate::sim::Scene;

pub const N_SLOTS: usize = 4;
pub const SLOT_WIDTH: usize = 6;
pub const OBS_DIM: usize = N_SLOTS * SLOT_WIDTH + 2;

/// Network input: four neighbor slots `(dx, dy, dvx, dvy, psi, flag)` followed by
/// ego speed and heading, all in the road frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub raw: [f64; OBS_DIM],
    /// Positions over sensing range, velocities over `v_max`, angles over
    /// `psi_max`; flags unchanged; clipped to `[-1, 1]`.
    pub normalized: [f64; OBS_DIM],
}

impl Observation {
    pub fn flag(&self, slot: usize) -> bool {
        self.raw[slot * SLOT_WIDTH + 5] > 0.5
    }

    pub fn slot(&self, slot: usize) -> &[f64] {
        &self.raw[slot * SLOT_WIDTH..(slot + 1) * SLOT_WIDTH]
    }

    pub fn ego_speed(&self) -> f64 {
        self.raw[OBS_DIM - 2]
    }

    pub fn ego_heading(&self) -> f64 {
        self.raw[OBS_DIM - 1]
    }
}

pub fn build_observation(scene: &Scene<f64>, cfg: &EnvConfig) -> Observation {
    let ego = scene.ego();
    let mut raw = [0.0; OBS_DIM];
    let mut normalized = [0.0; OBS_DIM];
    let v_scale = scene.road.v_max;
    let psi_scale = scene.road.psi_max;
    let range = cfg.sensing_range;
    let norm = |x: f64, scale: f64| (x / scale).clamp(-1.0, 1.0);

    for (slot, (other, _dist)) in scene.nearest_neighbors(N_SLOTS, range).iter().enumerate() {
        let base = slot * SLOT_WIDTH;
        let values = [
            other.x - ego.x,
            other.y - ego.y,
            other.vx() - ego.vx(),
            other.vy() - ego.vy(),
            other.psi,
            1.0,
        ];
        let scales = [range, range, v_scale, v_scale, psi_scale, 1.0];
        for k in 0..SLOT_WIDTH {
            raw[base + k] = values[k];
            normalized[base + k] = norm(values[k], scales[k]);
        }
    }
    raw[OBS_DIM - 2] = ego.v;
    raw[OBS_DIM - 1] = ego.psi;
    normalized[OBS_DIM - 2] = norm(ego.v, v_scale);
    normalized[OBS_DIM - 1] = norm(ego.psi, psi_scale);
    Observation { raw, normalized }
}
