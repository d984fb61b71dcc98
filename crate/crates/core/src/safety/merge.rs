use crate::scalar::Scalar;
use crate::sim::{occupies, RoadConfig, Scene, VehicleState};

use super::SafetyConfig;

/// A real vehicle projected into a lane it could reach within the horizon
/// under worst-case heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirtualNeighbor<T> {
    pub source_id: u32,
    pub lane: usize,
    pub x: T,
    pub v: T,
    /// Lateral distance between the footprint edge and the lane boundary.
    pub side_gap: T,
    /// Earliest time the vehicle could cross into the lane.
    pub entry_time: T,
}

/// Lateral gap from the vehicle's footprint to `lane`, zero if it already overlaps.
pub fn side_gap<T: Scalar>(s: &VehicleState<T>, lane: usize, road: &RoadConfig<T>) -> T {
    let (right, left) = road.lane_bounds(lane);
    let half = s.width * T::half();
    if s.y + half <= right {
        right - (s.y + half)
    } else if s.y - half >= left {
        (s.y - half) - left
    } else {
        T::zero()
    }
}

/// Worst-case lateral reach over the horizon.
pub fn lateral_reach<T: Scalar>(v: T, cfg: &SafetyConfig<T>) -> T {
    (v * cfg.psi_max_other.sin() * cfg.horizon).abs()
}

/// Virtual neighbors for the given lanes: every non-ego vehicle within the
/// sensing range that does not occupy a lane but could swerve into it within
/// the horizon.
pub fn worst_case_merge_set<T: Scalar>(
    scene: &Scene<T>,
    lanes: &[usize],
    sensing_range: T,
    cfg: &SafetyConfig<T>,
) -> Vec<VirtualNeighbor<T>> {
    let ego = scene.ego();
    let lateral_speed = cfg.psi_max_other.sin();
    let mut out = Vec::new();
    for &lane in lanes {
        for other in scene.vehicles().iter().skip(1).map(|v| &v.state) {
            if (other.x - ego.x).abs() > sensing_range || occupies(other, lane, &scene.road) {
                continue;
            }
            let gap = side_gap(other, lane, &scene.road);
            let reach = lateral_reach(other.v, cfg);
            if reach > gap && reach > T::zero() {
                out.push(VirtualNeighbor {
                    source_id: other.id,
                    lane,
                    x: other.x,
                    v: other.v,
                    side_gap: gap,
                    entry_time: gap / (other.v * lateral_speed).abs(),
                });
            }
        }
    }
    out
}
