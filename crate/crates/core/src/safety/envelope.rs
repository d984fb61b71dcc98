use crate::scalar::Scalar;

use super::SafetyConfig;

/// Constant-acceleration position at time `t`. Motion stops once the speed
/// reaches zero; vehicles never move backward.
pub fn predict_position<T: Scalar>(p0: T, v: T, a: T, t: T) -> T {
    let t = t.max(T::zero());
    let v_end = v + a * t;
    if v_end < T::zero() && a < T::zero() {
        let t_stop = v / -a;
        return p0 + v * t_stop * T::half();
    }
    p0 + v * t + T::half() * a * t * t
}

/// Speed at time `t` under constant acceleration, floored at zero.
pub fn predict_speed<T: Scalar>(v: T, a: T, t: T) -> T {
    (v + a * t.max(T::zero())).max(T::zero())
}

/// Required longitudinal buffer between the ego and another vehicle, from the
/// squared speed difference over the difference of their braking capabilities.
/// The denominator is floored at `eps_den`; the result is never below `margin`.
pub fn safe_distance<T: Scalar>(v_other: T, v_ego: T, a_max_other: T, a_max_ego: T, cfg: &SafetyConfig<T>) -> T {
    let dv = v_other - v_ego;
    let den = (a_max_other.abs() - a_max_ego.abs()).max(cfg.eps_den);
    dv * dv / (T::two() * den) + cfg.margin
}

/// Longitudinal interval of a lane the ego may occupy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeSpace<T> {
    pub lane: usize,
    pub lower: T,
    pub upper: T,
    pub empty: bool,
}

impl<T: Scalar> FreeSpace<T> {
    pub fn new(lane: usize, lower: T, upper: T) -> Self {
        FreeSpace {
            lane,
            lower,
            upper,
            empty: !(lower < upper),
        }
    }

    /// Strict containment; an empty interval contains nothing.
    pub fn contains(&self, x: T) -> bool {
        !self.empty && self.lower < x && x < self.upper
    }

    /// Signed distance from `x` to the nearer bound (negative outside).
    pub fn clearance(&self, x: T) -> T {
        (x - self.lower).min(self.upper - x)
    }

    pub fn length(&self) -> T {
        if self.empty {
            T::zero()
        } else {
            self.upper - self.lower
        }
    }
}

/// A leader or follower position together with the buffer it demands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound<T> {
    pub position: T,
    pub safe_distance: T,
}

/// `(P_f + P_safe_f, P_l - P_safe_l)`. Missing neighbors leave the interval open
/// up to the sensing range around `ego_x`.
pub fn free_space<T: Scalar>(
    lane: usize,
    ego_x: T,
    leader: Option<Bound<T>>,
    follower: Option<Bound<T>>,
    sensing_range: T,
) -> FreeSpace<T> {
    let upper = leader.map_or(ego_x + sensing_range, |b| b.position - b.safe_distance);
    let lower = follower.map_or(ego_x - sensing_range, |b| b.position + b.safe_distance);
    FreeSpace::new(lane, lower, upper)
}
