use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{clamp, Scalar};

/// Straight multi-lane road. Lane 0 is the rightmost lane; `y` grows to the left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoadConfig<T> {
    pub n_lanes: usize,
    pub lane_width: T,
    /// Nominal segment length (m). Traffic is recycled around the ego, so this
    /// only bounds how far the window may extend.
    pub length: T,
    pub v_min: T,
    pub v_max: T,
    /// Heading bound applied to every vehicle (rad).
    pub psi_max: T,
}

impl<T: Scalar> Default for RoadConfig<T> {
    fn default() -> Self {
        Self {
            n_lanes: 4,
            lane_width: T::lit(4.0),
            length: T::lit(10_000.0),
            v_min: T::lit(20.0),
            v_max: T::lit(30.0),
            psi_max: T::lit(0.26),
        }
    }
}

impl<T: Scalar> RoadConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n_lanes < 2 {
            return Err(Error::config("road.n_lanes", "at least two lanes are required"));
        }
        for (name, value) in [
            ("road.lane_width", self.lane_width),
            ("road.length", self.length),
            ("road.psi_max", self.psi_max),
        ] {
            if !(value.is_finite() && value > T::zero()) {
                return Err(Error::config(name, format!("must be positive, got {value}")));
            }
        }
        if !(self.v_min.is_finite() && self.v_max.is_finite() && self.v_min >= T::zero()) {
            return Err(Error::config("road.v_min", "speed bounds must be finite and non-negative"));
        }
        if self.v_min >= self.v_max {
            return Err(Error::config(
                "road.v_max",
                format!("v_min ({}) must be below v_max ({})", self.v_min, self.v_max),
            ));
        }
        Ok(())
    }

    pub fn lane_center(&self, lane: usize) -> T {
        (T::from_usize(lane).unwrap() + T::half()) * self.lane_width
    }

    /// Lane containing lateral position `y`, clamped to the road.
    pub fn lane_of(&self, y: T) -> usize {
        let raw = (y / self.lane_width).floor();
        let max = T::from_usize(self.n_lanes - 1).unwrap();
        clamp(raw, T::zero(), max).to_usize().unwrap_or(0)
    }

    /// Lateral extent `[right, left]` of a lane.
    pub fn lane_bounds(&self, lane: usize) -> (T, T) {
        let right = T::from_usize(lane).unwrap() * self.lane_width;
        (right, right + self.lane_width)
    }

    pub fn width(&self) -> T {
        T::from_usize(self.n_lanes).unwrap() * self.lane_width
    }
}
