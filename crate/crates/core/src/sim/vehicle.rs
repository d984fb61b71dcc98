use serde::{Deserialize, Serialize};

use super::road::RoadConfig;
use crate::error::{Error, Result};
use crate::scalar::{clamp, Scalar};

/// Pose, speed and physical limits of one vehicle. Positions refer to the body center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState<T> {
    pub id: u32,
    /// Longitudinal position (m).
    pub x: T,
    /// Lateral position (m), 0 at the right road edge.
    pub y: T,
    /// Speed along the heading (m/s), never negative.
    pub v: T,
    /// Heading relative to the road axis (rad), positive to the left.
    pub psi: T,
    pub lane: usize,
    pub length: T,
    pub width: T,
    /// Maximum absolute acceleration (m/s²).
    pub a_max: T,
    pub is_ego: bool,
}

/// Low-level inputs applied over one micro-step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Controls<T> {
    pub accel: T,
    pub heading_rate: T,
}

impl<T: Scalar> Controls<T> {
    pub fn new(accel: T, heading_rate: T) -> Self {
        Self { accel, heading_rate }
    }

    pub fn zero() -> Self {
        Self {
            accel: T::zero(),
            heading_rate: T::zero(),
        }
    }
}

impl<T: Scalar> VehicleState<T> {
    pub fn vx(&self) -> T {
        self.v * self.psi.cos()
    }

    pub fn vy(&self) -> T {
        self.v * self.psi.sin()
    }

    pub fn is_finite(&self) -> bool {
        [self.x, self.y, self.v, self.psi, self.length, self.width, self.a_max]
            .iter()
            .all(|c| c.is_finite())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::validation(format!("vehicle {} has non-finite state", self.id)));
        }
        if self.v < T::zero() {
            return Err(Error::validation(format!("vehicle {} has negative speed", self.id)));
        }
        if self.a_max <= T::zero() || self.length <= T::zero() || self.width <= T::zero() {
            return Err(Error::validation(format!(
                "vehicle {} needs positive a_max and footprint",
                self.id
            )));
        }
        Ok(())
    }

    /// Corners of the oriented footprint, counter-clockwise from rear-right.
    pub fn corners(&self) -> [(T, T); 4] {
        let (s, c) = self.psi.sin_cos();
        let hl = self.length * T::half();
        let hw = self.width * T::half();
        let local = [(-hl, -hw), (hl, -hw), (hl, hw), (-hl, hw)];
        local.map(|(lx, ly)| (self.x + lx * c - ly * s, self.y + lx * s + ly * c))
    }
}

/// Advances one vehicle by `dt` under constant acceleration and heading rate.
///
/// The heading is updated first and the clamped heading drives the position
/// update. Braking never reverses the vehicle: if the speed reaches zero inside
/// the step, motion stops at that instant.
pub fn advance_vehicle<T: Scalar>(
    s: &VehicleState<T>,
    controls: Controls<T>,
    dt: T,
    road: &RoadConfig<T>,
) -> Result<VehicleState<T>> {
    if !(dt.is_finite() && dt > T::zero()) {
        return Err(Error::validation(format!("time step must be positive, got {dt}")));
    }
    if !(controls.accel.is_finite() && controls.heading_rate.is_finite()) || !s.is_finite() {
        return Err(Error::validation(format!("non-finite input for vehicle {}", s.id)));
    }
    let tol = T::lit(1e-9) * (T::one() + s.a_max);
    if controls.accel.abs() > s.a_max + tol {
        return Err(Error::validation(format!(
            "acceleration {} exceeds limit {} for vehicle {}",
            controls.accel, s.a_max, s.id
        )));
    }

    let psi = clamp(s.psi + controls.heading_rate * dt, -road.psi_max, road.psi_max);
    let (sin, cos) = psi.sin_cos();

    let v_end = s.v + controls.accel * dt;
    let (travel, v_next) = if v_end < T::zero() {
        // stops inside the step
        let t_stop = s.v / -controls.accel;
        (s.v * t_stop * T::half(), T::zero())
    } else {
        (s.v * dt + T::half() * controls.accel * dt * dt, v_end)
    };

    let mut next = *s;
    next.psi = psi;
    next.x = s.x + travel * cos;
    next.y = s.y + s.v * sin * dt;
    next.v = v_next;
    next.lane = road.lane_of(next.y);
    Ok(next)
}
