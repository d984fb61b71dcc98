//! Intelligent Driver Model car-following law for ambient traffic.

use serde::{Deserialize, Serialize};

use super::vehicle::VehicleState;
use crate::error::{Error, Result};
use crate::scalar::{clamp, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdmParams<T> {
    /// Desired speed (m/s).
    pub v0: T,
    /// Desired time headway (s).
    pub time_headway: T,
    /// Jam distance (m).
    pub s0: T,
    /// Maximum acceleration (m/s²).
    pub a: T,
    /// Comfortable deceleration (m/s²).
    pub b_comf: T,
    pub delta: T,
}

impl<T: Scalar> Default for IdmParams<T> {
    fn default() -> Self {
        Self {
            v0: T::lit(25.0),
            time_headway: T::lit(1.5),
            s0: T::lit(2.0),
            a: T::lit(3.0),
            b_comf: T::lit(5.0),
            delta: T::lit(4.0),
        }
    }
}

impl<T: Scalar> IdmParams<T> {
    pub fn validate(&self) -> Result<()> {
        let all_positive = [self.v0, self.time_headway, self.s0, self.a, self.b_comf]
            .iter()
            .all(|p| p.is_finite() && *p > T::zero());
        if !all_positive {
            return Err(Error::validation("IDM parameters must be positive"));
        }
        if !(self.delta >= T::one()) {
            return Err(Error::validation("IDM exponent must be at least 1"));
        }
        Ok(())
    }

    /// Dynamic desired gap `s*` for speed `v` and approach rate `dv = v - v_leader`.
    pub fn desired_gap(&self, v: T, dv: T) -> T {
        let dynamic = v * self.time_headway + v * dv / (T::two() * (self.a * self.b_comf).sqrt());
        self.s0 + dynamic.max(T::zero())
    }

    /// Gap at which a follower at speed `v` behind a leader at the same speed is unaccelerated.
    pub fn equilibrium_gap(&self, v: T) -> Option<T> {
        let free = T::one() - (v / self.v0).powf(self.delta);
        (free > T::zero()).then(|| self.desired_gap(v, T::zero()) / free.sqrt())
    }
}

/// Bumper-to-bumper distance between a follower and its leader.
pub fn bumper_gap<T: Scalar>(follower: &VehicleState<T>, leader: &VehicleState<T>) -> T {
    leader.x - follower.x - (leader.length + follower.length) * T::half()
}

/// IDM acceleration for `me`, clamped to its physical limit.
///
/// A non-positive gap means contact is imminent and returns full braking.
pub fn idm_acceleration<T: Scalar>(
    me: &VehicleState<T>,
    leader: Option<&VehicleState<T>>,
    p: &IdmParams<T>,
) -> T {
    let free_term = (me.v / p.v0).powf(p.delta);
    let interaction = match leader {
        None => T::zero(),
        Some(l) => {
            let gap = bumper_gap(me, l);
            if gap <= T::zero() {
                return -me.a_max;
            }
            let s_star = p.desired_gap(me.v, me.v - l.v);
            (s_star / gap).powi(2)
        }
    };
    clamp(p.a * (T::one() - free_term - interaction), -me.a_max, me.a_max)
}
