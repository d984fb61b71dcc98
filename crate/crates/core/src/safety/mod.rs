//! Kinematic safe-space computation and action masking.

mod envelope;
mod mask;
mod merge;
#[cfg(test)]
mod tests;

use serde::{Deserialize, Serialize};

pub use envelope::{free_space, predict_position, predict_speed, safe_distance, Bound, FreeSpace};
pub use mask::{
    envelope_bound, evaluate_path, lane_neighbors, mask_actions, ActionCheck, LaneNeighbor, SafetyMask,
};
pub use merge::{lateral_reach, side_gap, worst_case_merge_set, VirtualNeighbor};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SafetyMode {
    Basic,
    /// Basic checks plus worst-case merges of neighboring vehicles.
    Robust,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SafetyConfig<T> {
    pub mode: SafetyMode,
    /// Lookahead of the worst-case prediction (s).
    pub horizon: T,
    /// Worst-case heading other vehicles may adopt (rad).
    pub psi_max_other: T,
    /// Floor of the safe-distance denominator (m/s^2).
    pub eps_den: T,
    /// Additive buffer (m).
    pub margin: T,
}

impl<T: Scalar> Default for SafetyConfig<T> {
    fn default() -> Self {
        Self {
            mode: SafetyMode::Basic,
            horizon: T::one(),
            psi_max_other: T::lit(0.26),
            eps_den: T::lit(0.1),
            margin: T::two(),
        }
    }
}

impl<T: Scalar> SafetyConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > T::zero()) {
            return Err(Error::config("safety.horizon", format!("must be positive, got {}", self.horizon)));
        }
        if !(self.eps_den.is_finite() && self.eps_den > T::zero()) {
            return Err(Error::config("safety.eps_den", format!("must be positive, got {}", self.eps_den)));
        }
        if !(self.margin.is_finite() && self.margin >= T::zero()) {
            return Err(Error::config("safety.margin", format!("must be non-negative, got {}", self.margin)));
        }
        if !(self.psi_max_other.is_finite() && self.psi_max_other >= T::zero() && self.psi_max_other < T::FRAC_PI_2()) {
            return Err(Error::config(
                "safety.psi_max_other",
                format!("must lie in [0, pi/2), got {}", self.psi_max_other),
            ));
        }
        Ok(())
    }

    pub fn with_mode(self, mode: SafetyMode) -> Self {
        Self { mode, ..self }
    }
}
