//! Highway lane-change decision making with deep Q-learning and kinematic
//! safety masking.
//!
//! The numeric core (`sim`, `safety`, `neural`) is generic over [`Scalar`]
//! (`f32` or `f64`); the episodic layers (`env`, `agents`, `harness`) run in
//! `f64`. The aliases below name the `f64` instantiations.

pub mod agents;
pub mod env;
pub mod error;
pub mod harness;
pub mod neural;
pub mod records;
pub mod safety;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Scalar type used by the environment, agents and harness.
pub type Real = f64;

pub type VehicleState = sim::VehicleState<Real>;
pub type Scene = sim::Scene<Real>;
pub type RoadConfig = sim::RoadConfig<Real>;
pub type TrafficConfig = sim::TrafficConfig<Real>;
pub type IdmParams = sim::IdmParams<Real>;

pub type HighwayConfig = env::HighwayConfig;
pub type HighwayEnv = env::HighwayEnv;
pub type SafetyConfig = safety::SafetyConfig<Real>;
pub type SafetyMask = safety::SafetyMask<Real>;
pub type QNetwork = neural::Mlp<Real>;
