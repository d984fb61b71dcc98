//! Kinematic highway world: road geometry, IDM ambient traffic, collision
//! detection and time stepping.

mod collision;
mod idm;
mod road;
mod scene;
mod snapshot;
mod vehicle;

pub use collision::{detect_collision, rectangles_overlap, CollisionReport};
pub use idm::{bumper_gap, idm_acceleration, IdmParams};
pub use road::RoadConfig;
pub use scene::{heading_rate_toward, occupies, Driver, LaneChange, Scene, TrafficConfig, Vehicle};
pub use snapshot::{SceneSnapshot, SnapshotRow, HEADER as SNAPSHOT_HEADER};
pub use vehicle::{advance_vehicle, Controls, VehicleState};

#[cfg(test)]
mod tests;
