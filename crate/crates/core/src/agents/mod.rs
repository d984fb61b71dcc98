//! Batch deep Q-learning with four safe-decision strategies.

mod config;
mod constrained;
mod learner;
mod policy;
mod replay;

pub use config::{epsilon_at, EpsilonSchedule, Strategy, TrainConfig};
pub use constrained::{constrained_shaped_reward, dual_update, ConstrainedConfig, ConstrainedState};
pub use learner::{compute_targets, state_value, unsafe_pair_target, Agent};
pub use policy::{argmax_among, max_among, select_action, shaped_q};
pub use replay::{ReplayBuffer, Transition};
