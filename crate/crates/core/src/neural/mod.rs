//! Feed-forward Q-network with manual backpropagation, Adam, gradient checks
//! and a text checkpoint format.

mod adam;
pub mod checkpoint;
mod gradcheck;
mod mlp;

pub use adam::Adam;
pub use gradcheck::{compare_gradients, grad_check, probe_gradient, relative_error, GradCheck};
pub use mlp::{elu, Activation, ForwardCache, LayerShape, Mlp};

/// Hidden layer widths of the default Q-network.
pub const DEFAULT_HIDDEN: [usize; 2] = [100, 100];
