//! Minimal dense-network engine: matrices, layers, taped reverse-mode
//! gradients, losses and Adam.

mod activation;
mod adam;
mod layer;
pub mod loss;
mod matrix;
mod network;
pub mod serialize;

pub use activation::{sigmoid, Activation};
pub use adam::{adam_update, AdamState};
pub use layer::{BatchNorm, DenseLayer};
pub use loss::{binary_cross_entropy, squared_error};
pub use matrix::Matrix;
pub use network::{DenseNetwork, LayerGradients, MlpSpec, Mode, NetworkGradients, Tape};
pub use serialize::NET_MAGIC;
