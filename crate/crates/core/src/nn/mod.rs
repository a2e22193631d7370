//! A small classical network stack with hand-written reverse-mode gradients.
//!
//! There is no computation graph. Each layer exposes `forward`, which returns
//! whatever cache its `backward` needs, and `backward`, which accumulates
//! parameter gradients into a zeroed copy of the layer and returns the
//! gradient with respect to its input. Models chain these calls explicitly.

mod activation;
mod adam;
mod attention;
pub mod checkpoint;
mod linear;
mod loss;
mod lstm;
mod tensor;

pub use activation::{
    sigmoid, sigmoid_backward, softmax, softmax_backward, tanh, tanh_backward, Activation,
};
pub use adam::{adam_step, clip_global_norm, AdamState};
pub use attention::{
    attention_core, attention_core_backward, scaled_dot_attention, Attention, AttentionCache,
};
pub use linear::{linear_backward, linear_forward, Linear};
pub use loss::{binary_cross_entropy, softmax_cross_entropy, BCE_CLAMP};
pub use lstm::{lstm_cell, lstm_combine, lstm_combine_backward, GateCache, LstmCache, LstmCell};
pub(crate) use tensor::join_name;
pub use tensor::{NamedTensor, Parameterized, Tensor2};
