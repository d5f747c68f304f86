//! Minimal CPU neural-network engine in `f64`.

pub mod adam;
pub mod conv;
pub mod gradcheck;
pub mod layers;
pub mod sequential;
pub mod softmax;
mod tensor;

pub use adam::{Adam, AdamConfig};
pub use conv::{conv2d, group_conv2d, group_conv2d_backward, ConvGrads, ConvParams};
pub use layers::{BatchNormParams, Mode};
pub use sequential::{Gradients, Layer, LayerKind, Sequential, Trace};
pub use softmax::{cross_entropy, cross_entropy_from_logits, softmax_grid, SoftmaxGrid, Target, GRID_CELLS};
pub use tensor::Tensor4;
