//! A small convolutional network engine with hand-written backpropagation.
//!
//! Everything runs in `f64` on the CPU. Convolutions are valid (unpadded)
//! with stride 1 and are computed as im2col followed by a matrix product;
//! pooling is 2x2 max pooling with stride 2. The output layer is a softmax
//! whose gradient is fused with the cross-entropy loss.

mod gemm;
mod layers;
mod network;
mod optim;
mod tensor;
mod train;

use thiserror::Error;

pub use layers::{Activation, Conv2d, Dense, Flatten, Layer, MaxPool2, SoftmaxOutput};
pub use network::{accuracy, argmax, cross_entropy, one_hot, LayerSpec, Network, PROB_FLOOR};
pub use optim::{Optimizer, ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON};
pub use tensor::Tensor;
pub use train::{train, train_with, EpochStats, TrainConfig, LEARNING_RATE};

#[derive(Debug, Error)]
pub enum NnError {
    #[error("feature map collapses to {height}x{width} at layer {layer}")]
    SpatialCollapse { layer: usize, height: usize, width: usize },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("backward called before forward")]
    BackwardBeforeForward,
    #[error("training diverged in epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("parameter file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
