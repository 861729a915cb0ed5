//! Training and evaluation toolkit for studying how ensembling the last M
//! parameter snapshots of a single training run affects adversarial
//! robustness.
//!
//! The crate is organized around seven modules:
//!
//! - [`tensor`] / [`ops`]: dense `f32` arrays and the differentiable layer
//!   primitives (conv, pool, linear, ReLU, softmax cross-entropy).
//! - [`nn`]: the two fixed CNN architectures, initialization, forward and
//!   fused backward passes, and snapshot serialization.
//! - [`optim`]: SGD, Heavy Ball, and Nesterov outer-minimization steps.
//! - [`attack`]: FGSM and PGD-l∞ against anything implementing [`attack::Predictor`],
//!   plus robust-accuracy evaluation.
//! - [`ensemble`]: the bounded FIFO snapshot buffer and the summed-logits
//!   ensemble predictor.
//! - [`data`]: MNIST IDX and CIFAR-10 binary loaders, batching, bootstrap
//!   sampling.
//! - [`harness`]: training loops, per-epoch robust evaluation, experiment
//!   grids, CSV output, and SVG plotting.

pub mod attack;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod harness;
pub mod nn;
pub mod ops;
pub mod optim;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{norm, Gradient, Norm, Tensor};
