//! Minimal deterministic numeric core.
//!
//! Dense row-major `f64` tensors, the fixed layer set needed by the two
//! classifiers (each forward op paired with an exact backward op),
//! softmax cross-entropy, SGD/Adam, and a finite-difference gradient
//! checker.

use thiserror::Error;

pub mod gradcheck;
pub mod layers;
pub mod optim;
mod tensor;

pub use gradcheck::{finite_difference_check, GradCheckReport};
pub use layers::LayerSpec;
pub use optim::{Adam, Optimizer, OptimizerConfig, Sgd};
pub use tensor::{Parameter, Tensor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("{op}: shape mismatch: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },
    #[error("{op}: produced a non-finite value")]
    NonFinite { op: &'static str },
    #[error("non-finite gradient in parameter {0:?}")]
    NonFiniteGradient(String),
    #[error("invalid layer attribute: {0}")]
    InvalidAttribute(String),
}

pub(crate) fn shape_err(op: &'static str, detail: impl Into<String>) -> NnError {
    NnError::ShapeMismatch {
        op,
        detail: detail.into(),
    }
}

/// A trainable classifier over fixed-length index sequences.
///
/// `accumulate_gradients` adds the gradient of one example's loss to
/// `grads`, which is laid out like [`Network::params`]. A `dropout` stream
/// turns on training-mode dropout; `None` is evaluation mode.
pub trait Network: Sync {
    fn params(&self) -> &[Parameter];
    fn params_mut(&mut self) -> &mut [Parameter];

    /// Evaluation-mode logits.
    fn logits(&self, input: &[usize]) -> Result<Tensor, NnError>;

    fn accumulate_gradients(
        &self,
        input: &[usize],
        label: usize,
        dropout: Option<rand_chacha::ChaCha8Rng>,
        grads: &mut [Tensor],
    ) -> Result<f64, NnError>;

    /// Loss of one example, with optional dropout.
    fn loss(&self, input: &[usize], label: usize, dropout: Option<rand_chacha::ChaCha8Rng>) -> Result<f64, NnError>;

    fn zero_grads(&self) -> Vec<Tensor> {
        self.params().iter().map(|p| Tensor::zeros(p.value.shape())).collect()
    }

    fn parameter_count(&self) -> usize {
        self.params().iter().map(|p| p.value.len()).sum()
    }
}
