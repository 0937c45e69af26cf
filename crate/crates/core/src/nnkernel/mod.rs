//! Reverse-mode differentiation over small dense vectors.
//!
//! Values live on a [`Tape`] as `Vec<f64>` nodes; parameters are
//! [`Tensor2`] entries of a [`ParamSet`] referenced by [`ParamId`].
//! Gradients are accumulated into a [`Grads`] buffer that mirrors the
//! parameter shapes. All arithmetic is `f64`.

mod adam;
pub mod gaussian;
mod gradcheck;
mod lstm;
mod params;
mod tape;
mod tensor;

pub use adam::{adam_step, AdamConfig};
pub use gradcheck::{grad_check, GradCheckReport};
pub use lstm::{lstm_cell, lstm_step, LstmParams, GATE_NAMES};
pub use params::{init_uniform, Grads, ParamId, ParamSet};
pub use tape::{leaky_relu, Tape, Var};
pub use tensor::Tensor2;

/// Negative-slope coefficient of the embedding activation.
pub const LEAKY_ALPHA: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("dimension mismatch in {op}: expected {expected}, got {got}")]
    Dimension {
        op: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("missing parameter {0}")]
    MissingParam(alloc::string::String),
    #[error("class index {index} out of range for {classes} classes")]
    Index { index: usize, classes: usize },
}
