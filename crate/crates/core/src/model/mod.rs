//! Logistic regression, its cross-entropy loss and gradients, optimizers, and
//! a finite-difference gradient oracle.

mod finite_diff;
mod logistic;
mod optim;

pub use finite_diff::{finite_diff_gradient, DEFAULT_STEP};
pub(crate) use logistic::accumulate_input;
pub use logistic::{
    batch_loss, loss_gradient, sigmoid, Checkpoint, ModelParams, PROB_CLAMP, SENSITIVE_FEATURE,
};
pub use optim::{adam_step, AdamState, Optimizer, OptimizerKind};
