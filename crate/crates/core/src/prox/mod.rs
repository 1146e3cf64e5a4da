//! Proximal modules (identity, classical shrinkage, TinyCNN) and the
//! reverse-mode tape that differentiates the unrolled pipeline.

pub mod checkpoint;
pub mod conv;
pub mod module;
pub mod tape;
pub mod tensor;

pub use module::{ProxKind, ProximalModule};
pub use tape::{Gradients, ParamKey, Tape, Var};
pub use tensor::{NamedTensor, Tensor, TensorSet};

/// Maps an unconstrained trainable to a strictly positive value,
/// `ln(1 + e^raw)`.
pub fn positive_param(raw: f64) -> f64 {
    tape::softplus(raw)
}

/// Derivative of [`positive_param`].
pub fn positive_param_grad(raw: f64) -> f64 {
    tape::sigmoid(raw)
}

/// Inverse of [`positive_param`] for `value >= 0`; zero maps to `-inf`.
pub fn raw_for_positive(value: f64) -> f64 {
    assert!(value >= 0.0);
    if value > 30.0 {
        value
    } else {
        value.exp_m1().ln()
    }
}
