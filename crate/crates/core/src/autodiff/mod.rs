//! Tape-based reverse-mode differentiation for the classical parts of the model, with a
//! quantum node that splices circuit Jacobians into the backward pass.
//!
//! Shapes are deliberately narrow: vectors, `[n_out, n_in]` weight matrices and scalars.
//! There is no broadcasting.

mod tape;
mod tensor;

pub use tape::{Gradients, QuantumGrad, Tape, Var};
pub use tensor::Tensor;
