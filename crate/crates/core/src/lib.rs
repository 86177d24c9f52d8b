//! Lorentz-equivariant quantum graph neural network for quark/gluon jet tagging.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below fix `f64`,
//! which is what the symmetry tolerances and checkpoints are specified against.

pub mod autodiff;
pub mod data;
pub mod error;
pub mod minkowski;
pub mod model;
pub mod qsim;
pub mod scalar;
pub mod train;

pub use error::{Error, Result};
pub use scalar::Real;

pub type FourVector = minkowski::FourVector<f64>;
pub type LorentzTransform = minkowski::LorentzTransform<f64>;
pub type StateVector = qsim::StateVector<f64>;
pub type JetGraph = model::JetGraph<f64>;
pub type Model = model::Model<f64>;
pub type Tape = autodiff::Tape<f64>;
pub type Tensor = autodiff::Tensor<f64>;
