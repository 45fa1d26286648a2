//! Adversarial Rademacher complexity of small deep networks: Monte Carlo
//! estimators, covering-number machinery, closed-form bounds and a training
//! harness for measuring robust generalization gaps.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common choices.

pub mod attack;
pub mod bounds;
pub mod covering;
pub mod data;
pub mod error;
pub mod exponent;
pub mod linalg;
pub mod network;
pub mod rademacher;
pub mod rng;
pub mod scalar;
pub mod train;

pub use error::{Error, Result};
pub use exponent::Exponent;
pub use scalar::Scalar;

pub type Matrix = linalg::DenseMatrix<f64>;
pub type MatrixF32 = linalg::DenseMatrix<f32>;
pub type Mlp = network::Network<f64>;
pub type MlpF32 = network::Network<f32>;
