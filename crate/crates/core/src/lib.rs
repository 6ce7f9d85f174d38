//! Synchrony-breaking in agent-option influence networks.
//!
//! The core is generic over the scalar type: `f32`/`f64` for dynamics and
//! exact rationals ([`Rational`]) for the linear algebra of balanced colorings.

pub mod colorings;
pub mod error;
pub mod experiments;
pub mod integrator;
pub mod linalg;
pub mod matrix;
pub mod model;
pub mod patterns;
pub mod perm;
pub mod scalar;

pub use error::{Error, Result};
pub use matrix::{NetworkShape, ValueMatrix};
pub use perm::Permutation;
pub use scalar::{Field, Real};

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;

pub type ValueMatrix64 = ValueMatrix<f64>;
pub type ModelConfig64 = model::ModelConfig<f64>;
pub type GainParams64 = model::GainParams<f64>;
pub type CriticalCoefficients64 = model::CriticalCoefficients<f64>;
pub type IntegratorConfig64 = integrator::IntegratorConfig<f64>;
pub type EquilibriumResult64 = integrator::EquilibriumResult<f64>;
