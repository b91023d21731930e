//! Numerical laboratory for the inhomogeneous nonlinear Schrödinger equation
//!
//! ```text
//! i ∂_t u + Δu + |x|^{-b} |u|^{2σ} u = 0,   x ∈ R^N.
//! ```
//!
//! The crate computes the radial ground state `Q` by shooting, certifies it
//! through its Pohozaev identities, evaluates the sharp Gagliardo–Nirenberg
//! constant, classifies initial data against the mass-energy thresholds set
//! by `Q`, and evolves the equation with a Strang-split Fourier integrator
//! that records conservation and virial diagnostics.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix `f64`, which is what the command-line tool uses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dichotomy;
pub mod error;
pub mod evolution;
pub mod field;
pub mod functional;
pub mod grid;
pub mod groundstate;
pub mod ode;
pub mod params;
pub mod radial;
pub mod scalar;
pub mod spectral;
pub mod weights;

pub use error::{Error, Result};
pub use functional::Functional;
pub use scalar::Real;

pub type ModelParams = params::ModelParams<f64>;
pub type GridSpec = grid::GridSpec<f64>;
pub type FieldState = field::FieldState<f64>;
pub type RadialProfile = radial::RadialProfile<f64>;

pub type GroundStateReport = groundstate::GroundStateReport<f64>;
pub type ShootOutcome = groundstate::ShootOutcome<f64>;
pub type ThresholdReport = dichotomy::ThresholdReport<f64>;
pub type BarrierCurve = dichotomy::BarrierCurve<f64>;
pub type EvolveConfig = evolution::EvolveConfig<f64>;
pub type InvariantRecord = evolution::InvariantRecord<f64>;
pub type Trajectory = evolution::Trajectory<f64>;
