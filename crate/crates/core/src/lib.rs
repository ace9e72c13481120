//! Geometry of the Heisenberg group, sharp constants of multilinear
//! integral operators between weighted-type spaces, and the numerical
//! oracles used to check them.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the
//! verification harness in [`verify`] runs in `f64`.

// `!(x > 0)` also rejects NaN; Gauss–Kronrod nodes keep their published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod hgroup;
pub mod integrate;
pub mod operators;
mod scalar;
pub mod specfun;
pub mod verify;

pub use error::{AlphaViolation, Error, Result};
pub use scalar::{from_usize, lit, Real};

pub type HPoint64 = hgroup::HPoint<f64>;
pub type HPoint32 = hgroup::HPoint<f32>;
pub type AlphaProfile64 = specfun::AlphaProfile<f64>;
pub type OperatorSpec64 = operators::OperatorSpec<f64>;
pub type TestFunction64 = operators::TestFunction<f64>;
pub type KernelSpec64 = operators::KernelSpec<f64>;
pub type Estimate64 = integrate::Estimate<f64>;
pub type Engine64 = operators::Engine<f64>;
pub type QuadSpec64 = integrate::QuadSpec<f64>;
pub type ConstantResult64 = specfun::ConstantResult<f64>;
