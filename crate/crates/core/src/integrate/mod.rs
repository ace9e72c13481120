//! Numerical integration engines: adaptive Gauss–Kronrod quadrature in one
//! and several variables, and Monte Carlo estimators with importance tilts
//! adapted to the Koranyi geometry.

mod mc;
mod quad;
mod rng;

use serde::Serialize;

pub use mc::{
    mc_integrate, radius_from_uniform, sample_radius, sample_sphere_direction, sample_unit_ball, Sampler, CHUNK_SIZE,
};
pub use quad::{quad_1d, quad_1d_with_breaks, quad_nested, quad_tensor, Domain, QuadSpec, Segment};
pub use rng::SeededStream;

/// How an [`Estimate`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    Quad,
    #[serde(rename = "MC")]
    MonteCarlo,
}

/// A numeric value with its statistical uncertainty.
///
/// For quadrature `std_error` is zero and `n_samples` counts integrand
/// evaluations; for Monte Carlo it is the sample standard deviation of the
/// weighted evaluations divided by `√n_samples`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate<T> {
    pub value: T,
    pub std_error: T,
    pub n_samples: u64,
    pub method: Method,
}

impl<T: crate::Real> Estimate<T> {
    pub fn quad(value: T, evaluations: u64) -> Self {
        Self {
            value,
            std_error: T::zero(),
            n_samples: evaluations,
            method: Method::Quad,
        }
    }

    /// Multiplies value and standard error by `c`.
    pub fn scaled(self, c: T) -> Self {
        Self {
            value: self.value * c,
            std_error: self.std_error * c.abs(),
            ..self
        }
    }

    /// Relative standard error `std_error / |value|`.
    pub fn relative_std_error(&self) -> T {
        if self.value.is_zero() {
            T::zero()
        } else {
            self.std_error / self.value.abs()
        }
    }
}
