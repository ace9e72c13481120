use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::hgroup::{unit_ball_volume, GroupDim, VolumeConvention};
use crate::integrate::SeededStream;
use crate::scalar::{from_usize, lit, to_f64, Real};

/// `K(|x|, |y_1|, .., |y_m|)` for a gauge-radial kernel.
pub type RadialProfile<T> = Arc<dyn Fn(T, &[T]) -> T + Send + Sync>;

/// Radii of `y_k` where `K(1, s_1, .., s_k, ..)` jumps, kinks or changes
/// scale, given the outer radii `s_1, .., s_(k−1)`.
pub type RadialBreaks<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;

pub const HOMOGENEITY_PROBES: usize = 10;
const PROBE_SEED: u64 = 0x686f6d6f;

/// A nonnegative gauge-radial kernel on `H^n × H^(nm)`, homogeneous of
/// degree `−mQ`.
#[derive(Clone)]
pub struct KernelSpec<T> {
    dim: GroupDim,
    m: usize,
    label: String,
    profile: RadialProfile<T>,
    breaks: RadialBreaks<T>,
}

impl<T: Real> fmt::Debug for KernelSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("label", &self.label)
            .field("n", &self.dim.n())
            .field("m", &self.m)
            .finish()
    }
}

impl<T: Real> KernelSpec<T> {
    pub fn new(dim: GroupDim, m: usize, label: impl Into<String>, profile: RadialProfile<T>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidProfile("kernel arity m must be positive".into()));
        }
        Ok(Self {
            dim,
            m,
            label: label.into(),
            profile,
            breaks: Arc::new(|outer: &[T]| vec![outer.iter().copied().fold(T::one(), T::max)]),
        })
    }

    /// Replaces the default break hint, which is the largest of `1` and the
    /// outer radii.
    pub fn with_breaks(mut self, breaks: RadialBreaks<T>) -> Self {
        self.breaks = breaks;
        self
    }

    /// `χ(Σ r_i² < r_0²) / (Ω^m r_0^(mQ))`.
    pub fn hardy(dim: GroupDim, m: usize, convention: VolumeConvention) -> Result<Self> {
        let omega_m = unit_ball_volume::<T>(dim, convention).powi(m as i32);
        let mq = (m * dim.q()) as i32;
        let profile: RadialProfile<T> = Arc::new(move |r0, rs| {
            let s: T = rs.iter().map(|&r| r * r).sum();
            if s < r0 * r0 {
                (omega_m * r0.powi(mq)).recip()
            } else {
                T::zero()
            }
        });
        let edge: RadialBreaks<T> = Arc::new(|outer: &[T]| {
            let used: T = outer.iter().map(|&s| s * s).sum();
            vec![(T::one() - used).max(T::zero()).sqrt()]
        });
        Ok(Self::new(dim, m, "hardy", profile)?.with_breaks(edge))
    }

    /// `1 / max(r_0, r_1, .., r_m)^(mQ)`.
    pub fn hlp(dim: GroupDim, m: usize) -> Result<Self> {
        let mq = (m * dim.q()) as i32;
        let profile: RadialProfile<T> = Arc::new(move |r0, rs| rs.iter().copied().fold(r0, T::max).powi(mq).recip());
        let corners: RadialBreaks<T> = Arc::new(|outer: &[T]| {
            let top = outer.iter().copied().fold(T::one(), T::max);
            if top > T::one() {
                vec![T::one(), top]
            } else {
                vec![T::one()]
            }
        });
        Ok(Self::new(dim, m, "hlp", profile)?.with_breaks(corners))
    }

    /// `(r_0^Q + Σ r_i^Q)^(−m)`.
    pub fn hilbert(dim: GroupDim, m: usize) -> Result<Self> {
        let q = dim.q() as i32;
        let profile: RadialProfile<T> = Arc::new(move |r0, rs| {
            let s = rs.iter().fold(r0.powi(q), |acc, &r| acc + r.powi(q));
            s.powi(-(m as i32))
        });
        let scale: RadialBreaks<T> = Arc::new(move |outer: &[T]| {
            let c = outer.iter().fold(T::one(), |acc, &s| acc + s.powi(q));
            vec![c.powf(from_usize::<T>(dim.q()).recip())]
        });
        Ok(Self::new(dim, m, "hilbert", profile)?.with_breaks(scale))
    }

    /// The kernel multiplied by `c`.
    pub fn scaled(&self, c: T) -> Self {
        let inner = Arc::clone(&self.profile);
        Self {
            label: format!("{c}*{}", self.label),
            profile: Arc::new(move |r0, rs| c * inner(r0, rs)),
            ..self.clone()
        }
    }

    pub fn dim(&self) -> GroupDim {
        self.dim
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Break radii for the next argument given the outer radii.
    pub fn breaks(&self, outer: &[T]) -> Vec<T> {
        (self.breaks)(outer)
    }

    /// Required degree `−mQ`.
    pub fn homogeneity_degree(&self) -> T {
        -from_usize::<T>(self.m * self.dim.q())
    }

    /// Normalization point standing for `e_1`.
    pub fn base_gauge(&self) -> T {
        T::one()
    }

    pub fn eval(&self, r0: T, rs: &[T]) -> T {
        (self.profile)(r0, rs)
    }

    /// Worst relative deviation of `t^(−degree) K(t r) − K(r)` over
    /// deterministic random probes with `t ∈ [0.1, 10]`.
    pub fn homogeneity_deviation(&self, degree: T, probes: usize) -> T {
        let mut rng = SeededStream::new(PROBE_SEED, self.m as u64).rng();
        let mut worst = T::zero();
        let spread = 1.2 / (self.m as f64).sqrt();
        for _ in 0..probes {
            let r0: T = lit(10f64.powf(rng.random_range(-0.3..0.3)));
            let t: T = lit(10f64.powf(rng.random_range(-1.0..1.0)));
            let rs: Vec<T> = (0..self.m)
                .map(|_| r0 * lit::<T>(spread * rng.random_range(0.05..1.0)))
                .collect();
            let base = self.eval(r0, &rs);
            let trs: Vec<T> = rs.iter().map(|&r| t * r).collect();
            let scaled = self.eval(t * r0, &trs) * t.powf(-degree);
            let dev = if base.is_zero() {
                if scaled.is_zero() {
                    T::zero()
                } else {
                    T::one()
                }
            } else {
                ((scaled - base) / base).abs()
            };
            worst = worst.max(if dev.is_nan() { T::infinity() } else { dev });
        }
        worst
    }

    /// Checks degree `−mQ` on [`HOMOGENEITY_PROBES`] probes.
    pub fn check_homogeneity(&self) -> Result<()> {
        let worst = self.homogeneity_deviation(self.homogeneity_degree(), HOMOGENEITY_PROBES);
        let tol = lit::<T>(1e-10).max(T::epsilon() * lit(64.0));
        if worst <= tol {
            Ok(())
        } else {
            Err(Error::HomogeneityProbe { worst: to_f64(worst) })
        }
    }
}
