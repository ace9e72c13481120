//! Monte Carlo estimators over products of Heisenberg groups.
//!
//! Every draw starts from a point `u` uniform in the bounding box
//! `[-1, 1]^(2n+1)` of the unit gauge ball; draws outside the ball contribute
//! zero. An accepted `u` with gauge `g` is pushed radially to gauge
//! `s = g^(Q/(Q−t))`, which gives `s` the tilted density `(Q−t) s^(Q−t−1)`,
//! and the estimator carries the exact Jacobian `(Q/(Q−t)) s^t` of that map.
//! Only the box volume `2^(2n+1)` enters the weights, so ball-volume constants
//! are measured rather than assumed.

use rand::distr::{Distribution, Open01};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hgroup::{gauge_of, GroupDim, HPoint};
use crate::integrate::{Estimate, Method, SeededStream};
use crate::scalar::{from_usize, lit, to_f64, Real};

/// Samples per independently seeded chunk.
pub const CHUNK_SIZE: u64 = 8192;

/// Proposal for [`mc_integrate`]; one tilt per factor `H^n`.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampler<T> {
    /// Points of the tuple ball `{(Σ |y_i|²)^(1/2) < 1}`.
    TupleBall(Vec<T>),
    /// All of `H^(nm)`: every radius is additionally mapped by `s ↦ s/(1 − s)`.
    FullSpaceHeavyTail(Vec<T>),
}

impl<T: Real> Sampler<T> {
    pub fn tilts(&self) -> &[T] {
        match self {
            Sampler::TupleBall(t) | Sampler::FullSpaceHeavyTail(t) => t,
        }
    }
}

fn uniform_box<T: Real, R: Rng + ?Sized>(buf: &mut [T], rng: &mut R) {
    for c in buf.iter_mut() {
        *c = lit::<T>(rng.random::<f64>() * 2.0 - 1.0);
    }
}

/// Uniform point of the unit Koranyi ball, by rejection from its bounding box.
pub fn sample_unit_ball<T: Real, R: Rng + ?Sized>(dim: GroupDim, rng: &mut R) -> HPoint<T> {
    let mut buf = vec![T::zero(); dim.coords_len()];
    loop {
        uniform_box(&mut buf, rng);
        let g = gauge_of(&buf, dim.n());
        if g < T::one() && g > T::zero() {
            return HPoint::from_raw(dim, buf);
        }
    }
}

/// Inverse CDF of the density `(Q − tilt) r^(Q − tilt − 1)` on `(0, 1)`.
pub fn radius_from_uniform<T: Real>(q: usize, tilt: T, u: T) -> Result<T> {
    let a = from_usize::<T>(q) - tilt;
    if !(a > T::zero()) {
        return Err(Error::ConvergenceCondition(format!(
            "radial tilt must be below Q = {q}, got {tilt}"
        )));
    }
    Ok(u.powf(a.recip()))
}

pub fn sample_radius<T: Real, R: Rng + ?Sized>(q: usize, tilt: T, rng: &mut R) -> Result<T> {
    let u: f64 = Open01.sample(rng);
    radius_from_uniform(q, tilt, lit(u))
}

/// A point of the unit gauge sphere, distributed by the cone measure.
pub fn sample_sphere_direction<T: Real, R: Rng + ?Sized>(dim: GroupDim, rng: &mut R) -> HPoint<T> {
    let u = sample_unit_ball::<T, R>(dim, rng);
    let g = u.gauge();
    u.dilate_unchecked(g.recip())
}

#[derive(Clone, Copy)]
struct Moments<T> {
    count: u64,
    accepted: u64,
    mean: T,
    m2: T,
}

impl<T: Real> Moments<T> {
    fn empty() -> Self {
        Self {
            count: 0,
            accepted: 0,
            mean: T::zero(),
            m2: T::zero(),
        }
    }

    fn push(&mut self, x: T) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / from_usize(self.count as usize);
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let n = self.count + other.count;
        let (na, nb, nn): (T, T, T) = (
            from_usize(self.count as usize),
            from_usize(other.count as usize),
            from_usize(n as usize),
        );
        let delta = other.mean - self.mean;
        Self {
            count: n,
            accepted: self.accepted + other.accepted,
            mean: self.mean + delta * nb / nn,
            m2: self.m2 + other.m2 + delta * delta * na * nb / nn,
        }
    }
}

struct Draw<T> {
    q: T,
    box_volume: T,
    gaps: Vec<T>,
    tilts: Vec<T>,
    full_space: bool,
}

impl<T: Real> Draw<T> {
    fn new(dim: GroupDim, sampler: &Sampler<T>) -> Result<Self> {
        let q: T = from_usize(dim.q());
        let tilts = sampler.tilts().to_vec();
        if tilts.is_empty() {
            return Err(Error::ConvergenceCondition("sampler needs at least one factor".into()));
        }
        if let Some(t) = tilts.iter().find(|&&t| !(t < q) || !t.is_finite()) {
            return Err(Error::ConvergenceCondition(format!(
                "radial tilt must be below Q = {}, got {t}",
                dim.q()
            )));
        }
        Ok(Self {
            q,
            box_volume: lit::<T>(2.0).powi(dim.coords_len() as i32),
            gaps: tilts.iter().map(|&t| q - t).collect(),
            tilts,
            full_space: matches!(sampler, Sampler::FullSpaceHeavyTail(_)),
        })
    }

    /// Fills `points` and returns the importance weight, or zero on rejection.
    fn sample<R: Rng + ?Sized>(&self, points: &mut [HPoint<T>], rng: &mut R) -> T {
        let mut weight = T::one();
        let mut radii_sq = T::zero();
        for (i, p) in points.iter_mut().enumerate() {
            let n = p.dim().n();
            uniform_box(&mut p.coords_mut()[..], rng);
            let g = gauge_of(p.coords(), n);
            if !(g < T::one() && g > T::zero()) {
                return T::zero();
            }
            let s = g.powf(self.q / self.gaps[i]);
            weight = weight * self.box_volume * (self.q / self.gaps[i]) * s.powf(self.tilts[i]);
            let target = if self.full_space {
                let c = T::one() - s;
                weight *= c.powf(-(self.q + T::one()));
                s / c
            } else {
                radii_sq += s * s;
                s
            };
            p.dilate_in_place(target / g);
        }
        if !self.full_space && !(radii_sq < T::one()) {
            return T::zero();
        }
        weight
    }
}

/// Importance-sampled estimate of `∫ f(y_1, .., y_m) dy` over the sampler's
/// domain, with `m = tilts.len()`.
///
/// Samples are generated in chunks of [`CHUNK_SIZE`]; chunk `k` always uses
/// `stream.chunk_rng(k)` and chunks are reduced in index order, so the result
/// does not depend on how many worker threads evaluate them.
pub fn mc_integrate<T, F>(
    f: F,
    dim: GroupDim,
    sampler: &Sampler<T>,
    n_samples: u64,
    stream: SeededStream,
) -> Result<Estimate<T>>
where
    T: Real,
    F: Fn(&[HPoint<T>]) -> T + Sync,
{
    if n_samples < 2 {
        return Err(Error::TooFewSamples(n_samples));
    }
    let draw = Draw::new(dim, sampler)?;
    let m = draw.tilts.len();
    let chunks = n_samples.div_ceil(CHUNK_SIZE);
    let run_chunk = |k: u64| -> Result<Moments<T>> {
        let mut rng = stream.chunk_rng(k);
        let len = CHUNK_SIZE.min(n_samples - k * CHUNK_SIZE);
        let mut points = vec![HPoint::<T>::origin(dim); m];
        let mut acc = Moments::empty();
        for _ in 0..len {
            let w = draw.sample(&mut points, &mut rng);
            if w.is_zero() {
                acc.push(T::zero());
                continue;
            }
            let v = f(&points) * w;
            if !v.is_finite() {
                return Err(Error::NonFiniteEvaluation {
                    point: points
                        .iter()
                        .flat_map(|p| p.coords().iter().map(|&c| to_f64(c)))
                        .collect(),
                });
            }
            acc.accepted += 1;
            acc.push(v);
        }
        Ok(acc)
    };
    let parts: Vec<Result<Moments<T>>> = (0..chunks).into_par_iter().map(run_chunk).collect();
    let mut total = Moments::empty();
    for part in parts {
        total = total.merge(part?);
    }
    if total.accepted == 0 {
        return Err(Error::NoAcceptedSamples { draws: n_samples });
    }
    let n: T = from_usize(total.count as usize);
    let variance = total.m2 / (n - T::one());
    Ok(Estimate {
        value: total.mean,
        std_error: (variance / n).sqrt(),
        n_samples: total.count,
        method: Method::MonteCarlo,
    })
}
