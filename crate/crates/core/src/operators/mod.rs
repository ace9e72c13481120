//! The m-linear operators on `H^n`: a general gauge-radial kernel operator
//! and its Hardy, Hardy–Littlewood–Pólya and Hilbert specializations.
//!
//! Every evaluator uses the dilation identity
//! `T(f_1, .., f_m)(x) = ∫ K(e_1, y) Π f_i(δ_|x| y_i) dy`, so the quadrature
//! and Monte Carlo routes both integrate at base gauge 1. Quadrature works
//! in the variables `u_i = s_i^(Q − p_i)` where `s_i` is the normalized
//! radius and `p_i` the power of `f_i`; that substitution absorbs the
//! radial measure and the power singularity, leaving only the modulations.

mod functions;
mod kernel;

use serde::Serialize;

pub use functions::{
    weighted_norm, weighted_norm_estimate, Modulation, NormQuality, PointFn, RadialFn, TestFunction, TestFunctionKind,
    NORM_GRID_MAX, NORM_GRID_MIN, NORM_GRID_POINTS,
};
pub use kernel::{KernelSpec, RadialBreaks, RadialProfile, HOMOGENEITY_PROBES};

use crate::error::{Error, Result};
use crate::hgroup::{sphere_measure, unit_ball_volume, GroupDim, HPoint, VolumeConvention};
use crate::integrate::{mc_integrate, quad_nested, Estimate, QuadSpec, Sampler, SeededStream, Segment};
use crate::scalar::{from_usize, lit, to_f64, Real};
use crate::specfun::AlphaProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Kernel,
    Hardy,
    Hlp,
    Hilbert,
}

impl OperatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OperatorKind::Kernel => "kernel",
            OperatorKind::Hardy => "hardy",
            OperatorKind::Hlp => "hlp",
            OperatorKind::Hilbert => "hilbert",
        }
    }
}

/// Operator, group, exponent profile and volume convention. Every `α_i` lies
/// in `(0, Q)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Real + Serialize"))]
pub struct OperatorSpec<T> {
    pub kind: OperatorKind,
    #[serde(rename = "n")]
    pub dim: GroupDim,
    #[serde(rename = "alphas")]
    pub profile: AlphaProfile<T>,
    pub convention: VolumeConvention,
}

impl<T: Real> OperatorSpec<T> {
    pub fn new(
        kind: OperatorKind,
        dim: GroupDim,
        profile: AlphaProfile<T>,
        convention: VolumeConvention,
    ) -> Result<Self> {
        profile.validate(dim)?;
        Ok(Self {
            kind,
            dim,
            profile,
            convention,
        })
    }

    pub fn m(&self) -> usize {
        self.profile.m()
    }

    /// One extremal `|x|^(−α_i)` per factor.
    pub fn extremals(&self) -> Vec<TestFunction<T>> {
        self.profile
            .alphas()
            .iter()
            .map(|&a| TestFunction::extremal(a))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Engine<T> {
    Quad(QuadSpec<T>),
    MonteCarlo { n_samples: u64, stream: SeededStream },
}

impl<T: Real> Default for Engine<T> {
    fn default() -> Self {
        Engine::Quad(QuadSpec::default())
    }
}

struct Setup<T> {
    rho: T,
    powers: Vec<T>,
    gaps: Vec<T>,
}

impl<T: Real> Setup<T> {
    fn new(fs: &[TestFunction<T>], x: &HPoint<T>, spec: &OperatorSpec<T>) -> Result<Self> {
        if fs.len() != spec.m() {
            return Err(Error::ArityMismatch {
                expected: spec.m(),
                got: fs.len(),
            });
        }
        if x.dim() != spec.dim {
            return Err(Error::DimensionMismatch {
                left: x.dim().n(),
                right: spec.dim.n(),
            });
        }
        if x.is_origin() {
            return Err(Error::EvaluationAtOrigin);
        }
        let q: T = from_usize(spec.dim.q());
        let powers: Vec<T> = fs.iter().map(TestFunction::power).collect();
        let gaps = powers.iter().map(|&p| q - p).collect();
        Ok(Self {
            rho: x.gauge(),
            powers,
            gaps,
        })
    }

    fn require_local(&self, q: usize) -> Result<()> {
        match self.gaps.iter().position(|&a| !(a > T::zero())) {
            Some(i) => Err(Error::Divergence(format!(
                "f_{} has power {} >= Q = {q}; the integral diverges at the origin",
                i + 1,
                self.powers[i]
            ))),
            None => Ok(()),
        }
    }

    fn require_decay(&self) -> Result<()> {
        let total = self.total_power();
        if total > T::zero() {
            Ok(())
        } else {
            Err(Error::Divergence(format!(
                "total power {total} <= 0; the integral diverges at infinity"
            )))
        }
    }

    fn total_power(&self) -> T {
        self.powers.iter().copied().sum()
    }

    /// `Π ρ^(−p_i) / a_i`.
    fn radial_prefactor(&self) -> T {
        self.powers
            .iter()
            .zip(&self.gaps)
            .fold(T::one(), |acc, (&p, &a)| acc * self.rho.powf(-p) / a)
    }

    /// Modulation breaks of `f_i` in the variable `u_i`, at scale `rho`.
    fn u_breaks(&self, f: &TestFunction<T>, i: usize, rho: T) -> Vec<T> {
        f.breaks().iter().map(|&b| (b / rho).powf(self.gaps[i])).collect()
    }
}

fn require_radial<T: Real>(fs: &[TestFunction<T>]) -> Result<()> {
    match fs.iter().find(|f| !f.is_radial()) {
        Some(f) => Err(Error::EngineMismatch(f.description.clone())),
        None => Ok(()),
    }
}

/// `Π_i m_i(ρ u_i^(1/a_i))`.
fn modulation_product<T: Real>(fs: &[TestFunction<T>], s: &Setup<T>, u: &[T]) -> T {
    fs.iter().zip(u).zip(&s.gaps).fold(T::one(), |acc, ((f, &ui), &a)| {
        acc * radial(f, s.rho * ui.powf(a.recip()))
    })
}

fn radial<T: Real>(f: &TestFunction<T>, r: T) -> T {
    f.radial_factor(r).unwrap_or_else(T::nan)
}

/// Cartesian MC estimate of `∫ w(|Y_1|, .., |Y_m|) Π f_i(δ_ρ Y_i) dY`.
fn mc_operator<T, W>(
    fs: &[TestFunction<T>],
    rho: T,
    dim: GroupDim,
    sampler: Sampler<T>,
    weight: W,
    n_samples: u64,
    stream: SeededStream,
) -> Result<Estimate<T>>
where
    T: Real,
    W: Fn(&[T]) -> T + Sync,
{
    let integrand = |ys: &[HPoint<T>]| -> T {
        let gauges: Vec<T> = ys.iter().map(HPoint::gauge).collect();
        let w = weight(&gauges);
        if w.is_zero() {
            return w;
        }
        fs.iter().zip(ys).zip(&gauges).fold(w, |acc, ((f, y), &g)| {
            acc * if f.is_radial() {
                f.eval_gauge(rho * g)
            } else {
                f.eval(&y.dilate_unchecked(rho))
            }
        })
    };
    mc_integrate(integrand, dim, &sampler, n_samples, stream)
}

fn omega_power<T: Real>(dim: GroupDim, convention: VolumeConvention, m: usize) -> T {
    sphere_measure::<T>(dim, convention).powi(m as i32)
}

/// The m-linear Hardy operator: the average of `Π f_i(y_i)` over the tuple
/// ball `{(Σ |y_i|²)^(1/2) < |x|}`, normalized by `Ω^m |x|^(mQ)`.
pub fn eval_hardy<T: Real>(
    fs: &[TestFunction<T>],
    x: &HPoint<T>,
    spec: &OperatorSpec<T>,
    engine: &Engine<T>,
) -> Result<Estimate<T>> {
    let s = Setup::new(fs, x, spec)?;
    s.require_local(spec.dim.q())?;
    let m = fs.len();
    match engine {
        Engine::Quad(qs) => {
            require_radial(fs)?;
            let breaks: Vec<Vec<T>> = fs.iter().enumerate().map(|(i, f)| s.u_breaks(f, i, s.rho)).collect();
            let two: T = lit(2.0);
            let limits = |k: usize, outer: &[T]| {
                let used: T = outer.iter().zip(&s.gaps).map(|(&u, &a)| u.powf(two / a)).sum();
                let hi = (T::one() - used).max(T::zero()).powf(s.gaps[k] / two);
                Segment::with_breaks(T::zero(), hi, breaks[k].clone())
            };
            let est = quad_nested(m, limits, |u: &[T]| modulation_product(fs, &s, u), qs)?;
            let q: T = from_usize(spec.dim.q());
            Ok(est.scaled(q.powi(m as i32) * s.radial_prefactor()))
        }
        Engine::MonteCarlo { n_samples, stream } => {
            let volume_m = unit_ball_volume::<T>(spec.dim, spec.convention).powi(m as i32);
            let sampler = Sampler::TupleBall(s.powers.clone());
            mc_operator(fs, s.rho, spec.dim, sampler, |_| T::one(), *n_samples, *stream)
                .map(|e| e.scaled(volume_m.recip()))
        }
    }
}

/// The m-linear Hardy–Littlewood–Pólya operator, kernel
/// `max(|x|, |y_1|, .., |y_m|)^(−mQ)` over `H^(nm)`.
///
/// Quadrature splits the domain by which argument attains the maximum:
/// the cube where `|x|` does and one region per `y_j`.
pub fn eval_hlp<T: Real>(
    fs: &[TestFunction<T>],
    x: &HPoint<T>,
    spec: &OperatorSpec<T>,
    engine: &Engine<T>,
) -> Result<Estimate<T>> {
    let s = Setup::new(fs, x, spec)?;
    s.require_local(spec.dim.q())?;
    s.require_decay()?;
    let m = fs.len();
    let q = spec.dim.q();
    match engine {
        Engine::Quad(qs) => {
            require_radial(fs)?;
            let cube_breaks: Vec<Vec<T>> = fs.iter().enumerate().map(|(i, f)| s.u_breaks(f, i, s.rho)).collect();
            let cube = quad_nested(
                m,
                |k, _| Segment::with_breaks(T::zero(), T::one(), cube_breaks[k].clone()),
                |u: &[T]| modulation_product(fs, &s, u),
                qs,
            )?;
            let gap_product = s.gaps.iter().fold(T::one(), |acc, &a| acc * a);
            let mut total = cube.value / gap_product;
            let mut evaluations = cube.n_samples;

            let p_total = s.total_power();
            let inv_p = p_total.recip();
            // largest normalized radius s = w^(−1/P), w ∈ (0, 1)
            let radius = |w: T| w.powf(-inv_p);
            for j in 0..m {
                let others: Vec<usize> = (0..m).filter(|&i| i != j).collect();
                let w_breaks: Vec<T> = fs[j].breaks().iter().map(|&b| (b / s.rho).powf(-p_total)).collect();
                let limits = |k: usize, outer: &[T]| {
                    if k == 0 {
                        Segment::with_breaks(T::zero(), T::one(), w_breaks.clone())
                    } else {
                        let i = others[k - 1];
                        let br = s.u_breaks(&fs[i], i, s.rho * radius(outer[0]));
                        Segment::with_breaks(T::zero(), T::one(), br)
                    }
                };
                let integrand = |u: &[T]| {
                    let r = s.rho * radius(u[0]);
                    others.iter().zip(&u[1..]).fold(radial(&fs[j], r), |acc, (&i, &v)| {
                        acc * radial(&fs[i], r * v.powf(s.gaps[i].recip()))
                    })
                };
                let est = quad_nested(m, limits, integrand, qs)?;
                total += est.value * s.gaps[j] / (gap_product * p_total);
                evaluations += est.n_samples;
            }
            let pre = omega_power::<T>(spec.dim, spec.convention, m)
                * s.powers.iter().fold(T::one(), |acc, &p| acc * s.rho.powf(-p));
            Ok(Estimate::quad(total * pre, evaluations))
        }
        Engine::MonteCarlo { n_samples, stream } => {
            let mq = (m * q) as i32;
            let weight = |g: &[T]| g.iter().copied().fold(T::one(), T::max).powi(mq).recip();
            let sampler = Sampler::FullSpaceHeavyTail(s.powers.clone());
            mc_operator(fs, s.rho, spec.dim, sampler, weight, *n_samples, *stream)
        }
    }
}

/// The m-linear Hilbert operator, kernel `(|x|^Q + Σ |y_i|^Q)^(−m)` over
/// `H^(nm)`.
pub fn eval_hilbert<T: Real>(
    fs: &[TestFunction<T>],
    x: &HPoint<T>,
    spec: &OperatorSpec<T>,
    engine: &Engine<T>,
) -> Result<Estimate<T>> {
    let s = Setup::new(fs, x, spec)?;
    s.require_local(spec.dim.q())?;
    s.require_decay()?;
    let m = fs.len();
    let q = spec.dim.q();
    match engine {
        Engine::Quad(qs) => {
            require_radial(fs)?;
            let qt: T = from_usize(q);
            let exps: Vec<T> = s.gaps.iter().map(|&a| qt / a).collect();
            let breaks: Vec<Vec<T>> = fs.iter().enumerate().map(|(i, f)| s.u_breaks(f, i, s.rho)).collect();
            let integrand = |u: &[T]| {
                let d = u.iter().zip(&exps).fold(T::one(), |acc, (&ui, &e)| acc + ui.powf(e));
                modulation_product(fs, &s, u) * d.powi(-(m as i32))
            };
            // the k-th variable lives at scale (1 + Σ_{j<k} u_j^(Q/a_j))^(a_k/Q)
            let limits = |k: usize, outer: &[T]| {
                let c = outer.iter().zip(&exps).fold(T::one(), |acc, (&u, &e)| acc + u.powf(e));
                let mut b = breaks[k].clone();
                b.push(c.powf(exps[k].recip()));
                Segment::with_breaks(T::zero(), T::infinity(), b)
            };
            let est = quad_nested(m, limits, integrand, qs)?;
            Ok(est.scaled(omega_power::<T>(spec.dim, spec.convention, m) * s.radial_prefactor()))
        }
        Engine::MonteCarlo { n_samples, stream } => {
            let qi = q as i32;
            let weight = |g: &[T]| g.iter().fold(T::one(), |acc, &r| acc + r.powi(qi)).powi(-(m as i32));
            let sampler = Sampler::FullSpaceHeavyTail(s.powers.clone());
            mc_operator(fs, s.rho, spec.dim, sampler, weight, *n_samples, *stream)
        }
    }
}

/// `T_m(f_1, .., f_m)(x)` for a general gauge-radial kernel, after the
/// kernel passes the homogeneity probe.
pub fn eval_kernel_op<T: Real>(
    kernel: &KernelSpec<T>,
    fs: &[TestFunction<T>],
    x: &HPoint<T>,
    spec: &OperatorSpec<T>,
    engine: &Engine<T>,
) -> Result<Estimate<T>> {
    if kernel.m() != spec.m() {
        return Err(Error::ArityMismatch {
            expected: kernel.m(),
            got: spec.m(),
        });
    }
    if kernel.dim() != spec.dim {
        return Err(Error::DimensionMismatch {
            left: kernel.dim().n(),
            right: spec.dim.n(),
        });
    }
    kernel.check_homogeneity()?;
    let s = Setup::new(fs, x, spec)?;
    s.require_local(spec.dim.q())?;
    let m = fs.len();
    let one = kernel.base_gauge();
    match engine {
        Engine::Quad(qs) => {
            require_radial(fs)?;
            kernel_quad(kernel, fs, &s, m, qs, None)
                .map(|e| e.scaled(omega_power::<T>(spec.dim, spec.convention, m) * s.radial_prefactor()))
        }
        Engine::MonteCarlo { n_samples, stream } => {
            let sampler = Sampler::FullSpaceHeavyTail(s.powers.clone());
            mc_operator(
                fs,
                s.rho,
                spec.dim,
                sampler,
                |g: &[T]| kernel.eval(one, g),
                *n_samples,
                *stream,
            )
        }
    }
}

/// `∫ K(1, u^(1/a)) Π m_i(ρ u_i^(1/a_i)) du` over `(0, ∞)^m`, or over
/// `(0, R^(a_i))` when `cutoff = Some(R)`.
fn kernel_quad<T: Real>(
    kernel: &KernelSpec<T>,
    fs: &[TestFunction<T>],
    s: &Setup<T>,
    m: usize,
    qs: &QuadSpec<T>,
    cutoff: Option<T>,
) -> Result<Estimate<T>> {
    let one = kernel.base_gauge();
    let limits = |k: usize, outer: &[T]| {
        let radii: Vec<T> = outer.iter().zip(&s.gaps).map(|(&u, &a)| u.powf(a.recip())).collect();
        let mut breaks = s.u_breaks(&fs[k], k, s.rho);
        breaks.extend(kernel.breaks(&radii).iter().map(|&b| b.powf(s.gaps[k])));
        let hi = cutoff.map_or(T::infinity(), |r| r.powf(s.gaps[k]));
        Segment::with_breaks(T::zero(), hi, breaks)
    };
    let integrand = |u: &[T]| {
        let radii: Vec<T> = u.iter().zip(&s.gaps).map(|(&ui, &a)| ui.powf(a.recip())).collect();
        let k = kernel.eval(one, &radii);
        if k.is_zero() {
            return k;
        }
        k * modulation_product(fs, s, u)
    };
    quad_nested(m, limits, integrand, qs)
}

/// `H_m = ∫ K(e_1, y) Π |y_i|^(−α_i) dy`, the norm of the kernel operator
/// from the product of weighted spaces.
///
/// A quadrature that fails to converge is followed by truncated integrals
/// over growing balls; sustained growth is reported as divergence.
pub fn kernel_constant<T: Real>(
    kernel: &KernelSpec<T>,
    profile: &AlphaProfile<T>,
    convention: VolumeConvention,
    engine: &Engine<T>,
) -> Result<Estimate<T>> {
    let dim = kernel.dim();
    if profile.m() != kernel.m() {
        return Err(Error::ArityMismatch {
            expected: kernel.m(),
            got: profile.m(),
        });
    }
    let spec = OperatorSpec::new(OperatorKind::Kernel, dim, profile.clone(), convention)?;
    let fs = spec.extremals();
    let x = HPoint::e1(dim);
    let result = eval_kernel_op(kernel, &fs, &x, &spec, engine);
    let Engine::Quad(qs) = engine else {
        return result;
    };
    match result {
        Err(Error::NonConvergence { .. } | Error::NonFiniteEvaluation { .. }) => {
            let s = Setup::new(&fs, &x, &spec)?;
            let levels: Vec<T> = [1e1, 1e2, 1e3]
                .iter()
                .map(|&r| kernel_quad(kernel, &fs, &s, fs.len(), qs, Some(lit(r))).map(|e| e.value))
                .collect::<Result<_>>()?;
            let (d1, d2) = (levels[1] - levels[0], levels[2] - levels[1]);
            if d2 > d1 * lit(0.5) && d2 > levels[2].abs() * lit(1e-6) {
                Err(Error::Divergence(format!(
                    "H_m = ∞ candidate: truncated integrals {}, {}, {} keep growing",
                    to_f64(levels[0]),
                    to_f64(levels[1]),
                    to_f64(levels[2])
                )))
            } else {
                result
            }
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::SeededStream;
    use crate::specfun::{hardy_constant, hilbert_constant, hlp_constant, i_m_closed};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn h1() -> GroupDim {
        GroupDim::new(1).unwrap()
    }

    fn spec(kind: OperatorKind, alphas: &[f64]) -> OperatorSpec<f64> {
        OperatorSpec::new(
            kind,
            h1(),
            AlphaProfile::from_f64s(alphas).unwrap(),
            VolumeConvention::Geometric,
        )
        .unwrap()
    }

    fn at_gauge(g: f64) -> HPoint<f64> {
        let p = HPoint::from_f64s(h1(), &[0.3, -0.2, 0.7]).unwrap();
        p.dilate(g / p.gauge()).unwrap()
    }

    fn quad() -> Engine<f64> {
        Engine::default()
    }

    fn mc(n: u64, seed: u64) -> Engine<f64> {
        Engine::MonteCarlo {
            n_samples: n,
            stream: SeededStream::new(seed, 0),
        }
    }

    #[test]
    fn hardy_average_of_constant_is_one() {
        let sp = spec(OperatorKind::Hardy, &[1.0]);
        let one = TestFunction::modulated(0.0, Modulation::constant(1.0).unwrap());
        for g in [0.3, 1.0, 7.0] {
            let v = eval_hardy(std::slice::from_ref(&one), &at_gauge(g), &sp, &quad()).unwrap();
            assert_relative_eq!(v.value, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn hardy_examples() {
        let sp = spec(OperatorKind::Hardy, &[1.0]);
        let v = eval_hardy(&sp.extremals(), &HPoint::e1(h1()), &sp, &quad()).unwrap();
        assert_relative_eq!(v.value, 4.0 / 3.0, max_relative = 1e-12);
        let sp = spec(OperatorKind::Hardy, &[1.0, 1.0]);
        let v = eval_hardy(&sp.extremals(), &at_gauge(2.0), &sp, &quad()).unwrap();
        assert_relative_eq!(4.0 * v.value, PI / 6.0, max_relative = 1e-9);
    }

    #[test]
    fn hlp_examples() {
        let sp = spec(OperatorKind::Hlp, &[1.0]);
        let v1 = eval_hlp(&sp.extremals(), &HPoint::e1(h1()), &sp, &quad()).unwrap();
        assert_relative_eq!(v1.value, 8.0 * PI * PI / 3.0, max_relative = 1e-10);
        let v2 = eval_hlp(&sp.extremals(), &at_gauge(2.0), &sp, &quad()).unwrap();
        assert_relative_eq!(2.0 * v2.value, v1.value, max_relative = 1e-10);
        let sp = spec(OperatorKind::Hlp, &[1.0, 1.0]);
        let v = eval_hlp(&sp.extremals(), &HPoint::e1(h1()), &sp, &quad()).unwrap();
        let closed = hlp_constant(h1(), &sp.profile, VolumeConvention::Geometric)
            .unwrap()
            .value;
        assert_relative_eq!(v.value, closed, max_relative = 1e-9);
        assert_relative_eq!(closed, 16.0 * PI.powi(4) / 9.0, max_relative = 1e-12);
    }

    #[test]
    fn hilbert_examples() {
        let sp = spec(OperatorKind::Hilbert, &[2.0]);
        let v = eval_hilbert(&sp.extremals(), &HPoint::e1(h1()), &sp, &quad()).unwrap();
        assert_relative_eq!(v.value, PI.powi(3) / 2.0, max_relative = 1e-10);
        let printed = OperatorSpec {
            convention: VolumeConvention::PaperFormula,
            ..sp.clone()
        };
        let v = eval_hilbert(&printed.extremals(), &HPoint::e1(h1()), &printed, &quad()).unwrap();
        assert_relative_eq!(v.value, PI.powi(3), max_relative = 1e-10);

        let sp = spec(OperatorKind::Hilbert, &[1.0, 1.0]);
        let v = eval_hilbert(&sp.extremals(), &HPoint::e1(h1()), &sp, &quad()).unwrap();
        let omega = 2.0 * PI * PI;
        let expected = (omega / 4.0).powi(2) * i_m_closed(2.0, &[0.25, 0.25]).unwrap();
        assert_relative_eq!(v.value, expected, max_relative = 1e-8);
        let closed = hilbert_constant(h1(), &sp.profile, VolumeConvention::Geometric)
            .unwrap()
            .value;
        assert_relative_eq!(closed, expected, max_relative = 1e-12);
    }

    #[test]
    fn monte_carlo_matches_quadrature() {
        let cases = [
            (OperatorKind::Hardy, vec![1.0]),
            (OperatorKind::Hlp, vec![1.0]),
            (OperatorKind::Hilbert, vec![2.0]),
            (OperatorKind::Hardy, vec![1.0, 1.0]),
        ];
        for (kind, alphas) in cases {
            let sp = spec(kind, &alphas);
            let fs = sp.extremals();
            let x = at_gauge(1.5);
            let eval = |e: &Engine<f64>| match kind {
                OperatorKind::Hardy => eval_hardy(&fs, &x, &sp, e),
                OperatorKind::Hlp => eval_hlp(&fs, &x, &sp, e),
                _ => eval_hilbert(&fs, &x, &sp, e),
            };
            let q = eval(&quad()).unwrap();
            let m = eval(&mc(200_000, 3)).unwrap();
            assert!(
                (m.value - q.value).abs() <= 4.0 * m.std_error,
                "{kind:?}: mc {} ± {} vs quad {}",
                m.value,
                m.std_error,
                q.value
            );
        }
    }

    #[test]
    fn step_modulations_use_breaks() {
        let sp = spec(OperatorKind::Hardy, &[1.0]);
        let step = Modulation::step(vec![0.5], vec![1.0, 0.5]).unwrap();
        let f = TestFunction::modulated(1.0, step);
        // ∫_0^1 4 s² m(s) ds with m = 1 below 1/2 and 1/2 above
        let expected = 4.0 * (0.125 / 3.0 + 0.5 * (1.0 - 0.125) / 3.0);
        let v = eval_hardy(&[f], &HPoint::e1(h1()), &sp, &quad()).unwrap();
        assert_relative_eq!(v.value, expected, max_relative = 1e-12);
    }

    #[test]
    fn kernel_specializations() {
        let x = at_gauge(1.7);
        let hardy = spec(OperatorKind::Hardy, &[1.0, 1.5]);
        let k = KernelSpec::hardy(h1(), 2, VolumeConvention::Geometric).unwrap();
        let a = eval_kernel_op(&k, &hardy.extremals(), &x, &hardy, &quad()).unwrap();
        let b = eval_hardy(&hardy.extremals(), &x, &hardy, &quad()).unwrap();
        assert_relative_eq!(a.value, b.value, max_relative = 1e-8);

        let hlp = spec(OperatorKind::Hlp, &[1.0]);
        let k = KernelSpec::hlp(h1(), 1).unwrap();
        let a = eval_kernel_op(&k, &hlp.extremals(), &x, &hlp, &quad()).unwrap();
        let b = eval_hlp(&hlp.extremals(), &x, &hlp, &quad()).unwrap();
        assert_relative_eq!(a.value, b.value, max_relative = 1e-8);

        let c = eval_kernel_op(&k.scaled(2.5), &hlp.extremals(), &x, &hlp, &quad()).unwrap();
        assert_relative_eq!(c.value, 2.5 * a.value, max_relative = 1e-12);
    }

    #[test]
    fn kernel_constants() {
        let k = KernelSpec::hardy(h1(), 1, VolumeConvention::Geometric).unwrap();
        let p = AlphaProfile::from_f64s(&[1.0]).unwrap();
        let v = kernel_constant(&k, &p, VolumeConvention::Geometric, &quad()).unwrap();
        assert_relative_eq!(v.value, 4.0 / 3.0, max_relative = 1e-10);
        let closed = hardy_constant(h1(), &p, VolumeConvention::Geometric).unwrap().value;
        assert_relative_eq!(v.value, closed, max_relative = 1e-10);

        let k = KernelSpec::hilbert(h1(), 1).unwrap();
        let p = AlphaProfile::from_f64s(&[2.0]).unwrap();
        let v = kernel_constant(&k, &p, VolumeConvention::Geometric, &quad()).unwrap();
        assert_relative_eq!(v.value, PI.powi(3) / 2.0, max_relative = 1e-10);

        let p = AlphaProfile::from_f64s(&[4.5]).unwrap();
        assert!(matches!(
            kernel_constant(&k, &p, VolumeConvention::Geometric, &quad()),
            Err(Error::DivergentConstant(_))
        ));
    }

    #[test]
    fn non_integrable_kernel_is_flagged() {
        // degree −Q but no decay in y: K(1, s) = 1
        let flat: RadialProfile<f64> = Arc::new(|r0: f64, _: &[f64]| r0.powi(-4));
        let k = KernelSpec::new(h1(), 1, "flat", flat).unwrap();
        let p = AlphaProfile::from_f64s(&[1.0]).unwrap();
        let e = kernel_constant(&k, &p, VolumeConvention::Geometric, &quad()).unwrap_err();
        assert!(e.to_string().contains("candidate"), "{e}");
        assert!(matches!(e, Error::Divergence(_)), "{e}");
    }

    #[test]
    fn errors() {
        let sp = spec(OperatorKind::Hardy, &[1.0]);
        let fs = sp.extremals();
        assert!(matches!(
            eval_hardy(&fs, &HPoint::origin(h1()), &sp, &quad()),
            Err(Error::EvaluationAtOrigin)
        ));
        let g: PointFn<f64> = Arc::new(|x: &HPoint<f64>| x.gauge().recip());
        let pw = TestFunction::pointwise(1.0, "1/|x|", g);
        assert!(matches!(
            eval_hardy(std::slice::from_ref(&pw), &HPoint::e1(h1()), &sp, &quad()),
            Err(Error::EngineMismatch(_))
        ));
        let v = eval_hardy(&[pw], &HPoint::e1(h1()), &sp, &mc(100_000, 1)).unwrap();
        assert!((v.value - 4.0 / 3.0).abs() < 4.0 * v.std_error + 1e-9);
        assert!(matches!(
            eval_hardy(&[], &HPoint::e1(h1()), &sp, &quad()),
            Err(Error::ArityMismatch { .. })
        ));
        let big = TestFunction::extremal(4.0);
        assert!(matches!(
            eval_hlp(&[big], &HPoint::e1(h1()), &spec(OperatorKind::Hlp, &[1.0]), &quad()),
            Err(Error::Divergence(_))
        ));
        let bad = k_bad();
        let e = eval_kernel_op(&bad, &fs, &HPoint::e1(h1()), &sp, &quad()).unwrap_err();
        assert!(matches!(e, Error::HomogeneityProbe { .. }));
    }

    fn k_bad() -> KernelSpec<f64> {
        let p: RadialProfile<f64> = Arc::new(|r0: f64, rs: &[f64]| (r0 + rs[0]).powi(-2));
        KernelSpec::new(h1(), 1, "degree -2", p).unwrap()
    }

    #[test]
    fn single_precision_evaluation() {
        let sp = OperatorSpec::<f32>::new(
            OperatorKind::Hardy,
            h1(),
            AlphaProfile::new(vec![1.0f32]).unwrap(),
            VolumeConvention::Geometric,
        )
        .unwrap();
        let e = Engine::Quad(QuadSpec::new(1e-5, 1e-7, 500).unwrap());
        let v = eval_hardy(&sp.extremals(), &HPoint::e1(h1()), &sp, &e).unwrap();
        assert!((v.value - 4.0 / 3.0).abs() < 1e-5);
    }
}
