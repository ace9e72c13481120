//! Globally adaptive 15-point Gauss–Kronrod quadrature.
//!
//! The panel with the largest error estimate is bisected until the summed
//! estimate falls below `max(abs_tol, rel_tol · |value|)`. Error estimates
//! follow the QUADPACK `qk15` heuristic. A semi-infinite range `[a, ∞)` is
//! mapped by `x = a + t/(1 − t)`; the half `t > 1/2` is integrated in the
//! complementary variable `s = 1 − t` so that panels accumulating at infinity
//! keep full floating-point resolution.

use std::cell::{Cell, RefCell};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::integrate::Estimate;
use crate::scalar::{lit, to_f64, Real};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Error control for the adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Bisections allowed per one-dimensional integral.
    pub max_subdivisions: usize,
}

impl<T: Real> QuadSpec<T> {
    pub fn new(rel_tol: T, abs_tol: T, max_subdivisions: usize) -> Result<Self> {
        for (name, v) in [("rel_tol", rel_tol), ("abs_tol", abs_tol)] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::NonPositive { name, value: to_f64(v) });
            }
        }
        Ok(Self {
            rel_tol,
            abs_tol,
            max_subdivisions,
        })
    }

    pub fn with_rel_tol(rel_tol: T) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    fn tolerance(&self, value: T) -> T {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

impl<T: Real> Default for QuadSpec<T> {
    fn default() -> Self {
        Self {
            rel_tol: lit(1e-10),
            abs_tol: T::min_positive_value(),
            max_subdivisions: 2000,
        }
    }
}

/// Integration range of one variable; `hi` may be `+∞`. Breaks are interior
/// points where the integrand is known to jump or kink.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment<T> {
    pub lo: T,
    pub hi: T,
    pub breaks: Vec<T>,
}

impl<T: Real> Segment<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Self {
            lo,
            hi,
            breaks: Vec::new(),
        }
    }

    pub fn with_breaks(lo: T, hi: T, breaks: Vec<T>) -> Self {
        Self { lo, hi, breaks }
    }
}

/// Integration domains for [`quad_tensor`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// `(0, 1)^m`.
    UnitCube,
    /// `(0, ∞)^m`, each axis mapped by `t/(1 − t)`.
    PositiveOrthant,
    /// `{x_i > 0, Σ x_i² < 1}`.
    SimplexBall,
}

struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
    piece: usize,
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real> Eq for Panel<T> {}
impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

pub(crate) struct Outcome<T> {
    pub value: T,
    pub error: T,
    pub evaluations: u64,
    pub subdivisions: usize,
    pub converged: bool,
}

type Piece<'a, T> = &'a dyn Fn(T) -> T;

fn gk15<T: Real>(f: Piece<'_, T>, a: T, b: T, map: &dyn Fn(T) -> T) -> Result<(T, T)> {
    let half: T = lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let eval = |x: T| -> Result<T> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteEvaluation {
                point: vec![to_f64(map(x))],
            })
        }
    };
    let fc = eval(center)?;
    let mut res_k = fc * lit(WGK[7]);
    let mut res_g = fc * lit(WG[3]);
    let mut res_abs = res_k.abs();
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = half_len * lit(XGK[j]);
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        let w: T = lit(WGK[j]);
        res_k += w * (f1 + f2);
        res_abs += w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += lit::<T>(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = res_k * half;
    let mut res_asc = lit::<T>(WGK[7]) * (fc - mean).abs();
    for j in 0..7 {
        res_asc += lit::<T>(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half_len.abs();
    let value = res_k * half_len;
    res_abs *= h;
    res_asc *= h;
    let mut err = ((res_k - res_g) * half_len).abs();
    if !res_asc.is_zero() && !err.is_zero() {
        let scale = (lit::<T>(200.0) * err / res_asc).powf(lit(1.5));
        err = if scale < T::one() { res_asc * scale } else { res_asc };
    }
    let eps = T::epsilon();
    if res_abs > T::min_positive_value() / (lit::<T>(50.0) * eps) {
        err = err.max(lit::<T>(50.0) * eps * res_abs);
    }
    Ok((value, err))
}

fn can_bisect<T: Real>(a: T, b: T) -> bool {
    let mid = lit::<T>(0.5) * (a + b);
    let scale = a.abs().max(b.abs()).max(T::min_positive_value());
    mid > a && mid < b && (b - a) > lit::<T>(16.0) * T::epsilon() * scale
}

/// Global adaptive loop over a set of `(piece, a, b)` panels. `maps[piece]`
/// converts a panel coordinate back into the user's variable for diagnostics.
fn adaptive<T: Real>(
    pieces: &[Piece<'_, T>],
    maps: &[&dyn Fn(T) -> T],
    initial: &[(usize, T, T)],
    spec: &QuadSpec<T>,
) -> Result<Outcome<T>> {
    let mut heap = BinaryHeap::new();
    let mut frozen_value = T::zero();
    let mut frozen_error = T::zero();
    let mut evaluations = 0u64;
    for &(piece, a, b) in initial {
        if !(b > a) {
            continue;
        }
        let (value, error) = gk15(pieces[piece], a, b, maps[piece])?;
        evaluations += 15;
        heap.push(Panel {
            a,
            b,
            value,
            error,
            piece,
        });
    }
    let totals = |heap: &BinaryHeap<Panel<T>>, fv: T, fe: T| -> (T, T) {
        heap.iter().fold((fv, fe), |(v, e), p| (v + p.value, e + p.error))
    };
    let (mut value, mut error) = totals(&heap, frozen_value, frozen_error);
    let mut subdivisions = 0usize;
    loop {
        if error <= spec.tolerance(value) {
            break;
        }
        if subdivisions >= spec.max_subdivisions {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        if !can_bisect(worst.a, worst.b) {
            frozen_value += worst.value;
            frozen_error += worst.error;
            continue;
        }
        let mid = lit::<T>(0.5) * (worst.a + worst.b);
        let f = pieces[worst.piece];
        let map = maps[worst.piece];
        let (v1, e1) = gk15(f, worst.a, mid, map)?;
        let (v2, e2) = gk15(f, mid, worst.b, map)?;
        evaluations += 30;
        subdivisions += 1;
        value = value - worst.value + v1 + v2;
        error = error - worst.error + e1 + e2;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            piece: worst.piece,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            piece: worst.piece,
        });
        if subdivisions.is_multiple_of(64) {
            (value, error) = totals(&heap, frozen_value, frozen_error);
        }
    }
    let (value, error) = totals(&heap, frozen_value, frozen_error);
    Ok(Outcome {
        value,
        error,
        evaluations,
        subdivisions,
        converged: error <= spec.tolerance(value),
    })
}

/// Integrates `f` over a segment, mapping an infinite upper limit.
pub(crate) fn integrate_segment<T: Real>(
    f: &dyn Fn(T) -> T,
    seg: &Segment<T>,
    spec: &QuadSpec<T>,
) -> Result<Outcome<T>> {
    let (lo, hi) = (seg.lo, seg.hi);
    if !lo.is_finite() || hi.is_nan() {
        return Err(Error::ConvergenceCondition(format!(
            "unsupported integration range ({lo}, {hi})"
        )));
    }
    let mut breaks: Vec<T> = seg
        .breaks
        .iter()
        .copied()
        .filter(|&x| x > lo && x < hi && x.is_finite())
        .collect();
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    breaks.dedup();

    if hi.is_finite() {
        if !(hi >= lo) {
            return Err(Error::ConvergenceCondition(format!(
                "lower limit {lo} exceeds upper limit {hi}"
            )));
        }
        let mut initial = Vec::with_capacity(breaks.len() + 1);
        let mut a = lo;
        for &x in &breaks {
            initial.push((0, a, x));
            a = x;
        }
        initial.push((0, a, hi));
        let id = |x: T| x;
        return adaptive(&[f], &[&id], &initial, spec);
    }

    let one = T::one();
    let half: T = lit(0.5);
    // t ∈ (0, 1/2): x = lo + t/(1 − t);  s ∈ (0, 1/2): x = lo + (1 − s)/s
    let near = move |t: T| {
        let u = one - t;
        f(lo + t / u) / (u * u)
    };
    let far = move |s: T| f(lo + (one - s) / s) / (s * s);
    let near_map = move |t: T| lo + t / (one - t);
    let far_map = move |s: T| lo + (one - s) / s;
    let mut near_cuts = vec![T::zero()];
    let mut far_cuts = vec![T::zero()];
    for &x in &breaks {
        let d = x - lo;
        if d <= one {
            near_cuts.push(d / (one + d));
        } else {
            far_cuts.push(one / (one + d));
        }
    }
    near_cuts.push(half);
    far_cuts.push(half);
    far_cuts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let mut initial = Vec::new();
    for w in near_cuts.windows(2) {
        initial.push((0, w[0], w[1]));
    }
    for w in far_cuts.windows(2) {
        initial.push((1, w[0], w[1]));
    }
    adaptive(&[&near, &far], &[&near_map, &far_map], &initial, spec)
}

fn finish<T: Real>(out: Outcome<T>) -> Result<Estimate<T>> {
    if out.converged {
        Ok(Estimate::quad(out.value, out.evaluations))
    } else {
        Err(Error::NonConvergence {
            estimate: to_f64(out.value),
            error: to_f64(out.error),
            subdivisions: out.subdivisions,
        })
    }
}

/// `∫_a^b f`, with `b` possibly `+∞`.
pub fn quad_1d<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, spec: &QuadSpec<T>) -> Result<Estimate<T>> {
    quad_1d_with_breaks(f, a, b, &[], spec)
}

/// As [`quad_1d`], with the range pre-split at `breaks`.
pub fn quad_1d_with_breaks<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    breaks: &[T],
    spec: &QuadSpec<T>,
) -> Result<Estimate<T>> {
    let seg = Segment::with_breaks(a, b, breaks.to_vec());
    finish(integrate_segment(&f, &seg, spec)?)
}

struct Nested<'a, T, L, F> {
    depth: usize,
    limits: &'a L,
    f: &'a F,
    spec: &'a QuadSpec<T>,
    prefix: RefCell<Vec<T>>,
    failure: RefCell<Option<Error>>,
    inner_unconverged: Cell<usize>,
    evaluations: Cell<u64>,
}

impl<T, L, F> Nested<'_, T, L, F>
where
    T: Real,
    L: Fn(usize, &[T]) -> Segment<T>,
    F: Fn(&[T]) -> T,
{
    fn level(&self, level: usize) -> Result<Outcome<T>> {
        let seg = {
            let prefix = self.prefix.borrow();
            (self.limits)(level, &prefix[..level])
        };
        let g = |x: T| -> T {
            if self.failure.borrow().is_some() {
                return T::zero();
            }
            {
                let mut p = self.prefix.borrow_mut();
                p.truncate(level);
                p.push(x);
            }
            if level + 1 == self.depth {
                self.evaluations.set(self.evaluations.get() + 1);
                let p = self.prefix.borrow();
                let v = (self.f)(&p);
                if !v.is_finite() {
                    *self.failure.borrow_mut() = Some(Error::NonFiniteEvaluation {
                        point: p.iter().map(|&c| to_f64(c)).collect(),
                    });
                    return T::zero();
                }
                v
            } else {
                match self.level(level + 1) {
                    Ok(out) => {
                        if !out.converged {
                            self.inner_unconverged.set(self.inner_unconverged.get() + 1);
                        }
                        out.value
                    }
                    Err(e) => {
                        *self.failure.borrow_mut() = Some(e);
                        T::zero()
                    }
                }
            }
        };
        if seg.hi <= seg.lo {
            return Ok(Outcome {
                value: T::zero(),
                error: T::zero(),
                evaluations: 0,
                subdivisions: 0,
                converged: true,
            });
        }
        integrate_segment(&g, &seg, self.spec)
    }
}

/// Iterated integral over a region described level by level:
/// `limits(k, &x[..k])` gives the range of `x_k` given the outer variables.
///
/// Inner integrals run with the same tolerances. Any inner integral that
/// fails to converge makes the whole result a non-convergence error.
pub fn quad_nested<T, L, F>(depth: usize, limits: L, f: F, spec: &QuadSpec<T>) -> Result<Estimate<T>>
where
    T: Real,
    L: Fn(usize, &[T]) -> Segment<T>,
    F: Fn(&[T]) -> T,
{
    if depth == 0 {
        return Err(Error::ConvergenceCondition("nested quadrature needs depth >= 1".into()));
    }
    let ctx = Nested {
        depth,
        limits: &limits,
        f: &f,
        spec,
        prefix: RefCell::new(Vec::with_capacity(depth)),
        failure: RefCell::new(None),
        inner_unconverged: Cell::new(0),
        evaluations: Cell::new(0),
    };
    let out = ctx.level(0)?;
    if let Some(e) = ctx.failure.into_inner() {
        return Err(e);
    }
    if !out.converged || ctx.inner_unconverged.get() > 0 {
        return Err(Error::NonConvergence {
            estimate: to_f64(out.value),
            error: to_f64(out.error),
            subdivisions: out.subdivisions,
        });
    }
    Ok(Estimate::quad(out.value, ctx.evaluations.get()))
}

/// Iterated adaptive quadrature over a standard domain in `m ≤ 3` variables.
pub fn quad_tensor<T, F>(f: F, m: usize, domain: Domain, spec: &QuadSpec<T>) -> Result<Estimate<T>>
where
    T: Real,
    F: Fn(&[T]) -> T,
{
    if m == 0 || m > 3 {
        return Err(Error::ConvergenceCondition(format!(
            "tensor quadrature supports 1 <= m <= 3, got {m}"
        )));
    }
    let limits = move |_: usize, outer: &[T]| -> Segment<T> {
        match domain {
            Domain::UnitCube => Segment::new(T::zero(), T::one()),
            Domain::PositiveOrthant => Segment::new(T::zero(), T::infinity()),
            Domain::SimplexBall => {
                let used: T = outer.iter().map(|&x| x * x).sum();
                Segment::new(T::zero(), (T::one() - used).max(T::zero()).sqrt())
            }
        }
    };
    quad_nested(m, limits, f, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn spec() -> QuadSpec<f64> {
        QuadSpec::default()
    }

    #[test]
    fn polynomial_examples() {
        let e = quad_1d(|r: f64| r * r * r, 0.0, 1.0, &spec()).unwrap();
        assert_relative_eq!(e.value, 0.25, max_relative = 1e-14);
        assert_eq!(e.std_error, 0.0);
        assert_eq!(e.method, super::super::Method::Quad);
        // radial integral ∫_0^1 r^(Q−α−1) dr with Q = 4, α = 1
        let e = quad_1d(|r: f64| r * r, 0.0, 1.0, &spec()).unwrap();
        assert_relative_eq!(e.value, 1.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn infinite_range() {
        let e = quad_1d(|r: f64| r / (1.0 + r.powi(4)), 0.0, f64::INFINITY, &spec()).unwrap();
        assert_relative_eq!(e.value, PI / 4.0, max_relative = 1e-10);
        let e = quad_1d(|r: f64| r.powi(-2), 1.0, f64::INFINITY, &spec()).unwrap();
        assert_relative_eq!(e.value, 1.0, max_relative = 1e-12);
        let e = quad_1d(|r: f64| (-r).exp(), 0.0, f64::INFINITY, &spec()).unwrap();
        assert_relative_eq!(e.value, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn endpoint_singularity() {
        let e = quad_1d(|r: f64| r.powf(-0.5), 0.0, 1.0, &spec()).unwrap();
        assert_relative_eq!(e.value, 2.0, max_relative = 1e-10);
        let e = quad_1d(|r: f64| r.powf(-0.9), 0.0, 1.0, &QuadSpec::with_rel_tol(1e-8)).unwrap();
        assert_relative_eq!(e.value, 10.0, max_relative = 1e-8);
    }

    #[test]
    fn beta_type_integral_both_ends() {
        // ∫_0^∞ dt / ((1+t)² √t) = B(1/2, 3/2) = π/2
        let e = quad_1d(
            |t: f64| 1.0 / ((1.0 + t).powi(2) * t.sqrt()),
            0.0,
            f64::INFINITY,
            &spec(),
        )
        .unwrap();
        assert_relative_eq!(e.value, PI / 2.0, max_relative = 1e-10);
    }

    #[test]
    fn breaks_handle_jumps() {
        let step = |x: f64| if x < 0.3 { 1.0 } else { 0.25 };
        let e = quad_1d_with_breaks(step, 0.0, 1.0, &[0.3], &spec()).unwrap();
        assert_relative_eq!(e.value, 0.3 + 0.7 * 0.25, max_relative = 1e-14);
        let tail = |x: f64| if x < 3.0 { 1.0 / (1.0 + x * x) } else { 0.0 };
        let e = quad_1d_with_breaks(tail, 0.0, f64::INFINITY, &[3.0], &spec()).unwrap();
        assert_relative_eq!(e.value, 3f64.atan(), max_relative = 1e-12);
    }

    #[test]
    fn non_convergence_carries_estimate() {
        let tight = QuadSpec::new(1e-15, 1e-300, 3).unwrap();
        match quad_1d(|x: f64| x.powf(-0.5), 0.0, 1.0, &tight) {
            Err(Error::NonConvergence { estimate, .. }) => assert!((estimate - 2.0).abs() < 0.5),
            other => panic!("expected non-convergence, got {other:?}"),
        }
        assert!(QuadSpec::new(0.0, 1e-10, 10).is_err());
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let r = quad_1d(|x: f64| if x > 0.5 { f64::NAN } else { 1.0 }, 0.0, 1.0, &spec());
        assert!(matches!(r, Err(Error::NonFiniteEvaluation { .. })));
    }

    #[test]
    fn tensor_examples() {
        let e = quad_tensor(|_: &[f64]| 1.0, 2, Domain::SimplexBall, &spec()).unwrap();
        assert_relative_eq!(e.value, PI / 4.0, max_relative = 1e-9);
        let e = quad_tensor(|r: &[f64]| (r[0] * r[1]).powi(2), 2, Domain::SimplexBall, &spec()).unwrap();
        assert_relative_eq!(e.value, PI / 96.0, max_relative = 1e-9);
        let f = |t: &[f64]| 1.0 / ((t[0] * t[1]).sqrt() * (1.0 + t[0] + t[1]).powi(2));
        let e = quad_tensor(f, 2, Domain::PositiveOrthant, &QuadSpec::with_rel_tol(1e-8)).unwrap();
        assert_relative_eq!(e.value, PI, max_relative = 1e-7);
        let e = quad_tensor(|x: &[f64]| x[0] * x[1] * x[2], 3, Domain::UnitCube, &spec()).unwrap();
        assert_relative_eq!(e.value, 0.125, max_relative = 1e-13);
        // volume of the positive octant of the unit ball
        let e = quad_tensor(|_: &[f64]| 1.0, 3, Domain::SimplexBall, &QuadSpec::with_rel_tol(1e-8)).unwrap();
        assert_relative_eq!(e.value, PI / 6.0, max_relative = 1e-7);
        assert!(quad_tensor(|_: &[f64]| 1.0, 4, Domain::UnitCube, &spec()).is_err());
    }

    #[test]
    fn single_precision() {
        let s = QuadSpec::<f32>::with_rel_tol(1e-5);
        let e = quad_1d(|r: f32| r * r, 0.0, 1.0, &s).unwrap();
        assert!((e.value - 1.0 / 3.0).abs() < 1e-6);
    }
}
