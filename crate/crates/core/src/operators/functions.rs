use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hgroup::{GroupDim, HPoint};
use crate::integrate::{sample_sphere_direction, SeededStream};
use crate::scalar::{lit, to_f64, Real};

pub type RadialFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
pub type PointFn<T> = Arc<dyn Fn(&HPoint<T>) -> T + Send + Sync>;

/// Gauge grid used for supremum estimates: log-spaced, inclusive ends.
pub const NORM_GRID_POINTS: usize = 10_000;
pub const NORM_GRID_MIN: f64 = 1e-6;
pub const NORM_GRID_MAX: f64 = 1e6;
const NORM_GRID_DIRECTIONS: usize = 16;

/// Bounded radial factor with values in `(0, 1]`.
#[derive(Clone)]
pub enum Modulation<T> {
    Constant(T),
    /// `r / (1 + r)`.
    Saturating,
    /// `values[k]` on `[edges[k-1], edges[k])`, with `edges` strictly increasing
    /// and `values.len() == edges.len() + 1`.
    Step {
        edges: Vec<T>,
        values: Vec<T>,
    },
    Radial(RadialFn<T>),
}

impl<T: Real> Modulation<T> {
    pub fn constant(c: T) -> Result<Self> {
        check_level(c)?;
        Ok(Modulation::Constant(c))
    }

    pub fn step(edges: Vec<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != edges.len() + 1 {
            return Err(Error::InvalidProfile(format!(
                "step modulation needs {} values for {} edges, got {}",
                edges.len() + 1,
                edges.len(),
                values.len()
            )));
        }
        if edges.iter().any(|&e| !(e > T::zero() && e.is_finite())) || edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidProfile(
                "step edges must be positive, finite and strictly increasing".into(),
            ));
        }
        for &v in &values {
            check_level(v)?;
        }
        Ok(Modulation::Step { edges, values })
    }

    pub fn eval(&self, r: T) -> T {
        match self {
            Modulation::Constant(c) => *c,
            Modulation::Saturating => (T::one() + r.recip()).recip(),
            Modulation::Step { edges, values } => values[edges.partition_point(|&e| e <= r)],
            Modulation::Radial(g) => g(r),
        }
    }

    /// Gauges where the modulation jumps.
    pub fn breaks(&self) -> &[T] {
        match self {
            Modulation::Step { edges, .. } => edges,
            _ => &[],
        }
    }

    /// The supremum when it is known in closed form.
    pub fn exact_sup(&self) -> Option<T> {
        match self {
            Modulation::Constant(c) => Some(*c),
            Modulation::Step { values, .. } => values.iter().copied().reduce(T::max),
            _ => None,
        }
    }
}

fn check_level<T: Real>(c: T) -> Result<()> {
    if c > T::zero() && c <= T::one() {
        Ok(())
    } else {
        Err(Error::InvalidProfile(format!(
            "modulation values must lie in (0, 1], got {c}"
        )))
    }
}

impl<T: Real> fmt::Debug for Modulation<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<T: Real> fmt::Display for Modulation<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modulation::Constant(c) => write!(f, "{c}"),
            Modulation::Saturating => write!(f, "r/(1+r)"),
            Modulation::Step { edges, values } => {
                let e: Vec<String> = edges.iter().map(|x| format!("{x:.4}")).collect();
                let v: Vec<String> = values.iter().map(|x| format!("{x:.4}")).collect();
                write!(f, "step(edges=[{}], values=[{}])", e.join(","), v.join(","))
            }
            Modulation::Radial(_) => write!(f, "radial(..)"),
        }
    }
}

#[derive(Clone)]
pub enum TestFunctionKind<T> {
    /// `|x|^(−α_j)`, zero at the origin.
    ExtremalPower(T),
    /// `|x|^(−α_j) · modulation(|x|)`.
    ModulatedPower(T, Modulation<T>),
    /// An arbitrary nonnegative function. `power` is the decay rate at the
    /// origin used to tilt Monte Carlo proposals; only the MC engine accepts it.
    Pointwise { power: T, f: PointFn<T> },
}

#[derive(Clone)]
pub struct TestFunction<T> {
    pub kind: TestFunctionKind<T>,
    pub description: String,
}

impl<T: Real> fmt::Debug for TestFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.description)
    }
}

impl<T: Real> Serialize for TestFunction<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.description)
    }
}

impl<T: Real> TestFunction<T> {
    pub fn extremal(alpha: T) -> Self {
        Self {
            kind: TestFunctionKind::ExtremalPower(alpha),
            description: format!("|x|^-{alpha}"),
        }
    }

    pub fn modulated(alpha: T, modulation: Modulation<T>) -> Self {
        Self {
            description: format!("|x|^-{alpha} * {modulation}"),
            kind: TestFunctionKind::ModulatedPower(alpha, modulation),
        }
    }

    pub fn pointwise(power: T, description: impl Into<String>, f: PointFn<T>) -> Self {
        Self {
            kind: TestFunctionKind::Pointwise { power, f },
            description: description.into(),
        }
    }

    /// Exponent of the power part; the MC tilt for pointwise functions.
    pub fn power(&self) -> T {
        match &self.kind {
            TestFunctionKind::ExtremalPower(a) | TestFunctionKind::ModulatedPower(a, _) => *a,
            TestFunctionKind::Pointwise { power, .. } => *power,
        }
    }

    pub fn is_radial(&self) -> bool {
        !matches!(self.kind, TestFunctionKind::Pointwise { .. })
    }

    /// `f(x) · |x|^power` as a function of the gauge, for radial kinds.
    pub fn radial_factor(&self, r: T) -> Option<T> {
        match &self.kind {
            TestFunctionKind::ExtremalPower(_) => Some(T::one()),
            TestFunctionKind::ModulatedPower(_, m) => Some(m.eval(r)),
            TestFunctionKind::Pointwise { .. } => None,
        }
    }

    pub fn breaks(&self) -> &[T] {
        match &self.kind {
            TestFunctionKind::ModulatedPower(_, m) => m.breaks(),
            _ => &[],
        }
    }

    /// Value at a gauge `r > 0`, for radial kinds.
    pub(crate) fn eval_gauge(&self, r: T) -> T {
        match &self.kind {
            TestFunctionKind::ExtremalPower(a) => r.powf(-*a),
            TestFunctionKind::ModulatedPower(a, m) => r.powf(-*a) * m.eval(r),
            TestFunctionKind::Pointwise { .. } => T::nan(),
        }
    }

    pub fn eval(&self, x: &HPoint<T>) -> T {
        if x.is_origin() {
            return T::zero();
        }
        match &self.kind {
            TestFunctionKind::Pointwise { f, .. } => f(x),
            _ => self.eval_gauge(x.gauge()),
        }
    }
}

/// How a weighted norm was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormQuality {
    Exact,
    /// Supremum over the radial gauge grid.
    Grid,
    /// Supremum over the gauge grid and a finite direction set.
    LowerBound,
}

fn gauge_grid<T: Real>() -> impl Iterator<Item = T> {
    let (lo, hi) = (NORM_GRID_MIN.log10(), NORM_GRID_MAX.log10());
    let last = (NORM_GRID_POINTS - 1) as f64;
    (0..NORM_GRID_POINTS).map(move |k| lit(10f64.powf(lo + (hi - lo) * k as f64 / last)))
}

/// `ess sup |x|^α |f(x)|` together with how it was computed.
pub fn weighted_norm_estimate<T: Real>(f: &TestFunction<T>, alpha: T, dim: GroupDim) -> Result<(T, NormQuality)> {
    if !(alpha > T::zero() && alpha.is_finite()) {
        return Err(Error::NonPositive {
            name: "alpha",
            value: to_f64(alpha),
        });
    }
    match &f.kind {
        TestFunctionKind::ExtremalPower(a) => {
            let v = if alpha == *a { T::one() } else { T::infinity() };
            Ok((v, NormQuality::Exact))
        }
        TestFunctionKind::ModulatedPower(a, m) => {
            if alpha == *a {
                if let Some(s) = m.exact_sup() {
                    return Ok((s, NormQuality::Exact));
                }
            }
            let sup = gauge_grid::<T>()
                .map(|r| r.powf(alpha - *a) * m.eval(r))
                .fold(T::zero(), T::max);
            Ok((sup, NormQuality::Grid))
        }
        TestFunctionKind::Pointwise { f: g, .. } => {
            let mut rng = SeededStream::new(0x6e6f726d, 0).rng();
            let dirs: Vec<HPoint<T>> = (0..NORM_GRID_DIRECTIONS)
                .map(|_| sample_sphere_direction(dim, &mut rng))
                .collect();
            let mut sup = T::zero();
            for r in gauge_grid::<T>() {
                let w = r.powf(alpha);
                for d in &dirs {
                    sup = sup.max(w * g(&d.dilate_unchecked(r)).abs());
                }
            }
            Ok((sup, NormQuality::LowerBound))
        }
    }
}

/// `ess sup |x|^α |f(x)|`. Exact for extremals and for step or constant
/// modulations at matching exponent; see [`weighted_norm_estimate`].
pub fn weighted_norm<T: Real>(f: &TestFunction<T>, alpha: T, dim: GroupDim) -> Result<T> {
    weighted_norm_estimate(f, alpha, dim).map(|(v, _)| v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h1() -> GroupDim {
        GroupDim::new(1).unwrap()
    }

    #[test]
    fn extremal_norm_is_one() {
        for a in [0.5, 1.0, 2.0, 3.5] {
            assert_eq!(weighted_norm(&TestFunction::extremal(a), a, h1()).unwrap(), 1.0);
        }
        assert!(weighted_norm(&TestFunction::extremal(1.0f64), 2.0, h1())
            .unwrap()
            .is_infinite());
    }

    #[test]
    fn modulated_norms() {
        let half = TestFunction::modulated(1.0, Modulation::constant(0.5).unwrap());
        assert_eq!(weighted_norm(&half, 1.0, h1()).unwrap(), 0.5);
        let sat = TestFunction::modulated(1.0, Modulation::Saturating);
        let (v, q) = weighted_norm_estimate(&sat, 1.0, h1()).unwrap();
        assert!((0.9999..1.0).contains(&v));
        assert_eq!(q, NormQuality::Grid);
        let step = Modulation::step(vec![0.5, 2.0], vec![0.2, 0.9, 0.4]).unwrap();
        let f = TestFunction::modulated(1.0, step);
        assert_eq!(weighted_norm(&f, 1.0, h1()).unwrap(), 0.9);
    }

    #[test]
    fn step_evaluation() {
        let m = Modulation::step(vec![1.0, 3.0], vec![0.1, 0.5, 1.0]).unwrap();
        assert_eq!(m.eval(0.5), 0.1);
        assert_eq!(m.eval(1.0), 0.5);
        assert_eq!(m.eval(2.9), 0.5);
        assert_eq!(m.eval(30.0), 1.0);
        assert!(Modulation::step(vec![2.0, 1.0], vec![0.1, 0.2, 0.3]).is_err());
        assert!(Modulation::step(vec![1.0], vec![0.1]).is_err());
        assert!(Modulation::<f64>::constant(1.5).is_err());
    }

    #[test]
    fn evaluation_and_origin() {
        let f = TestFunction::extremal(2.0f64);
        let x = HPoint::from_f64s(h1(), &[0.0, 0.0, 4.0]).unwrap();
        assert!((f.eval(&x) - 0.25).abs() < 1e-15);
        assert_eq!(f.eval(&HPoint::origin(h1())), 0.0);
    }

    #[test]
    fn pointwise_norm_is_a_lower_bound() {
        let g: PointFn<f64> = Arc::new(|x: &HPoint<f64>| x.gauge().powf(-1.0) / (1.0 + x.coords()[0].abs()));
        let f = TestFunction::pointwise(1.0, "anisotropic", g);
        let (v, q) = weighted_norm_estimate(&f, 1.0, h1()).unwrap();
        assert_eq!(q, NormQuality::LowerBound);
        assert!(v > 0.0 && v <= 1.0);
    }

    #[test]
    fn rejects_nonpositive_alpha() {
        assert!(weighted_norm(&TestFunction::extremal(1.0), 0.0, h1()).is_err());
        assert!(weighted_norm(&TestFunction::extremal(1.0), -1.0, h1()).is_err());
    }
}
