//! Heisenberg group `H^n`: the group law, dilations, the Koranyi gauge and
//! the measure of gauge balls.
//!
//! Points are stored in the exponential coordinates `(x_1, .., x_2n, t)` on
//! `R^2n x R`. The Haar measure is Lebesgue measure on `R^(2n+1)`, and
//! dilations scale it by `r^Q` with `Q = 2n + 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, to_f64, Real};
use crate::specfun;

/// Group index `n` of `H^n` together with its homogeneous dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct GroupDim {
    n: usize,
}

impl GroupDim {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroGroupIndex);
        }
        Ok(Self { n })
    }

    pub fn n(self) -> usize {
        self.n
    }

    /// Homogeneous dimension `Q = 2n + 2`.
    pub fn q(self) -> usize {
        2 * self.n + 2
    }

    /// Number of real coordinates, `2n + 1`.
    pub fn coords_len(self) -> usize {
        2 * self.n + 1
    }
}

impl TryFrom<usize> for GroupDim {
    type Error = Error;
    fn try_from(n: usize) -> Result<Self> {
        GroupDim::new(n)
    }
}

impl From<GroupDim> for usize {
    fn from(d: GroupDim) -> usize {
        d.n
    }
}

/// A point of `H^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HPoint<T> {
    dim: GroupDim,
    coords: Vec<T>,
}

impl<T: Real> HPoint<T> {
    pub fn new(dim: GroupDim, coords: Vec<T>) -> Result<Self> {
        if coords.len() != dim.coords_len() {
            return Err(Error::CoordinateCount {
                expected: dim.coords_len(),
                got: coords.len(),
            });
        }
        if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoordinate { index });
        }
        Ok(Self { dim, coords })
    }

    /// Builds a point from `f64` coordinates.
    pub fn from_f64s(dim: GroupDim, coords: &[f64]) -> Result<Self> {
        Self::new(dim, coords.iter().map(|&c| lit(c)).collect())
    }

    /// The identity element.
    pub fn origin(dim: GroupDim) -> Self {
        Self {
            dim,
            coords: vec![T::zero(); dim.coords_len()],
        }
    }

    /// The unit vector in the first coordinate direction.
    pub fn e1(dim: GroupDim) -> Self {
        let mut p = Self::origin(dim);
        p.coords[0] = T::one();
        p
    }

    /// The caller guarantees `coords.len() == 2n + 1` and finiteness.
    pub(crate) fn from_raw(dim: GroupDim, coords: Vec<T>) -> Self {
        debug_assert_eq!(coords.len(), dim.coords_len());
        Self { dim, coords }
    }

    pub fn dim(&self) -> GroupDim {
        self.dim
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn horizontal(&self) -> &[T] {
        &self.coords[..2 * self.dim.n]
    }

    pub fn vertical(&self) -> T {
        self.coords[2 * self.dim.n]
    }

    pub fn is_origin(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim.n,
                right: other.dim.n,
            });
        }
        Ok(())
    }

    /// Group product `self ∘ other`.
    pub fn group_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.dim.n;
        let (p, q) = (&self.coords, &other.coords);
        let mut out: Vec<T> = p.iter().zip(q).map(|(&a, &b)| a + b).collect();
        let mut symplectic = T::zero();
        for j in 0..n {
            symplectic += q[j] * p[n + j] - p[j] * q[n + j];
        }
        out[2 * n] = p[2 * n] + q[2 * n] + (symplectic + symplectic);
        Ok(Self::from_raw(self.dim, out))
    }

    /// Group inverse; coordinatewise negation.
    pub fn group_inv(&self) -> Self {
        Self::from_raw(self.dim, self.coords.iter().map(|&c| -c).collect())
    }

    /// Anisotropic dilation `δ_r`.
    pub fn dilate(&self, r: T) -> Result<Self> {
        if !(r > T::zero() && r.is_finite()) {
            return Err(Error::NonPositive {
                name: "dilation factor",
                value: to_f64(r),
            });
        }
        Ok(self.dilate_unchecked(r))
    }

    pub(crate) fn coords_mut(&mut self) -> &mut [T] {
        &mut self.coords
    }

    pub(crate) fn dilate_in_place(&mut self, r: T) {
        let n2 = 2 * self.dim.n;
        for c in &mut self.coords[..n2] {
            *c *= r;
        }
        self.coords[n2] = self.coords[n2] * r * r;
    }

    pub(crate) fn dilate_unchecked(&self, r: T) -> Self {
        let n2 = 2 * self.dim.n;
        let mut out = self.coords.clone();
        for c in &mut out[..n2] {
            *c *= r;
        }
        out[n2] = out[n2] * r * r;
        Self::from_raw(self.dim, out)
    }

    /// Koranyi gauge `((Σ x_i²)² + t²)^(1/4)`.
    pub fn gauge(&self) -> T {
        gauge_of(&self.coords, self.dim.n)
    }

    /// Left-invariant distance `|q⁻¹ ∘ p|`.
    pub fn distance(&self, other: &Self) -> Result<T> {
        Ok(other.group_inv().group_mul(self)?.gauge())
    }
}

#[inline]
pub(crate) fn gauge_of<T: Real>(coords: &[T], n: usize) -> T {
    let h: T = coords[..2 * n].iter().map(|&x| x * x).sum();
    h.hypot(coords[2 * n]).sqrt()
}

/// Which closed form is used for the measure of the unit gauge ball.
///
/// `Geometric` is the Lebesgue measure of `{|x| < 1}`. `PaperFormula` is the
/// constant `2 π^(n+1/2) Γ(n/2) / ((n+1) Γ(n) Γ((n+1)/2))` found in parts of the
/// literature, which is exactly twice the Lebesgue measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeConvention {
    #[default]
    Geometric,
    PaperFormula,
}

impl VolumeConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            VolumeConvention::Geometric => "geometric",
            VolumeConvention::PaperFormula => "paper_formula",
        }
    }
}

/// Measure constants of `H^n` under a volume convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupGeometry<T> {
    pub dim: GroupDim,
    /// `|B(0, 1)|`.
    pub ball_volume_unit: T,
    /// `ω_Q = Q |B(0, 1)|`, the total mass of the cone measure.
    pub sphere_measure: T,
    pub convention: VolumeConvention,
}

impl<T: Real> GroupGeometry<T> {
    pub fn new(dim: GroupDim, convention: VolumeConvention) -> Self {
        let ball = unit_ball_volume::<T>(dim, convention);
        Self {
            dim,
            ball_volume_unit: ball,
            sphere_measure: from_usize::<T>(dim.q()) * ball,
            convention,
        }
    }
}

/// `π^(n+1/2) Γ(n/2) / ((n+1) Γ(n) Γ((n+1)/2))`, the Lebesgue measure of the
/// unit Koranyi ball.
pub fn geometric_unit_ball_volume<T: Real>(dim: GroupDim) -> T {
    let n: T = from_usize(dim.n);
    let half: T = lit(0.5);
    let one = T::one();
    let log = (n + half) * T::PI().ln() + specfun::ln_gamma_unchecked(n * half)
        - (n + one).ln()
        - specfun::ln_gamma_unchecked(n)
        - specfun::ln_gamma_unchecked((n + one) * half);
    log.exp()
}

pub fn unit_ball_volume<T: Real>(dim: GroupDim, convention: VolumeConvention) -> T {
    let geometric = geometric_unit_ball_volume::<T>(dim);
    match convention {
        VolumeConvention::Geometric => geometric,
        VolumeConvention::PaperFormula => geometric + geometric,
    }
}

/// `|B(x, r)| = |B(0, 1)| r^Q`.
pub fn ball_volume<T: Real>(dim: GroupDim, r: T, convention: VolumeConvention) -> Result<T> {
    if !(r > T::zero() && r.is_finite()) {
        return Err(Error::NonPositive {
            name: "radius",
            value: to_f64(r),
        });
    }
    Ok(unit_ball_volume::<T>(dim, convention) * r.powi(dim.q() as i32))
}

/// `ω_Q = Q |B(0, 1)|`.
pub fn sphere_measure<T: Real>(dim: GroupDim, convention: VolumeConvention) -> T {
    GroupGeometry::<T>::new(dim, convention).sphere_measure
}

/// Determinant of the linear map `δ_r`, the product of its diagonal entries.
pub fn dilation_determinant<T: Real>(dim: GroupDim, r: T) -> T {
    let mut det = T::one();
    for _ in 0..2 * dim.n {
        det *= r;
    }
    det * r * r
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn h1() -> GroupDim {
        GroupDim::new(1).unwrap()
    }

    fn pt(c: &[f64]) -> HPoint<f64> {
        let dim = GroupDim::new((c.len() - 1) / 2).unwrap();
        HPoint::from_f64s(dim, c).unwrap()
    }

    #[test]
    fn homogeneous_dimension() {
        for n in 1..6 {
            let d = GroupDim::new(n).unwrap();
            assert_eq!(d.q(), 2 * n + 2);
        }
        assert!(GroupDim::new(0).is_err());
    }

    #[test]
    fn rejects_bad_points() {
        assert!(HPoint::<f64>::new(h1(), vec![0.0; 4]).is_err());
        assert!(HPoint::<f64>::new(h1(), vec![0.0, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn group_law_examples() {
        let o = HPoint::<f64>::origin(h1());
        assert_eq!(o.group_mul(&pt(&[1., 2., 3.])).unwrap().coords(), &[1., 2., 3.]);
        assert_eq!(
            pt(&[1., 0., 0.]).group_mul(&pt(&[0., 1., 0.])).unwrap().coords(),
            &[1., 1., -2.]
        );
        assert_eq!(
            pt(&[1., 2., 3.]).group_mul(&pt(&[4., 5., 6.])).unwrap().coords(),
            &[5., 7., 15.]
        );
        let h2 = GroupDim::new(2).unwrap();
        assert!(matches!(
            o.group_mul(&HPoint::origin(h2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(HPoint::<f64>::origin(h1()).group_inv().coords(), &[0., 0., 0.]);
        let p = pt(&[1., 2., 3.]);
        let q = p.group_inv();
        assert_eq!(q.coords(), &[-1., -2., -3.]);
        assert!(p.group_mul(&q).unwrap().is_origin());
    }

    #[test]
    fn dilation_examples() {
        let p = pt(&[1., 1., 1.]);
        assert_eq!(p.dilate(1.0).unwrap(), p);
        assert_eq!(p.dilate(2.0).unwrap().coords(), &[2., 2., 4.]);
        assert!(p.dilate(0.0).is_err());
        assert!(p.dilate(-1.0).is_err());
        assert!(p.dilate(f64::INFINITY).is_err());
    }

    #[test]
    fn gauge_examples() {
        assert_eq!(pt(&[1., 0., 0.]).gauge(), 1.0);
        assert_eq!(pt(&[0., 0., 1.]).gauge(), 1.0);
        assert_relative_eq!(pt(&[1., 1., 2.]).gauge(), 8f64.powf(0.25), max_relative = 1e-15);
        assert_relative_eq!(pt(&[1., 1., 2.]).gauge(), 1.681793, epsilon = 1e-6);
        assert_eq!(HPoint::<f64>::origin(h1()).gauge(), 0.0);
    }

    #[test]
    fn distance_examples() {
        let p = pt(&[0.3, -1.2, 2.0]);
        assert_eq!(p.distance(&p).unwrap(), 0.0);
        assert_eq!(pt(&[1., 0., 0.]).distance(&HPoint::origin(h1())).unwrap(), 1.0);
    }

    #[test]
    fn volume_examples() {
        let v: f64 = ball_volume(h1(), 1.0, VolumeConvention::Geometric).unwrap();
        assert_relative_eq!(v, PI * PI / 2.0, max_relative = 1e-14);
        let v: f64 = ball_volume(h1(), 1.0, VolumeConvention::PaperFormula).unwrap();
        assert_relative_eq!(v, PI * PI, max_relative = 1e-14);
        let v: f64 = ball_volume(h1(), 2.0, VolumeConvention::Geometric).unwrap();
        assert_relative_eq!(v, 8.0 * PI * PI, max_relative = 1e-14);
        assert!(ball_volume::<f64>(h1(), 0.0, VolumeConvention::Geometric).is_err());

        let s: f64 = sphere_measure(h1(), VolumeConvention::Geometric);
        assert_relative_eq!(s, 2.0 * PI * PI, max_relative = 1e-14);
        let s: f64 = sphere_measure(h1(), VolumeConvention::PaperFormula);
        assert_relative_eq!(s, 4.0 * PI * PI, max_relative = 1e-14);
        for n in 1..5 {
            let d = GroupDim::new(n).unwrap();
            for c in [VolumeConvention::Geometric, VolumeConvention::PaperFormula] {
                let g = GroupGeometry::<f64>::new(d, c);
                assert_relative_eq!(
                    g.sphere_measure / g.ball_volume_unit,
                    d.q() as f64,
                    max_relative = 1e-15
                );
            }
        }
    }

    #[test]
    fn paper_formula_is_twice_geometric() {
        // 2 π^(n+1/2) Γ(n/2) / ((n+1) Γ(n) Γ((n+1)/2)) evaluated independently
        let gammas = [(1.0, PI.sqrt(), 1.0, 1.0), (2.0, 1.0, 1.0, PI.sqrt() / 2.0)];
        for (n, g_half_n, g_n, g_half_n1) in gammas {
            let printed = 2.0 * PI.powf(n + 0.5) * g_half_n / ((n + 1.0) * g_n * g_half_n1);
            let d = GroupDim::new(n as usize).unwrap();
            let v: f64 = unit_ball_volume(d, VolumeConvention::PaperFormula);
            assert_relative_eq!(v, printed, max_relative = 1e-14);
        }
    }

    #[test]
    fn dilation_jacobian() {
        for n in 1..5 {
            let d = GroupDim::new(n).unwrap();
            for r in [0.5f64, 2.0, 3.7] {
                assert_relative_eq!(dilation_determinant(d, r), r.powi(d.q() as i32), max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn works_in_single_precision() {
        let d = h1();
        let p = HPoint::<f32>::new(d, vec![1.0, 1.0, 2.0]).unwrap();
        assert!((p.gauge() - 8f32.powf(0.25)).abs() < 1e-6);
        let v: f32 = unit_ball_volume(d, VolumeConvention::Geometric);
        assert!((v - std::f32::consts::PI.powi(2) / 2.0).abs() < 1e-5);
    }

    fn point(n: usize) -> impl Strategy<Value = HPoint<f64>> {
        proptest::collection::vec(-10.0f64..10.0, 2 * n + 1)
            .prop_map(move |c| HPoint::new(GroupDim::new(n).unwrap(), c).unwrap())
    }

    proptest! {
        #[test]
        fn inverse_is_involution(p in point(2)) {
            prop_assert_eq!(p.group_inv().group_inv(), p);
        }

        #[test]
        fn dilation_semigroup(p in point(2), r in 0.01f64..10.0, s in 0.01f64..10.0) {
            let lhs = p.dilate(s).unwrap().dilate(r).unwrap();
            let rhs = p.dilate(r * s).unwrap();
            for (a, b) in lhs.coords().iter().zip(rhs.coords()) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }

        #[test]
        fn gauge_is_homogeneous(p in point(1), r in 1e-3f64..1e3) {
            let g = p.gauge();
            prop_assert!((p.dilate(r).unwrap().gauge() - r * g).abs() <= 1e-12 * r * g);
        }

        #[test]
        fn distance_left_invariant(z in point(1), p in point(1), q in point(1)) {
            let d0 = p.distance(&q).unwrap();
            let d1 = z.group_mul(&p).unwrap().distance(&z.group_mul(&q).unwrap()).unwrap();
            prop_assert!((d0 - d1).abs() <= 1e-10 * (1.0 + d0));
        }

        #[test]
        fn distance_symmetric(p in point(2), q in point(2)) {
            let a = p.distance(&q).unwrap();
            let b = q.distance(&p).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
        }
    }
}
