//! Gamma and Beta functions, plus the closed forms of every sharp constant:
//! the multilinear Hardy constant, the Hardy–Littlewood–Pólya constant with
//! its region decomposition, the Hilbert constant and the `I_m` integrals.

use serde::{Deserialize, Serialize};

use crate::error::{AlphaViolation, Error, Result};
use crate::hgroup::{GroupDim, GroupGeometry, VolumeConvention};
use crate::operators::{OperatorKind, OperatorSpec};
use crate::scalar::{from_usize, lit, to_f64, Real};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum<T: Real>(z: T) -> T {
    let mut acc: T = lit(LANCZOS_COEFFS[0]);
    for (k, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += lit::<T>(c) / (z + from_usize(k));
    }
    acc
}

fn check_positive<T: Real>(name: &'static str, x: T) -> Result<()> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive { name, value: to_f64(x) })
    }
}

/// `ln Γ(x)` for `x > 0` without argument validation.
pub(crate) fn ln_gamma_unchecked<T: Real>(x: T) -> T {
    let half: T = lit(0.5);
    if x < half {
        // Γ(x) Γ(1 − x) = π / sin(πx)
        let pi = T::PI();
        return pi.ln() - (pi * x).sin().ln() - ln_gamma_unchecked(T::one() - x);
    }
    let z = x - T::one();
    let t = z + lit(LANCZOS_G) + half;
    lit::<T>(0.5) * T::TAU().ln() + (z + half) * t.ln() - t + lanczos_sum(z).ln()
}

fn gamma_unchecked<T: Real>(x: T) -> T {
    let half: T = lit(0.5);
    if x < half {
        let pi = T::PI();
        return pi / ((pi * x).sin() * gamma_unchecked(T::one() - x));
    }
    let z = x - T::one();
    let t = z + lit(LANCZOS_G) + half;
    // split the power so t^(z+1/2) does not overflow before e^(-t) is applied
    let p = t.powf((z + half) * half);
    T::TAU().sqrt() * p * ((-t).exp() * p) * lanczos_sum(z)
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma<T: Real>(x: T) -> Result<T> {
    check_positive("gamma argument", x)?;
    Ok(ln_gamma_unchecked(x))
}

/// `Γ(x)` for `x > 0`.
pub fn gamma<T: Real>(x: T) -> Result<T> {
    check_positive("gamma argument", x)?;
    Ok(gamma_unchecked(x))
}

pub fn ln_beta<T: Real>(a: T, b: T) -> Result<T> {
    check_positive("beta argument", a)?;
    check_positive("beta argument", b)?;
    Ok(ln_gamma_unchecked(a) + ln_gamma_unchecked(b) - ln_gamma_unchecked(a + b))
}

/// `B(a, b) = Γ(a) Γ(b) / Γ(a + b)`, evaluated through `ln Γ`.
pub fn beta<T: Real>(a: T, b: T) -> Result<T> {
    Ok(ln_beta(a, b)?.exp())
}

/// Exponent profile `α_1, .., α_m` of an m-linear operator, with `α = Σ α_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<T>", into = "Vec<T>")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct AlphaProfile<T> {
    alphas: Vec<T>,
    total: T,
}

impl<T: Real> AlphaProfile<T> {
    /// Requires at least one exponent, all finite and positive.
    pub fn new(alphas: Vec<T>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::InvalidProfile("at least one exponent is required".into()));
        }
        let bad: Vec<AlphaViolation> = alphas
            .iter()
            .enumerate()
            .filter(|(_, a)| !(**a > T::zero() && a.is_finite()))
            .map(|(i, a)| AlphaViolation {
                index: i + 1,
                value: to_f64(*a),
                q: 0,
            })
            .collect();
        if !bad.is_empty() {
            let list = bad
                .iter()
                .map(|v| format!("alpha_{} = {}", v.index, v.value))
                .collect::<Vec<_>>()
                .join(", ");
            return Err(Error::InvalidProfile(format!("exponents must be positive: {list}")));
        }
        let total = alphas.iter().copied().sum();
        Ok(Self { alphas, total })
    }

    pub fn from_f64s(alphas: &[f64]) -> Result<Self> {
        Self::new(alphas.iter().map(|&a| lit(a)).collect())
    }

    pub fn m(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[T] {
        &self.alphas
    }

    /// `α = Σ α_i`.
    pub fn total(&self) -> T {
        self.total
    }

    /// All indices with `α_i ∉ (0, Q)`, collected before anything is evaluated.
    pub fn violations(&self, dim: GroupDim) -> Vec<AlphaViolation> {
        let q: T = from_usize(dim.q());
        self.alphas
            .iter()
            .enumerate()
            .filter(|(_, a)| !(**a > T::zero() && **a < q))
            .map(|(i, a)| AlphaViolation {
                index: i + 1,
                value: to_f64(*a),
                q: dim.q(),
            })
            .collect()
    }

    pub fn validate(&self, dim: GroupDim) -> Result<()> {
        let v = self.violations(dim);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::DivergentConstant(v))
        }
    }
}

impl<T: Real> TryFrom<Vec<T>> for AlphaProfile<T> {
    type Error = Error;
    fn try_from(v: Vec<T>) -> Result<Self> {
        Self::new(v)
    }
}

impl<T: Real> From<AlphaProfile<T>> for Vec<T> {
    fn from(p: AlphaProfile<T>) -> Vec<T> {
        p.alphas
    }
}

/// Which closed form produced a [`ConstantResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormulaId {
    HardyA,
    HlpB,
    HilbertBstar,
    KernelHm,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Real + Serialize"))]
pub struct ConstantResult<T> {
    pub spec: OperatorSpec<T>,
    pub value: T,
    pub convention: VolumeConvention,
    pub formula_id: FormulaId,
}

fn validated<T: Real>(dim: GroupDim, profile: &AlphaProfile<T>) -> Result<()> {
    profile.validate(dim)
}

fn result<T: Real>(
    kind: OperatorKind,
    dim: GroupDim,
    profile: &AlphaProfile<T>,
    convention: VolumeConvention,
    formula_id: FormulaId,
    value: T,
) -> ConstantResult<T> {
    ConstantResult {
        spec: OperatorSpec {
            kind,
            dim,
            profile: profile.clone(),
            convention,
        },
        value,
        convention,
        formula_id,
    }
}

/// Sharp constant of the m-linear Hardy operator,
/// `2 Q^m / (2^m (mQ − α)) · Π Γ(Q/2 − α_i/2) / Γ(mQ/2 − α/2)`.
///
/// Depends on the geometry only through `ω_Q / Ω_Q = Q`, so both conventions
/// return identical bits.
pub fn hardy_constant<T: Real>(
    dim: GroupDim,
    profile: &AlphaProfile<T>,
    convention: VolumeConvention,
) -> Result<ConstantResult<T>> {
    validated(dim, profile)?;
    let q: T = from_usize(dim.q());
    let m: T = from_usize(profile.m());
    let half: T = lit(0.5);
    let two: T = lit(2.0);
    let alpha = profile.total();
    let mut log = two.ln() + m * q.ln() - m * two.ln() - (m * q - alpha).ln();
    for &a in profile.alphas() {
        log += ln_gamma_unchecked((q - a) * half);
    }
    log = log - ln_gamma_unchecked((m * q - alpha) * half);
    Ok(result(
        OperatorKind::Hardy,
        dim,
        profile,
        convention,
        FormulaId::HardyA,
        log.exp(),
    ))
}

/// Closed forms of the region integrals `K_0, .., K_m` in the decomposition of
/// `H^(nm)` by which argument realises `max(1, |y_1|^Q, .., |y_m|^Q)`:
/// `K_0 = ω^m / Π (Q − α_j)` and `K_j = ω^m / (α Π_{i≠j} (Q − α_i))`.
pub fn hlp_region_values<T: Real>(
    dim: GroupDim,
    profile: &AlphaProfile<T>,
    convention: VolumeConvention,
) -> Result<Vec<T>> {
    validated(dim, profile)?;
    let q: T = from_usize(dim.q());
    let omega_m = GroupGeometry::<T>::new(dim, convention)
        .sphere_measure
        .powi(profile.m() as i32);
    let gaps: Vec<T> = profile.alphas().iter().map(|&a| q - a).collect();
    let all: T = gaps.iter().fold(T::one(), |acc, &g| acc * g);
    let mut out = Vec::with_capacity(profile.m() + 1);
    out.push(omega_m / all);
    for j in 0..profile.m() {
        let others = gaps
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .fold(T::one(), |acc, (_, &g)| acc * g);
        out.push(omega_m / (profile.total() * others));
    }
    Ok(out)
}

/// Sharp constant of the m-linear Hardy–Littlewood–Pólya operator,
/// `m Q ω_Q^m / (α Π (Q − α_j))`.
pub fn hlp_constant<T: Real>(
    dim: GroupDim,
    profile: &AlphaProfile<T>,
    convention: VolumeConvention,
) -> Result<ConstantResult<T>> {
    validated(dim, profile)?;
    let q: T = from_usize(dim.q());
    let m: T = from_usize(profile.m());
    let omega_m = GroupGeometry::<T>::new(dim, convention)
        .sphere_measure
        .powi(profile.m() as i32);
    let denom = profile.alphas().iter().fold(profile.total(), |acc, &a| acc * (q - a));
    Ok(result(
        OperatorKind::Hlp,
        dim,
        profile,
        convention,
        FormulaId::HlpB,
        m * q * omega_m / denom,
    ))
}

/// Sharp constant of the m-linear Hilbert operator,
/// `(ω_Q/Q)^m · Π Γ(1 − α_i/Q) · Γ(α/Q) / Γ(m)`.
pub fn hilbert_constant<T: Real>(
    dim: GroupDim,
    profile: &AlphaProfile<T>,
    convention: VolumeConvention,
) -> Result<ConstantResult<T>> {
    validated(dim, profile)?;
    let q: T = from_usize(dim.q());
    let m = profile.m();
    let geom = GroupGeometry::<T>::new(dim, convention);
    let mut log = from_usize::<T>(m) * (geom.sphere_measure / q).ln();
    for &a in profile.alphas() {
        log += ln_gamma_unchecked(T::one() - a / q);
    }
    log += ln_gamma_unchecked(profile.total() / q) - ln_gamma_unchecked(from_usize::<T>(m));
    Ok(result(
        OperatorKind::Hilbert,
        dim,
        profile,
        convention,
        FormulaId::HilbertBstar,
        log.exp(),
    ))
}

/// Closed form for the named operator in `spec`. The general-kernel operator
/// has no closed form and is rejected.
pub fn closed_form<T: Real>(spec: &OperatorSpec<T>) -> Result<ConstantResult<T>> {
    match spec.kind {
        OperatorKind::Hardy => hardy_constant(spec.dim, &spec.profile, spec.convention),
        OperatorKind::Hlp => hlp_constant(spec.dim, &spec.profile, spec.convention),
        OperatorKind::Hilbert => hilbert_constant(spec.dim, &spec.profile, spec.convention),
        OperatorKind::Kernel => Err(Error::InvalidProfile(
            "the general-kernel constant has no closed form; use kernel_constant".into(),
        )),
    }
}

/// `∫_0^∞ dt / ((1 + t)^a t^b) = B(1 − b, a + b − 1)` for `0 < b < 1`, `a + b > 1`.
pub fn beta_integral<T: Real>(alpha_exp: T, beta_exp: T) -> Result<T> {
    if !(beta_exp > T::zero() && beta_exp < T::one()) {
        return Err(Error::ConvergenceCondition(format!(
            "need 0 < beta < 1, got beta = {beta_exp}"
        )));
    }
    if !(alpha_exp + beta_exp > T::one()) || !alpha_exp.is_finite() {
        return Err(Error::ConvergenceCondition(format!(
            "need alpha + beta > 1, got alpha = {alpha_exp}, beta = {beta_exp}"
        )));
    }
    beta(T::one() - beta_exp, alpha_exp + beta_exp - T::one())
}

fn check_i_m<T: Real>(alpha_exp: T, betas: &[T]) -> Result<()> {
    if betas.is_empty() {
        return Err(Error::ConvergenceCondition("I_m needs m >= 1".into()));
    }
    if let Some((i, b)) = betas
        .iter()
        .enumerate()
        .find(|(_, b)| !(**b > T::zero() && **b < T::one()))
    {
        return Err(Error::ConvergenceCondition(format!(
            "need 0 < beta_{} < 1, got {b}",
            i + 1
        )));
    }
    let reduced = alpha_exp - from_usize(betas.len()) + betas.iter().copied().sum::<T>();
    if !(reduced > T::zero()) || !alpha_exp.is_finite() {
        return Err(Error::ConvergenceCondition(format!(
            "need alpha - m + sum(beta) > 0, got {reduced}"
        )));
    }
    Ok(())
}

/// `I_m(a; β) = ∫_{(0,∞)^m} Π t_i^(−β_i) (1 + Σ t_i)^(−a) dt`
/// `= Π Γ(1 − β_i) · Γ(a − m + Σ β_i) / Γ(a)`.
pub fn i_m_closed<T: Real>(alpha_exp: T, betas: &[T]) -> Result<T> {
    check_i_m(alpha_exp, betas)?;
    let m: T = from_usize(betas.len());
    let sum: T = betas.iter().copied().sum();
    let mut log = ln_gamma_unchecked(alpha_exp - m + sum) - ln_gamma_unchecked(alpha_exp);
    for &b in betas {
        log += ln_gamma_unchecked(T::one() - b);
    }
    Ok(log.exp())
}

/// `I_m` through the reduction
/// `I_m(a; β_1..β_m) = B(1 − β_m, a + β_m − 1) · I_{m−1}(a − 1 + β_m; β_1..β_{m−1})`
/// with base case `I_1(a; β) = B(1 − β, a + β − 1)`.
pub fn i_m_recursive<T: Real>(alpha_exp: T, betas: &[T]) -> Result<T> {
    check_i_m(alpha_exp, betas)?;
    let mut a = alpha_exp;
    let mut acc = T::one();
    for &b in betas.iter().rev() {
        acc *= beta_integral(a, b)?;
        a = a - T::one() + b;
    }
    Ok(acc)
}

/// The `I_m` closed form as printed with a product `Π β_i` in the Gamma
/// argument and the free symbol `k` read as `m`. Kept only so the
/// discrepancy report can show that it disagrees with the reduction.
/// Returns `None` where the Gamma argument is not positive.
pub fn i_m_printed_variant<T: Real>(alpha_exp: T, betas: &[T]) -> Option<T> {
    let m: T = from_usize(betas.len());
    let prod = betas.iter().fold(T::one(), |acc, &b| acc * b);
    let arg = alpha_exp - m + prod;
    if !(arg > T::zero()) {
        return None;
    }
    let mut log = ln_gamma_unchecked(arg) - ln_gamma_unchecked(alpha_exp);
    for &b in betas {
        log += ln_gamma_unchecked(T::one() - b);
    }
    Some(log.exp())
}
