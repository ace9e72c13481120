use approx::assert_relative_eq;
use hlab_core::hgroup::{GroupDim, VolumeConvention};
use hlab_core::integrate::{quad_1d, QuadSpec};
use hlab_core::specfun::*;
use hlab_core::AlphaProfile64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn h(n: usize) -> GroupDim {
    GroupDim::new(n).unwrap()
}

fn euler_gamma_integral(x: f64) -> f64 {
    let qs = QuadSpec::with_rel_tol(1e-12);
    quad_1d(|t: f64| t.powf(x - 1.0) * (-t).exp(), 0.0, f64::INFINITY, &qs)
        .unwrap()
        .value
}

#[test]
fn gamma_matches_euler_integral() {
    for x in [0.3, 0.5, 1.0, 1.7, 2.5, 4.0, 7.3, 12.0] {
        assert_relative_eq!(gamma(x).unwrap(), euler_gamma_integral(x), max_relative = 1e-10);
    }
}

#[test]
fn beta_identity_on_grid() {
    let qs = QuadSpec::with_rel_tol(1e-12);
    for &b in &[0.1, 0.3, 0.5, 0.7, 0.9] {
        for &a in &[0.5, 1.0, 1.5, 2.5, 4.0] {
            if a + b <= 1.0 {
                continue;
            }
            let numeric = quad_1d(|t: f64| (1.0 + t).powf(-a) * t.powf(-b), 0.0, f64::INFINITY, &qs)
                .unwrap()
                .value;
            assert_relative_eq!(beta_integral(a, b).unwrap(), numeric, max_relative = 1e-8);
        }
    }
}

#[test]
fn hardy_two_factor_by_polar_coordinates() {
    // Q² ∫∫_{r1²+r2²<1} r1² r2² dr = 16 · ∫_0^1 ρ^5 dρ · ∫_0^{π/2} cos²θ sin²θ dθ
    let polar = 16.0 * (1.0 / 6.0) * (PI / 16.0);
    let p = AlphaProfile64::from_f64s(&[1.0, 1.0]).unwrap();
    let closed = hardy_constant(h(1), &p, VolumeConvention::Geometric).unwrap().value;
    assert_relative_eq!(closed, polar, max_relative = 1e-14);
}

#[test]
fn hilbert_reflection_constant_in_alpha() {
    for n in 1..=3 {
        let q = (2 * n + 2) as f64;
        let omega = hlab_core::hgroup::geometric_unit_ball_volume::<f64>(h(n));
        let mut a = 0.5;
        while a < q {
            let p = AlphaProfile64::from_f64s(&[a]).unwrap();
            let v = hilbert_constant(h(n), &p, VolumeConvention::Geometric).unwrap().value;
            assert_relative_eq!(v * (PI * a / q).sin(), omega * PI, max_relative = 1e-12);
            a += 0.5;
        }
    }
}

fn betas(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.02f64..0.98, m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn i_m_closed_equals_recursion(m in 1usize..=4, bs in betas(4), extra in 0.05f64..3.0) {
        let bs = &bs[..m];
        let a = m as f64 - bs.iter().sum::<f64>() + extra;
        let c = i_m_closed(a, bs).unwrap();
        let r = i_m_recursive(a, bs).unwrap();
        prop_assert!(((c - r) / c).abs() <= 1e-12, "closed {c} recursion {r}");
    }

    #[test]
    fn hlp_regions_sum(n in 1usize..=3, m in 1usize..=4, raw in prop::collection::vec(0.01f64..0.99, 4)) {
        let q = (2 * n + 2) as f64;
        let alphas: Vec<f64> = raw[..m].iter().map(|u| u * q).collect();
        let p = AlphaProfile64::from_f64s(&alphas).unwrap();
        let sum: f64 = hlp_region_values(h(n), &p, VolumeConvention::Geometric).unwrap().iter().sum();
        let closed = hlp_constant(h(n), &p, VolumeConvention::Geometric).unwrap().value;
        prop_assert!(((sum - closed) / closed).abs() <= 1e-13);
    }

    #[test]
    fn hardy_convention_bit_equal(n in 1usize..=3, m in 1usize..=4, raw in prop::collection::vec(0.01f64..0.99, 4)) {
        let q = (2 * n + 2) as f64;
        let alphas: Vec<f64> = raw[..m].iter().map(|u| u * q).collect();
        let p = AlphaProfile64::from_f64s(&alphas).unwrap();
        let g = hardy_constant(h(n), &p, VolumeConvention::Geometric).unwrap().value;
        let f = hardy_constant(h(n), &p, VolumeConvention::PaperFormula).unwrap().value;
        prop_assert_eq!(g.to_bits(), f.to_bits());
    }

    #[test]
    fn named_constants_shift_by_two_per_factor(m in 1usize..=3, raw in prop::collection::vec(0.05f64..0.95, 3)) {
        let alphas: Vec<f64> = raw[..m].iter().map(|u| u * 4.0).collect();
        let p = AlphaProfile64::from_f64s(&alphas).unwrap();
        let k = 2f64.powi(m as i32);
        for f in [hlp_constant::<f64>, hilbert_constant::<f64>] {
            let g = f(h(1), &p, VolumeConvention::Geometric).unwrap().value;
            let pf = f(h(1), &p, VolumeConvention::PaperFormula).unwrap().value;
            prop_assert!(((pf / g) - k).abs() <= 1e-12 * k);
        }
    }
}
