use nalgebra::{DMatrix, DVector};
use omega_curves::blowdown::rescale;
use omega_curves::curve::{AffineMap, CurveModel};
use omega_curves::growth::{ball_average, energy_profile, modulus_constant, sphere_average};
use proptest::prelude::*;

/// I_1(2) from its power series sum 1 / (k! (k+1)!).
fn bessel_i1_two_series() -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 0..40 {
        sum += term;
        term /= ((k + 1) * (k + 2)) as f64;
    }
    sum
}

/// Average of e^{2x} over the unit disc, (2 / pi) int_{-1}^{1} e^{2x} sqrt(1 - x^2) dx,
/// by composite Simpson after x = cos(t).
fn disc_average_quadrature() -> f64 {
    let n = 20_000;
    let h = std::f64::consts::PI / n as f64;
    let f = |t: f64| (2.0 * t.cos()).exp() * t.sin() * t.sin();
    let mut s = f(0.0) + f(std::f64::consts::PI);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    2.0 / std::f64::consts::PI * s * h / 3.0
}

#[test]
fn exp_energy_at_unit_radius() {
    let series = bessel_i1_two_series();
    let quad = disc_average_quadrature();
    assert!((series - 1.590636854637329).abs() < 1e-14);
    assert!((series - quad).abs() < 1e-12, "{series} vs {quad}");
    let h = ball_average(
        &CurveModel::complex_exp(),
        &DVector::zeros(2),
        1.0,
        2.0,
        200_000,
        17,
    )
    .unwrap();
    assert!((h.value - series).abs() <= 3.0 * h.std_error, "{h:?}");
}

#[test]
fn zcube_closed_forms() {
    // ||DF||^2 = 9 |z|^4: ball average 3 r^4, sphere average 9 r^4
    let z3 = CurveModel::zpow(3);
    let o = DVector::zeros(2);
    for (i, r) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let h = ball_average(&z3, &o, r, 2.0, 100_000, i as u64).unwrap();
        let s = sphere_average(&z3, &o, r, 2.0, 1000, i as u64).unwrap();
        assert!((h.value - 3.0 * r.powi(4)).abs() <= 3.0 * h.std_error);
        assert!((s.value - 9.0 * r.powi(4)).abs() <= 1e-12 * s.value);
    }
}

#[test]
fn modulus_constant_is_scale_free_for_monomials() {
    let z2 = CurveModel::zpow(2);
    let o = DVector::zeros(2);
    let a = modulus_constant(&z2, &o, 1.0, 20_000, 3).unwrap();
    let b = modulus_constant(&z2, &o, 4.0, 20_000, 3).unwrap();
    assert!((a - b).abs() < 0.05 * a, "{a} vs {b}");
}

fn affine_post(b: &[f64]) -> AffineMap {
    AffineMap::new(DMatrix::identity(2, 2), DVector::from_column_slice(b)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn target_translation_leaves_profile_bitwise(bx in -5.0f64..5.0, by in -5.0f64..5.0, seed in 0u64..100) {
        let model = CurveModel::zpow(3);
        let moved = CurveModel::zpow(3).then(affine_post(&[bx, by])).unwrap();
        let x0 = DVector::from_vec(vec![0.3, -0.2]);
        let a = energy_profile(&model, &x0, &[0.5, 1.0], 2000, seed).unwrap();
        let b = energy_profile(&moved, &x0, &[0.5, 1.0], 2000, seed).unwrap();
        prop_assert_eq!(a.h_values(), b.h_values());
        prop_assert_eq!(a.h_std_errors(), b.h_std_errors());
    }

    #[test]
    fn doubling_the_map_scales_energy_by_four_exactly(seed in 0u64..100) {
        let model = CurveModel::complex_exp();
        let doubled = CurveModel::complex_exp()
            .then(AffineMap::linear(DMatrix::identity(2, 2) * 2.0).unwrap())
            .unwrap();
        let x0 = DVector::zeros(2);
        let a = ball_average(&model, &x0, 1.5, 2.0, 2000, seed).unwrap();
        let b = ball_average(&doubled, &x0, 1.5, 2.0, 2000, seed).unwrap();
        prop_assert_eq!(b.value, 4.0 * a.value);
    }

    #[test]
    fn rescale_composes(r in 0.1f64..5.0, s in 0.1f64..5.0, px in -1.0f64..1.0, py in -1.0f64..1.0) {
        let model = CurveModel::zpow(2);
        let y = DVector::from_vec(vec![0.4, -0.7]);
        let once = rescale(&model, &y, r * s).unwrap();
        let twice = rescale(&rescale(&model, &y, r).unwrap(), &DVector::zeros(2), s).unwrap();
        let x = DVector::from_vec(vec![px, py]);
        let (a, b) = (once.eval(&x), twice.eval(&x));
        prop_assert!((&a - &b).norm() <= 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn ball_average_is_monotone_for_holomorphic(k in 2usize..5, r in 0.1f64..2.0) {
        let model = CurveModel::zpow(k);
        let o = DVector::zeros(2);
        let inner = ball_average(&model, &o, r, 2.0, 4000, 1).unwrap();
        let outer = ball_average(&model, &o, 1.5 * r, 2.0, 4000, 2).unwrap();
        let se = (inner.std_error.powi(2) + outer.std_error.powi(2)).sqrt();
        prop_assert!(outer.value >= inner.value - 3.0 * se);
    }
}
