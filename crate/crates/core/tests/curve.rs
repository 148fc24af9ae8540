use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use omega_curves::blowdown::{isometry_deviation, unit_ball_sample};
use omega_curves::curve::catalog::{catalog_curves, named_curve};
use omega_curves::curve::{conformal_residual, AffineMap, CurveModel};
use proptest::prelude::*;

fn composite() -> CurveModel {
    let pre = AffineMap::new(
        DMatrix::from_row_slice(2, 2, &[0.8, -0.6, 0.6, 0.8]),
        DVector::from_vec(vec![0.1, -0.2]),
    )
    .unwrap();
    let post = AffineMap::new(
        DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.5, 0.0, 2.0]),
        DVector::from_vec(vec![1.0, 2.0, 3.0]),
    )
    .unwrap();
    let core = CurveModel::holomorphic(vec![vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.5),
        Complex64::new(0.0, -0.3),
    ]])
    .unwrap();
    CurveModel::composite(pre, core, post).unwrap()
}

#[test]
fn spec_round_trip_preserves_evaluation() {
    let mut models: Vec<CurveModel> = catalog_curves().into_iter().map(|c| c.model).collect();
    models.push(composite());
    for model in models {
        let back = CurveModel::from_spec(&model.to_spec()).unwrap();
        let x = DVector::from_fn(model.domain_dim(), |i, _| 0.3 - 0.2 * i as f64);
        assert_eq!(model.eval(&x), back.eval(&x), "{}", model.to_spec());
    }
}

#[test]
fn moment_curve_has_zero_residual_off_axis() {
    let c = catalog_curves()
        .into_iter()
        .find(|c| c.name == "moment")
        .unwrap();
    let form = c.calibration.form().unwrap();
    for x in unit_ball_sample(2, 200, 5) {
        assert!(conformal_residual(&c.model, &form, &x).unwrap().abs() < 1e-12);
    }
}

#[test]
fn named_variants_parse() {
    assert_eq!(named_curve("zpow:4").unwrap(), CurveModel::zpow(4));
    assert_eq!(named_curve("identity:5").unwrap().domain_dim(), 5);
    assert!(named_curve("zpow:x").is_err());
    assert!(named_curve("nothing").is_err());
}

#[test]
fn procrustes_recovers_a_planted_isometry() {
    let (s, c) = 0.9f64.sin_cos();
    // orthonormal columns in R^3
    let q = DMatrix::from_row_slice(3, 2, &[c, -s, s, c, 0.0, 0.0]);
    let model = CurveModel::affine(q.clone(), DVector::zeros(3)).unwrap();
    let fit = isometry_deviation(&model, &unit_ball_sample(2, 512, 1)).unwrap();
    assert!(fit.deviation < 1e-13, "{}", fit.deviation);
    assert!((fit.matrix() - q).abs().max() < 1e-12);
}

proptest! {
    #[test]
    fn analytic_jacobian_matches_finite_differences(x in -1.5f64..1.5, y in -1.5f64..1.5, pick in 0usize..12) {
        let mut models: Vec<CurveModel> = catalog_curves().into_iter().map(|c| c.model).collect();
        models.push(composite());
        let model = &models[pick % models.len()];
        let n = model.domain_dim();
        let p = DVector::from_fn(n, |i, _| if i % 2 == 0 { x } else { y } / (1 + i / 2) as f64);
        let exact = model.jacobian(&p).into_matrix();
        let fd = model.jacobian_fd(&p, 1e-5).into_matrix();
        let scale = 1.0 + exact.abs().max();
        prop_assert!((exact - fd).abs().max() <= 1e-6 * scale);
    }

    #[test]
    fn holomorphic_maps_are_conformal(re in proptest::collection::vec(-1.0f64..1.0, 4), im in proptest::collection::vec(-1.0f64..1.0, 4), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let coeffs: Vec<Complex64> = re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect();
        let model = CurveModel::holomorphic(vec![coeffs]).unwrap();
        let form = omega_curves::exterior::AlternatingForm::volume(2);
        let r = conformal_residual(&model, &form, &DVector::from_vec(vec![x, y])).unwrap();
        let j = model.jacobian(&DVector::from_vec(vec![x, y])).into_matrix();
        prop_assert!(r.abs() <= 1e-12 * (1.0 + j.norm_squared()));
    }
}
