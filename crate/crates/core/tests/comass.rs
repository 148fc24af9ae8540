use nalgebra::{DMatrix, SymmetricEigen};
use omega_curves::calibration::{comass, is_calibration, Calibration, ComassOptions};
use omega_curves::exterior::AlternatingForm;
use proptest::prelude::*;

fn two_form(ambient: usize, coeffs: &[f64]) -> AlternatingForm {
    let mut terms = Vec::new();
    let mut k = 0;
    for i in 0..ambient {
        for j in i + 1..ambient {
            terms.push((vec![i, j], coeffs[k]));
            k += 1;
        }
    }
    AlternatingForm::from_terms(2, ambient, terms).unwrap()
}

/// The comass of a 2-form is the largest singular value of its skew
/// matrix.
fn skew_comass(form: &AlternatingForm) -> f64 {
    let m = form.ambient();
    let mut a = DMatrix::zeros(m, m);
    for (index, c) in form.terms() {
        let (i, j) = (index.axes()[0], index.axes()[1]);
        a[(i, j)] = c;
        a[(j, i)] = -c;
    }
    let gram = a.transpose() * &a;
    SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .copied()
        .fold(0.0, f64::max)
        .sqrt()
}

fn rotation(m: usize, angles: &[f64]) -> DMatrix<f64> {
    let mut q = DMatrix::identity(m, m);
    for (k, &t) in angles.iter().enumerate() {
        let (i, j) = (k % m, (k + 1 + k / m) % m);
        if i == j {
            continue;
        }
        let (s, c) = t.sin_cos();
        let mut g = DMatrix::identity(m, m);
        g[(i, i)] = c;
        g[(j, j)] = c;
        g[(i, j)] = -s;
        g[(j, i)] = s;
        q = g * q;
    }
    q
}

#[test]
fn catalog_forms_have_unit_comass() {
    for cal in [
        Calibration::Volume { n: 3 },
        Calibration::Symplectic { d: 3 },
        Calibration::KahlerPower { d: 3, k: 2 },
        Calibration::SpecialLagrangian { n: 3, theta: 0.4 },
        Calibration::Associative,
    ] {
        let form = cal.form().unwrap();
        let verdict = is_calibration(&form, 1e-6, &ComassOptions::with_seed(9));
        assert!(verdict.calibrated, "{cal:?}: {}", verdict.estimate);
    }
}

#[test]
fn sum_of_orthogonal_planes_has_unit_comass() {
    let form =
        AlternatingForm::from_terms(3, 6, [(vec![0, 1, 2], 1.0), (vec![3, 4, 5], 1.0)]).unwrap();
    let r = comass(&form, &ComassOptions::with_seed(4)).unwrap();
    assert!((r.estimate - 1.0).abs() < 1e-9, "{}", r.estimate);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn two_form_comass_matches_skew_spectrum(coeffs in proptest::collection::vec(-1.0f64..1.0, 10)) {
        let form = two_form(5, &coeffs);
        let r = comass(&form, &ComassOptions { restarts: 16, ..ComassOptions::with_seed(1) }).unwrap();
        let expected = skew_comass(&form);
        prop_assert!((r.estimate - expected).abs() <= 1e-8 * expected.max(1.0), "{} vs {}", r.estimate, expected);
    }

    #[test]
    fn comass_is_rotation_invariant(coeffs in proptest::collection::vec(-1.0f64..1.0, 10), angles in proptest::collection::vec(-3.0f64..3.0, 6)) {
        let form = two_form(5, &coeffs);
        let q = rotation(5, &angles);
        let rotated = form.pullback(&q).unwrap();
        let opts = ComassOptions { restarts: 16, ..ComassOptions::with_seed(2) };
        let a = comass(&form, &opts).unwrap().estimate;
        let b = comass(&rotated, &opts).unwrap().estimate;
        prop_assert!((a - b).abs() <= 1e-8 * a.max(1.0));
    }

    #[test]
    fn comass_is_homogeneous(lambda in -4.0f64..4.0) {
        prop_assume!(lambda.abs() > 1e-3);
        let phi = Calibration::Associative.form().unwrap();
        let opts = ComassOptions { restarts: 8, ..ComassOptions::with_seed(3) };
        let r = comass(&phi.scaled(lambda), &opts).unwrap();
        prop_assert!((r.estimate - lambda.abs()).abs() <= 1e-8 * lambda.abs().max(1.0));
    }

    #[test]
    fn more_restarts_never_lower_the_estimate(seed in 0u64..1000, extra in 1usize..8) {
        let form = Calibration::SpecialLagrangian { n: 3, theta: 1.1 }.form().unwrap().scaled(0.7);
        let few = comass(&form, &ComassOptions { restarts: 4, ..ComassOptions::with_seed(seed) }).unwrap();
        let more = comass(&form, &ComassOptions { restarts: 4 + extra, ..ComassOptions::with_seed(seed) }).unwrap();
        prop_assert!(more.estimate >= few.estimate);
        prop_assert!(more.estimate <= more.certified_upper_bound + 1e-12);
    }
}
