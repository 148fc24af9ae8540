use nalgebra::DMatrix;
use omega_curves::exterior::{AlternatingForm, MultiIndex};
use omega_curves::linalg::permutation_sign;
use proptest::prelude::*;

/// Leibniz expansion over all permutations, independent of the LU path.
fn leibniz_det(m: &DMatrix<f64>) -> f64 {
    fn perms(k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in perms(k - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, k - 1);
                out.push(q);
            }
        }
        out
    }
    let n = m.nrows();
    perms(n)
        .into_iter()
        .map(|p| permutation_sign(&p) * (0..n).map(|i| m[(i, p[i])]).product::<f64>())
        .sum()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|b| b.count_ones() as usize == k)
        .map(|b| (0..n).filter(|i| b & (1 << i) != 0).collect())
        .collect()
}

fn form_strategy(degree: usize, ambient: usize) -> impl Strategy<Value = AlternatingForm> {
    let count = subsets(ambient, degree).len();
    proptest::collection::vec(-2.0f64..2.0, count).prop_map(move |coeffs| {
        AlternatingForm::from_terms(
            degree,
            ambient,
            subsets(ambient, degree).into_iter().zip(coeffs),
        )
        .unwrap()
    })
}

fn matrix_strategy(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    proptest::collection::vec(-2.0f64..2.0, rows * cols)
        .prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

#[test]
fn pullback_matches_minor_expansion() {
    let a = DMatrix::from_fn(5, 3, |i, j| ((i * 3 + j) as f64 * 0.37).sin());
    let omega = AlternatingForm::from_terms(
        2,
        5,
        [(vec![0, 1], 1.5), (vec![1, 4], -0.5), (vec![2, 3], 2.0)],
    )
    .unwrap();
    let pb = omega.pullback(&a).unwrap();
    for j in subsets(3, 2) {
        let mut expected = 0.0;
        for (index, c) in omega.terms() {
            let minor = DMatrix::from_fn(2, 2, |r, s| a[(index.axes()[r], j[s])]);
            expected += c * leibniz_det(&minor);
        }
        let got = pb.coefficient(&MultiIndex::new(j.clone(), 3).unwrap());
        assert!(
            (got - expected).abs() <= 1e-12,
            "{j:?}: {got} vs {expected}"
        );
    }
}

proptest! {
    #[test]
    fn top_pullback_is_determinant(a in matrix_strategy(4, 4)) {
        let vol = AlternatingForm::volume(4);
        let pb = vol.pullback(&a).unwrap();
        let got = pb.coefficient(&MultiIndex::new(vec![0, 1, 2, 3], 4).unwrap());
        prop_assert!((got - leibniz_det(&a)).abs() <= 1e-10);
    }

    #[test]
    fn wedge_is_associative(a in form_strategy(1, 5), b in form_strategy(2, 5), c in form_strategy(1, 5)) {
        let left = a.wedge(&b).unwrap().wedge(&c).unwrap();
        let right = a.wedge(&b.wedge(&c).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right).unwrap() <= 1e-12);
    }

    #[test]
    fn wedge_is_graded_commutative(a in form_strategy(1, 5), b in form_strategy(2, 5)) {
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        prop_assert!(ab.max_abs_diff(&ba).unwrap() <= 1e-12);
        let aa = a.wedge(&a).unwrap();
        prop_assert!(aa.max_abs_diff(&AlternatingForm::zero(2, 5)).unwrap() <= 1e-12);
    }

    #[test]
    fn hodge_star_squares_to_sign(a in form_strategy(2, 5), b in form_strategy(3, 6)) {
        // k(m - k) = 6 and 9
        prop_assert!(a.hodge_star().hodge_star().max_abs_diff(&a).unwrap() <= 1e-12);
        prop_assert!(b.hodge_star().hodge_star().max_abs_diff(&b.scaled(-1.0)).unwrap() <= 1e-12);
    }

    #[test]
    fn inner_product_through_star(a in form_strategy(2, 4), b in form_strategy(2, 4)) {
        let dot: f64 = a.terms().map(|(i, c)| c * b.coefficient(i)).sum();
        let top = a.wedge(&b.hodge_star()).unwrap();
        prop_assert!((top.coefficient(&MultiIndex::new(vec![0, 1, 2, 3], 4).unwrap()) - dot).abs() <= 1e-12);
    }

    #[test]
    fn pullback_is_functorial(w in form_strategy(2, 5), a in matrix_strategy(5, 4), b in matrix_strategy(4, 3)) {
        let direct = w.pullback(&(&a * &b)).unwrap();
        let staged = w.pullback(&a).unwrap().pullback(&b).unwrap();
        prop_assert!(direct.max_abs_diff(&staged).unwrap() <= 1e-10);
    }

    #[test]
    fn pullback_respects_wedge(u in form_strategy(1, 5), w in form_strategy(2, 5), a in matrix_strategy(5, 4)) {
        let lhs = u.wedge(&w).unwrap().pullback(&a).unwrap();
        let rhs = u.pullback(&a).unwrap().wedge(&w.pullback(&a).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-10);
    }

    #[test]
    fn text_format_round_trips_bits(w in form_strategy(3, 6)) {
        let back = AlternatingForm::from_text(&w.to_text()).unwrap();
        prop_assert_eq!(back, w);
    }
}
