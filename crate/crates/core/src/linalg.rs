//! Small dense kernels shared by the exterior algebra, the comass ascent and
//! the curve models: minors, cofactors, orthonormalization and the operator
//! norm.

use nalgebra::DMatrix;

/// Determinant of a square matrix stored row-major in `a` (length `n * n`).
///
/// Closed form up to 3x3, LU with partial pivoting above. `a` is used as
/// scratch space.
pub fn det_in_place(a: &mut [f64], n: usize) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    match n {
        0 => 1.0,
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        3 => {
            a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
                + a[2] * (a[3] * a[7] - a[4] * a[6])
        }
        _ => lu_det(a, n),
    }
}

fn lu_det(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for k in 0..n {
        let mut pivot = k;
        let mut best = a[k * n + k].abs();
        for i in (k + 1)..n {
            let v = a[i * n + k].abs();
            if v > best {
                best = v;
                pivot = i;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if pivot != k {
            for j in 0..n {
                a.swap(k * n + j, pivot * n + j);
            }
            det = -det;
        }
        let p = a[k * n + k];
        det *= p;
        for i in (k + 1)..n {
            let factor = a[i * n + k] / p;
            if factor != 0.0 {
                for j in (k + 1)..n {
                    a[i * n + j] -= factor * a[k * n + j];
                }
            }
        }
    }
    det
}

/// Determinant of the square submatrix of `m` on the given rows and all of
/// its columns.
pub fn row_minor(m: &DMatrix<f64>, rows: &[usize]) -> f64 {
    let n = m.ncols();
    debug_assert_eq!(rows.len(), n);
    let mut buf = [0.0; 16];
    let mut heap;
    let scratch: &mut [f64] = if n * n <= buf.len() {
        &mut buf[..n * n]
    } else {
        heap = vec![0.0; n * n];
        &mut heap
    };
    for (a, &r) in rows.iter().enumerate() {
        for c in 0..n {
            scratch[a * n + c] = m[(r, c)];
        }
    }
    det_in_place(scratch, n)
}

/// Determinant of the submatrix of `m` on `rows` x `cols`.
pub fn minor(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    let n = rows.len();
    debug_assert_eq!(cols.len(), n);
    let mut scratch = vec![0.0; n * n];
    for (a, &r) in rows.iter().enumerate() {
        for (b, &c) in cols.iter().enumerate() {
            scratch[a * n + b] = m[(r, c)];
        }
    }
    det_in_place(&mut scratch, n)
}

/// Cofactor matrix of the square submatrix of `m` on `rows`: entry `(a, b)`
/// is the derivative of the minor with respect to `m[(rows[a], b)]`.
pub fn row_minor_cofactors(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    let n = m.ncols();
    let mut cof = DMatrix::zeros(n, n);
    if n == 1 {
        cof[(0, 0)] = 1.0;
        return cof;
    }
    let k = n - 1;
    let mut scratch = vec![0.0; k * k];
    for a in 0..n {
        for b in 0..n {
            let mut idx = 0;
            for (ra, &r) in rows.iter().enumerate() {
                if ra == a {
                    continue;
                }
                for c in 0..n {
                    if c == b {
                        continue;
                    }
                    scratch[idx] = m[(r, c)];
                    idx += 1;
                }
            }
            let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
            cof[(a, b)] = sign * det_in_place(&mut scratch, k);
        }
    }
    cof
}

/// Sign of the permutation that sorts `seq` (entries must be distinct).
pub fn permutation_sign(seq: &[usize]) -> f64 {
    let mut inversions = 0usize;
    for i in 0..seq.len() {
        for j in (i + 1)..seq.len() {
            if seq[i] > seq[j] {
                inversions += 1;
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Orthonormalizes the columns of `m` by modified Gram-Schmidt with one
/// reorthogonalization pass. Returns `None` if the columns are numerically
/// dependent.
pub fn orthonormalize(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let mut q = m.clone();
    let n = q.ncols();
    for j in 0..n {
        let original = q.column(j).norm();
        for _pass in 0..2 {
            for i in 0..j {
                let proj = q.column(i).dot(&q.column(j));
                let qi = q.column(i).clone_owned();
                q.column_mut(j).axpy(-proj, &qi, 1.0);
            }
        }
        let norm = q.column(j).norm();
        if !(norm > 1e-12 * original.max(f64::MIN_POSITIVE)) || !norm.is_finite() {
            return None;
        }
        q.column_mut(j).scale_mut(1.0 / norm);
    }
    Some(q)
}

/// Largest eigenvalue of the Gram matrix `m^T m`, i.e. the squared operator
/// norm. Closed forms for up to three columns; SVD beyond.
pub fn largest_gram_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let n = m.ncols();
    match n {
        0 => 0.0,
        1 => m.column(0).norm_squared(),
        2 => {
            let a = m.column(0).norm_squared();
            let d = m.column(1).norm_squared();
            let b = m.column(0).dot(&m.column(1));
            let half_gap = 0.5 * (a - d);
            0.5 * (a + d) + half_gap.hypot(b)
        }
        3 => {
            let g = m.transpose() * m;
            symmetric3_max_eigenvalue(&g)
        }
        _ => {
            let s = m.singular_values().max();
            s * s
        }
    }
}

fn symmetric3_max_eigenvalue(g: &DMatrix<f64>) -> f64 {
    let off = g[(0, 1)].powi(2) + g[(0, 2)].powi(2) + g[(1, 2)].powi(2);
    let diag_max = g[(0, 0)].max(g[(1, 1)]).max(g[(2, 2)]);
    if off == 0.0 {
        return diag_max;
    }
    let q = (g[(0, 0)] + g[(1, 1)] + g[(2, 2)]) / 3.0;
    let p2 =
        (g[(0, 0)] - q).powi(2) + (g[(1, 1)] - q).powi(2) + (g[(2, 2)] - q).powi(2) + 2.0 * off;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return q;
    }
    let mut b = g.clone();
    for i in 0..3 {
        b[(i, i)] -= q;
    }
    b /= p;
    let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    q + 2.0 * p * phi.cos()
}

/// Largest singular value of `m`.
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    largest_gram_eigenvalue(m).max(0.0).sqrt()
}

/// Iterates `k`-subsets of `0..n` in lexicographic order.
pub fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_matches_closed_forms() {
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[
                2.0, -1.0, 0.5, 3.0, 1.0, 4.0, -2.0, 0.0, 0.0, 1.5, 1.0, -1.0, 2.5, 0.0, 1.0, 1.0,
            ],
        );
        let mut a: Vec<f64> = m.transpose().as_slice().to_vec();
        let lu = det_in_place(&mut a, 4);
        assert!((lu - m.determinant()).abs() < 1e-12);
    }

    #[test]
    fn subsets_are_enumerated_once() {
        let mut seen = Vec::new();
        for_each_subset(5, 3, |s| seen.push(s.to_vec()));
        assert_eq!(seen.len(), 10);
        assert_eq!(seen[0], vec![0, 1, 2]);
        assert_eq!(seen[9], vec![2, 3, 4]);
        let mut empty = 0;
        for_each_subset(3, 0, |_| empty += 1);
        assert_eq!(empty, 1);
        let mut none = 0;
        for_each_subset(2, 3, |_| none += 1);
        assert_eq!(none, 0);
    }

    #[test]
    fn cofactors_are_minor_derivatives() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, -1.0, 3.0, 1.0, 0.5, 0.0, 2.0]);
        let rows = [0, 1, 2];
        let cof = row_minor_cofactors(&m, &rows);
        let h = 1e-6;
        for a in 0..3 {
            for b in 0..3 {
                let mut p = m.clone();
                p[(a, b)] += h;
                let mut q = m.clone();
                q[(a, b)] -= h;
                let fd = (row_minor(&p, &rows) - row_minor(&q, &rows)) / (2.0 * h);
                assert!((fd - cof[(a, b)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn gram_closed_forms_match_svd() {
        let m2 = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, -0.5, 0.3, 2.0, 1.0]);
        let m3 = DMatrix::from_row_slice(
            4,
            3,
            &[1.0, 2.0, 0.0, -0.5, 0.3, 1.0, 2.0, 1.0, -1.0, 0.2, 0.1, 0.4],
        );
        for m in [m2, m3] {
            let svd = m.singular_values().max();
            assert!((operator_norm(&m) - svd).abs() < 1e-12);
        }
        assert_eq!(operator_norm(&DMatrix::identity(3, 3)), 1.0);
        assert_eq!(
            operator_norm(&DMatrix::from_diagonal_element(2, 2, 1.0)),
            1.0
        );
    }

    #[test]
    fn orthonormalize_rejects_dependent_columns() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        assert!(orthonormalize(&m).is_none());
        let q = orthonormalize(&DMatrix::from_row_slice(
            3,
            2,
            &[1.0, 1.0, 0.0, 1.0, 0.0, 0.0],
        ))
        .unwrap();
        let gram = q.transpose() * &q;
        assert!((gram - DMatrix::identity(2, 2)).norm() < 1e-15);
    }
}
