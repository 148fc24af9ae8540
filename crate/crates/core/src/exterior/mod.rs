//! Constant-coefficient exterior algebra on `R^m`.
//!
//! Forms are stored sparsely: a map from canonical (strictly increasing,
//! zero-based) multi-indices to coefficients. Absent keys are zero. All
//! operations are pure and every value is immutable once built.

mod text;

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, permutation_sign};

/// Default tolerance for algebraic identities between forms.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

/// A strictly increasing tuple of zero-based axes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex {
    axes: Vec<usize>,
}

impl MultiIndex {
    pub fn new(axes: Vec<usize>, ambient: usize) -> Result<Self> {
        if axes.len() > ambient {
            return Err(Error::InvalidMultiIndex {
                axes,
                ambient,
                reason: "degree exceeds ambient dimension",
            });
        }
        if axes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMultiIndex {
                axes,
                ambient,
                reason: "axes must be strictly increasing",
            });
        }
        if axes.last().is_some_and(|&a| a >= ambient) {
            return Err(Error::InvalidMultiIndex {
                axes,
                ambient,
                reason: "axis out of range",
            });
        }
        Ok(MultiIndex { axes })
    }

    /// Builds an index from one-based axes, as written in the text format.
    pub fn from_one_based(axes: &[usize], ambient: usize) -> Result<Self> {
        if axes.contains(&0) {
            return Err(Error::InvalidMultiIndex {
                axes: axes.to_vec(),
                ambient,
                reason: "one-based axes start at 1",
            });
        }
        Self::new(axes.iter().map(|a| a - 1).collect(), ambient)
    }

    /// The empty index of degree zero.
    pub fn empty() -> Self {
        MultiIndex { axes: Vec::new() }
    }

    pub fn axes(&self) -> &[usize] {
        &self.axes
    }

    pub fn degree(&self) -> usize {
        self.axes.len()
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a + 1).collect()
    }

    /// The complementary axes in `0..ambient`, in increasing order.
    pub fn complement(&self, ambient: usize) -> MultiIndex {
        let axes = (0..ambient).filter(|a| !self.axes.contains(a)).collect();
        MultiIndex { axes }
    }

    fn disjoint(&self, other: &MultiIndex) -> bool {
        // both sorted
        let (mut i, mut j) = (0, 0);
        while i < self.axes.len() && j < other.axes.len() {
            match self.axes[i].cmp(&other.axes[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.one_based().iter().map(|a| a.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A constant-coefficient alternating form of fixed degree on `R^ambient`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlternatingForm {
    degree: usize,
    ambient: usize,
    coeffs: BTreeMap<MultiIndex, f64>,
}

impl AlternatingForm {
    /// The zero form. A degree above `ambient` is allowed: that space is
    /// trivial, and only the zero form lives there.
    pub fn zero(degree: usize, ambient: usize) -> Self {
        AlternatingForm {
            degree,
            ambient,
            coeffs: BTreeMap::new(),
        }
    }

    /// The degree-zero form with value `c`.
    pub fn scalar(c: f64, ambient: usize) -> Self {
        let mut form = Self::zero(0, ambient);
        if c != 0.0 {
            form.coeffs.insert(MultiIndex::empty(), c);
        }
        form
    }

    /// `dx_axis` (zero-based axis).
    pub fn dx(ambient: usize, axis: usize) -> Result<Self> {
        Self::monomial(ambient, &[axis], 1.0)
    }

    /// `c dx_{a_1} ^ ... ^ dx_{a_k}` for axes in any order; the result is
    /// stored with the sign of the sorting permutation, and repeated axes
    /// give the zero form.
    pub fn monomial(ambient: usize, axes: &[usize], c: f64) -> Result<Self> {
        Self::from_terms(axes.len(), ambient, [(axes.to_vec(), c)])
    }

    /// The volume form `dx_1 ^ ... ^ dx_ambient`.
    pub fn volume(ambient: usize) -> Self {
        let axes: Vec<usize> = (0..ambient).collect();
        Self::monomial(ambient, &axes, 1.0).expect("volume axes are valid")
    }

    /// Sums arbitrary-order monomials into canonical form.
    pub fn from_terms<I>(degree: usize, ambient: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        let mut form = Self::zero(degree, ambient);
        for (axes, c) in terms {
            if axes.len() != degree {
                return Err(Error::InvalidMultiIndex {
                    axes,
                    ambient,
                    reason: "degree does not match the form",
                });
            }
            if !c.is_finite() {
                return Err(Error::NonFinite("form coefficient"));
            }
            if let Some(&bad) = axes.iter().find(|&&a| a >= ambient) {
                return Err(Error::InvalidMultiIndex {
                    axes: vec![bad],
                    ambient,
                    reason: "axis out of range",
                });
            }
            let mut sorted = axes.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
            let sign = permutation_sign(&axes);
            form.accumulate(MultiIndex { axes: sorted }, sign * c);
        }
        Ok(form)
    }

    fn accumulate(&mut self, key: MultiIndex, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.coeffs.entry(key);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = *o.get() + c;
                if sum == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficient(&self, index: &MultiIndex) -> f64 {
        self.coeffs.get(index).copied().unwrap_or(0.0)
    }

    /// Nonzero terms in increasing index order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> + '_ {
        self.coeffs.iter().map(|(k, &v)| (k, v))
    }

    pub fn nnz(&self) -> usize {
        self.coeffs.len()
    }

    /// Sum of absolute coefficients. An upper bound on the comass, since
    /// every minor of an orthonormal frame is at most one in magnitude.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.abs()).sum()
    }

    /// The value of a degree-zero form.
    pub fn as_scalar(&self) -> Option<f64> {
        (self.degree == 0).then(|| self.coefficient(&MultiIndex::empty()))
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        let mut out = Self::zero(self.degree, self.ambient);
        for (k, c) in self.terms() {
            out.accumulate(k.clone(), lambda * c);
        }
        out
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::AmbientMismatch {
                left: self.ambient,
                right: other.ambient,
            });
        }
        if self.degree != other.degree {
            return Err(Error::InvalidArgument(format!(
                "degree mismatch: {} vs {}",
                self.degree, other.degree
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        let mut out = self.clone();
        for (k, c) in other.terms() {
            out.accumulate(k.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    /// Largest coefficientwise gap between two forms on the same space.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self
            .sub(other)?
            .coeffs
            .values()
            .fold(0.0, |acc: f64, c| acc.max(c.abs())))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other).is_ok_and(|d| d <= tol)
    }

    /// Exterior product. Fails when the degrees sum past the ambient
    /// dimension; see [`AlternatingForm::wedge_or_zero`] for the saturating
    /// variant.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.ambient != other.ambient {
            return Err(Error::AmbientMismatch {
                left: self.ambient,
                right: other.ambient,
            });
        }
        let degree = self.degree + other.degree;
        if degree > self.ambient {
            return Err(Error::DegreeOverflow {
                degree,
                ambient: self.ambient,
            });
        }
        let mut out = Self::zero(degree, self.ambient);
        let mut concat = Vec::with_capacity(degree);
        for (i, a) in self.terms() {
            for (j, b) in other.terms() {
                if !i.disjoint(j) {
                    continue;
                }
                concat.clear();
                concat.extend_from_slice(&i.axes);
                concat.extend_from_slice(&j.axes);
                let sign = permutation_sign(&concat);
                let mut key = concat.clone();
                key.sort_unstable();
                out.accumulate(MultiIndex { axes: key }, sign * a * b);
            }
        }
        Ok(out)
    }

    /// Like [`AlternatingForm::wedge`], but a degree overflow yields the
    /// zero form of the summed degree together with a `true` flag.
    pub fn wedge_or_zero(&self, other: &Self) -> Result<(Self, bool)> {
        match self.wedge(other) {
            Ok(form) => Ok((form, false)),
            Err(Error::DegreeOverflow { degree, ambient }) => {
                Ok((Self::zero(degree, ambient), true))
            }
            Err(e) => Err(e),
        }
    }

    /// Hodge star for the Euclidean metric and standard orientation:
    /// `*(dx_I) = sign(I, I^c) dx_{I^c}`.
    pub fn hodge_star(&self) -> Self {
        let d = self.ambient;
        let mut out = Self::zero(d - self.degree.min(d), d);
        let mut concat = Vec::with_capacity(d);
        for (i, c) in self.terms() {
            let comp = i.complement(d);
            concat.clear();
            concat.extend_from_slice(&i.axes);
            concat.extend_from_slice(&comp.axes);
            out.accumulate(comp, permutation_sign(&concat) * c);
        }
        out
    }

    /// `omega(v_1 ^ ... ^ v_n)`: the sum over terms of the coefficient times
    /// the minor of the frame on the term's axes.
    pub fn evaluate(&self, frame: &Frame) -> Result<f64> {
        self.evaluate_columns(frame.as_matrix())
    }

    /// `*(F^* omega)` at a point with differential `jacobian`: the same
    /// minor expansion as [`AlternatingForm::evaluate`], on the columns of
    /// the Jacobian.
    pub fn pullback_top(&self, jacobian: &Jacobian) -> Result<f64> {
        self.evaluate_columns(jacobian.matrix())
    }

    /// Minor expansion against the columns of an arbitrary `ambient x degree`
    /// matrix.
    pub fn evaluate_columns(&self, columns: &DMatrix<f64>) -> Result<f64> {
        if columns.nrows() != self.ambient || columns.ncols() != self.degree {
            return Err(Error::ShapeMismatch {
                expected_rows: self.ambient,
                expected_cols: self.degree,
                rows: columns.nrows(),
                cols: columns.ncols(),
            });
        }
        Ok(self
            .terms()
            .map(|(i, c)| c * linalg::row_minor(columns, &i.axes))
            .sum())
    }

    /// Pullback through the linear map `a: R^k -> R^ambient` (an
    /// `ambient x k` matrix); the result is a form of the same degree on
    /// `R^k`.
    pub fn pullback(&self, a: &DMatrix<f64>) -> Result<Self> {
        if a.nrows() != self.ambient {
            return Err(Error::ShapeMismatch {
                expected_rows: self.ambient,
                expected_cols: a.ncols(),
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        let k = a.ncols();
        let mut out = Self::zero(self.degree, k);
        if self.degree > k {
            return Ok(out);
        }
        linalg::for_each_subset(k, self.degree, |cols| {
            let value: f64 = self
                .terms()
                .map(|(i, c)| c * linalg::minor(a, &i.axes, cols))
                .sum();
            out.accumulate(
                MultiIndex {
                    axes: cols.to_vec(),
                },
                value,
            );
        });
        Ok(out)
    }

    pub fn to_text(&self) -> String {
        text::write(self)
    }

    pub fn from_text(input: &str) -> Result<Self> {
        text::parse(input)
    }
}

impl fmt::Display for AlternatingForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let names: Vec<String> = i.one_based().iter().map(|a| format!("dx{a}")).collect();
            if names.is_empty() {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}*{}", names.join("^"))?;
            }
        }
        Ok(())
    }
}

impl Serialize for AlternatingForm {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term {
            axes: Vec<usize>,
            coefficient: f64,
        }
        let terms: Vec<Term> = self
            .terms()
            .map(|(i, c)| Term {
                axes: i.one_based(),
                coefficient: c,
            })
            .collect();
        let mut s = serializer.serialize_struct("AlternatingForm", 3)?;
        s.serialize_field("degree", &self.degree)?;
        s.serialize_field("ambient", &self.ambient)?;
        s.serialize_field("terms", &terms)?;
        s.end()
    }
}

/// An ordered tuple of vectors in `R^m`, stored as the columns of an
/// `m x n` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    vectors: DMatrix<f64>,
}

impl Frame {
    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        if columns.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("frame"));
        }
        Ok(Frame { vectors: columns })
    }

    pub fn from_vectors(vectors: &[Vec<f64>]) -> Result<Self> {
        let m = vectors.first().map_or(0, Vec::len);
        if vectors.iter().any(|v| v.len() != m) {
            return Err(Error::InvalidArgument(
                "frame vectors must share one dimension".into(),
            ));
        }
        Self::new(DMatrix::from_fn(m, vectors.len(), |r, c| vectors[c][r]))
    }

    /// The first `n` standard basis vectors of `R^m`.
    pub fn standard(m: usize, n: usize) -> Self {
        Frame {
            vectors: DMatrix::identity(m, n),
        }
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn len(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.ncols() == 0
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i).iter().copied().collect()
    }

    /// Largest entry of `V^T V - I`.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = self.vectors.transpose() * &self.vectors;
        let n = gram.nrows();
        (gram - DMatrix::identity(n, n)).amax()
    }

    pub fn is_orthonormal(&self, tol: f64) -> bool {
        self.orthonormality_defect() <= tol
    }
}

impl Serialize for Frame {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let vectors: Vec<Vec<f64>> = (0..self.len()).map(|i| self.vector(i)).collect();
        vectors.serialize(serializer)
    }
}

/// The `m x n` differential of a map `R^n -> R^m` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jacobian(DMatrix<f64>);

impl Jacobian {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("jacobian"));
        }
        Ok(Jacobian(entries))
    }

    pub(crate) fn new_unchecked(entries: DMatrix<f64>) -> Self {
        Jacobian(entries)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// Rows: the target dimension `m`.
    pub fn target_dim(&self) -> usize {
        self.0.nrows()
    }

    /// Columns: the domain dimension `n`.
    pub fn domain_dim(&self) -> usize {
        self.0.ncols()
    }

    /// Operator norm of the differential.
    pub fn opnorm(&self) -> f64 {
        linalg::operator_norm(&self.0)
    }
}
