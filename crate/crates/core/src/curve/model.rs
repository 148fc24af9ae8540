use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exterior::Jacobian;

/// Central-difference step used to cross-check analytic Jacobians.
pub const FD_STEP: f64 = 1e-5;

/// `x -> linear * x + offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub linear: DMatrix<f64>,
    pub offset: DVector<f64>,
}

impl AffineMap {
    pub fn new(linear: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        if offset.len() != linear.nrows() {
            return Err(Error::ShapeMismatch {
                expected_rows: linear.nrows(),
                expected_cols: 1,
                rows: offset.len(),
                cols: 1,
            });
        }
        if linear.iter().chain(offset.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("affine map"));
        }
        Ok(AffineMap { linear, offset })
    }

    pub fn linear(linear: DMatrix<f64>) -> Result<Self> {
        let m = linear.nrows();
        Self::new(linear, DVector::zeros(m))
    }

    pub fn identity(n: usize) -> Self {
        AffineMap {
            linear: DMatrix::identity(n, n),
            offset: DVector::zeros(n),
        }
    }

    pub fn domain_dim(&self) -> usize {
        self.linear.ncols()
    }

    pub fn target_dim(&self) -> usize {
        self.linear.nrows()
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.linear * x + &self.offset
    }

    /// `self o inner`.
    pub fn after(&self, inner: &AffineMap) -> AffineMap {
        AffineMap {
            linear: &self.linear * &inner.linear,
            offset: &self.linear * &inner.offset + &self.offset,
        }
    }

    pub fn is_invertible(&self) -> bool {
        self.linear.is_square() && self.linear.clone().lu().determinant().abs() > 1e-300
    }

    /// Largest entry of `A^T A - I`.
    pub fn isometry_defect(&self) -> f64 {
        let n = self.domain_dim();
        (self.linear.transpose() * &self.linear - DMatrix::identity(n, n)).amax()
    }
}

/// An evaluable map `R^n -> R^m` with an analytic Jacobian.
#[derive(Clone, Debug, PartialEq)]
pub enum CurveModel {
    Affine(AffineMap),
    /// `C -> C^k`, each component a polynomial with coefficients in
    /// ascending powers. Component `j` lands on axes `2j, 2j + 1`.
    HolomorphicPolynomial {
        components: Vec<Vec<Complex64>>,
    },
    /// `z -> e^z` on `C`.
    ComplexExp,
    /// `post o core o pre` with `pre` an invertible self-map of `R^n`.
    Composite {
        pre: AffineMap,
        core: Box<CurveModel>,
        post: AffineMap,
    },
}

fn complex_jacobian_block(j: &mut DMatrix<f64>, row: usize, d: Complex64) {
    j[(row, 0)] = d.re;
    j[(row, 1)] = -d.im;
    j[(row + 1, 0)] = d.im;
    j[(row + 1, 1)] = d.re;
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn derivative(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

impl CurveModel {
    pub fn affine(linear: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        Ok(CurveModel::Affine(AffineMap::new(linear, offset)?))
    }

    pub fn identity(n: usize) -> Self {
        CurveModel::Affine(AffineMap::identity(n))
    }

    /// The constant map `R^n -> R^m` with value `value`.
    pub fn constant(n: usize, value: DVector<f64>) -> Self {
        let m = value.len();
        CurveModel::Affine(AffineMap {
            linear: DMatrix::zeros(m, n),
            offset: value,
        })
    }

    pub fn holomorphic(components: Vec<Vec<Complex64>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument(
                "a holomorphic curve needs at least one component".into(),
            ));
        }
        if components
            .iter()
            .flatten()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::NonFinite("polynomial coefficient"));
        }
        Ok(CurveModel::HolomorphicPolynomial { components })
    }

    /// `z -> z^k`.
    pub fn zpow(k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = Complex64::new(1.0, 0.0);
        CurveModel::HolomorphicPolynomial {
            components: vec![coeffs],
        }
    }

    pub fn complex_exp() -> Self {
        CurveModel::ComplexExp
    }

    pub fn composite(pre: AffineMap, core: CurveModel, post: AffineMap) -> Result<Self> {
        let n = core.domain_dim();
        if pre.domain_dim() != n || pre.target_dim() != n {
            return Err(Error::ShapeMismatch {
                expected_rows: n,
                expected_cols: n,
                rows: pre.target_dim(),
                cols: pre.domain_dim(),
            });
        }
        if !pre.is_invertible() {
            return Err(Error::InvalidArgument(
                "the pre-map of a composite must be invertible".into(),
            ));
        }
        if post.domain_dim() != core.target_dim() {
            return Err(Error::ShapeMismatch {
                expected_rows: post.target_dim(),
                expected_cols: core.target_dim(),
                rows: post.target_dim(),
                cols: post.domain_dim(),
            });
        }
        Ok(CurveModel::Composite {
            pre,
            core: Box::new(core),
            post,
        })
    }

    /// Postcomposes with an affine map of the target.
    pub fn then(self, post: AffineMap) -> Result<Self> {
        let n = self.domain_dim();
        Self::composite(AffineMap::identity(n), self, post)
    }

    /// Precomposes with an invertible affine self-map of the domain.
    pub fn precompose(self, pre: AffineMap) -> Result<Self> {
        let m = self.target_dim();
        Self::composite(pre, self, AffineMap::identity(m))
    }

    pub fn domain_dim(&self) -> usize {
        match self {
            CurveModel::Affine(a) => a.domain_dim(),
            CurveModel::HolomorphicPolynomial { .. } | CurveModel::ComplexExp => 2,
            CurveModel::Composite { pre, .. } => pre.domain_dim(),
        }
    }

    pub fn target_dim(&self) -> usize {
        match self {
            CurveModel::Affine(a) => a.target_dim(),
            CurveModel::HolomorphicPolynomial { components } => 2 * components.len(),
            CurveModel::ComplexExp => 2,
            CurveModel::Composite { post, .. } => post.target_dim(),
        }
    }

    /// Whether the model is an affine map (checked structurally: an affine
    /// variant, or a polynomial of degree at most one, possibly composed).
    pub fn is_affine(&self) -> bool {
        match self {
            CurveModel::Affine(_) => true,
            CurveModel::HolomorphicPolynomial { components } => components
                .iter()
                .all(|c| c.iter().skip(2).all(|z| z.norm() == 0.0)),
            CurveModel::ComplexExp => false,
            CurveModel::Composite { core, .. } => core.is_affine(),
        }
    }

    fn check_point(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.domain_dim() {
            return Err(Error::ShapeMismatch {
                expected_rows: self.domain_dim(),
                expected_cols: 1,
                rows: x.len(),
                cols: 1,
            });
        }
        Ok(())
    }

    /// Evaluates the model; panics on a point of the wrong dimension.
    pub fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            CurveModel::Affine(a) => a.apply(x),
            CurveModel::HolomorphicPolynomial { components } => {
                let z = Complex64::new(x[0], x[1]);
                let mut out = DVector::zeros(2 * components.len());
                for (j, coeffs) in components.iter().enumerate() {
                    let w = horner(coeffs, z);
                    out[2 * j] = w.re;
                    out[2 * j + 1] = w.im;
                }
                out
            }
            CurveModel::ComplexExp => {
                let w = Complex64::new(x[0], x[1]).exp();
                DVector::from_vec(vec![w.re, w.im])
            }
            CurveModel::Composite { pre, core, post } => post.apply(&core.eval(&pre.apply(x))),
        }
    }

    pub fn try_eval(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_point(x)?;
        Ok(self.eval(x))
    }

    fn jacobian_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match self {
            CurveModel::Affine(a) => a.linear.clone(),
            CurveModel::HolomorphicPolynomial { components } => {
                let z = Complex64::new(x[0], x[1]);
                let mut j = DMatrix::zeros(2 * components.len(), 2);
                for (k, coeffs) in components.iter().enumerate() {
                    complex_jacobian_block(&mut j, 2 * k, horner(&derivative(coeffs), z));
                }
                j
            }
            CurveModel::ComplexExp => {
                let mut j = DMatrix::zeros(2, 2);
                complex_jacobian_block(&mut j, 0, Complex64::new(x[0], x[1]).exp());
                j
            }
            CurveModel::Composite { pre, core, post } => {
                &post.linear * core.jacobian_matrix(&pre.apply(x)) * &pre.linear
            }
        }
    }

    /// Analytic Jacobian at `x` (chain rule through compositions).
    pub fn jacobian(&self, x: &DVector<f64>) -> Jacobian {
        Jacobian::new_unchecked(self.jacobian_matrix(x))
    }

    pub fn try_jacobian(&self, x: &DVector<f64>) -> Result<Jacobian> {
        self.check_point(x)?;
        Jacobian::new(self.jacobian_matrix(x))
    }

    /// Central-difference Jacobian with step `h`, for cross-validation.
    pub fn jacobian_fd(&self, x: &DVector<f64>, h: f64) -> Jacobian {
        let (n, m) = (self.domain_dim(), self.target_dim());
        let mut j = DMatrix::zeros(m, n);
        for c in 0..n {
            let mut p = x.clone();
            p[c] += h;
            let mut q = x.clone();
            q[c] -= h;
            let col = (self.eval(&p) - self.eval(&q)) / (2.0 * h);
            j.set_column(c, &col);
        }
        Jacobian::new_unchecked(j)
    }

    /// `||DF(x)||`.
    pub fn opnorm_at(&self, x: &DVector<f64>) -> f64 {
        self.jacobian(x).opnorm()
    }

    /// `||DF(x)||^p`.
    pub fn energy_density(&self, x: &DVector<f64>, p: f64) -> f64 {
        let sq = crate::linalg::largest_gram_eigenvalue(&self.jacobian_matrix(x)).max(0.0);
        // integer exponents avoid powf so that scaling F by a power of two
        // scales the density exactly
        if p.fract() != 0.0 || p.abs() > 64.0 {
            sq.powf(0.5 * p)
        } else if p as i64 % 2 == 0 {
            sq.powi(p as i32 / 2)
        } else {
            sq.sqrt().powi(p as i32)
        }
    }
}
