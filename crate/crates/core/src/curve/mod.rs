//! Curve models `R^n -> R^m` and the conformal residual
//! `||DF||^n - *F^*omega`.

pub mod catalog;
mod model;
mod spec;

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use model::{AffineMap, CurveModel, FD_STEP};

use crate::error::{Error, Result};
use crate::exterior::{AlternatingForm, Jacobian};
use crate::sampling::{stream_rng, unit_ball, unit_sphere};

/// Default tolerance for `verify_curve`.
pub const DEFAULT_RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Largest singular value of `j`.
pub fn opnorm(j: &Jacobian) -> f64 {
    j.opnorm()
}

fn check_form(model: &CurveModel, form: &AlternatingForm) -> Result<()> {
    if form.degree() != model.domain_dim() {
        return Err(Error::InvalidArgument(format!(
            "form degree {} does not match curve domain dimension {}",
            form.degree(),
            model.domain_dim()
        )));
    }
    if form.ambient() != model.target_dim() {
        return Err(Error::AmbientMismatch {
            left: model.target_dim(),
            right: form.ambient(),
        });
    }
    Ok(())
}

fn residual_unchecked(model: &CurveModel, form: &AlternatingForm, x: &DVector<f64>) -> f64 {
    let j = model.jacobian(x);
    let n = model.domain_dim() as i32;
    j.opnorm().powi(n) - form.pullback_top(&j).unwrap_or(f64::NAN)
}

/// `||DF(x)||^n - *F^*omega(x)`.
pub fn conformal_residual(
    model: &CurveModel,
    form: &AlternatingForm,
    x: &DVector<f64>,
) -> Result<f64> {
    check_form(model, form)?;
    if x.len() != model.domain_dim() {
        return Err(Error::ShapeMismatch {
            expected_rows: model.domain_dim(),
            expected_cols: 1,
            rows: x.len(),
            cols: 1,
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("point"));
    }
    Ok(residual_unchecked(model, form, x))
}

/// A bounded sampling region of the domain.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    /// `inner <= |x - center| <= outer`.
    Shell {
        center: Vec<f64>,
        inner: f64,
        outer: f64,
    },
}

impl Region {
    pub fn ball(center: &DVector<f64>, radius: f64) -> Self {
        Region::Ball {
            center: center.iter().copied().collect(),
            radius,
        }
    }

    pub fn unit_ball(n: usize) -> Self {
        Region::Ball {
            center: vec![0.0; n],
            radius: 1.0,
        }
    }

    pub fn unit_box(n: usize) -> Self {
        Region::Box {
            lower: vec![0.0; n],
            upper: vec![1.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Ball { center, .. } | Region::Shell { center, .. } => center.len(),
            Region::Box { lower, .. } => lower.len(),
        }
    }

    /// Checks that the region is bounded and has interior.
    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|v| v.is_finite());
        let ok = match self {
            Region::Ball { center, radius } => {
                finite(center) && radius.is_finite() && *radius > 0.0
            }
            Region::Box { lower, upper } => {
                lower.len() == upper.len()
                    && finite(lower)
                    && finite(upper)
                    && lower.iter().zip(upper).all(|(a, b)| a < b)
            }
            Region::Shell {
                center,
                inner,
                outer,
            } => {
                finite(center)
                    && inner.is_finite()
                    && outer.is_finite()
                    && 0.0 <= *inner
                    && inner < outer
            }
        };
        if ok && self.dim() > 0 {
            Ok(())
        } else {
            Err(Error::EmptyRegion)
        }
    }

    /// Whether `x` lies in the closed region.
    pub fn contains(&self, x: &DVector<f64>) -> bool {
        match self {
            Region::Ball { center, radius } => dist(x, center) <= *radius,
            Region::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (a, b))| a <= v && v <= b),
            Region::Shell {
                center,
                inner,
                outer,
            } => {
                let d = dist(x, center);
                *inner <= d && d <= *outer
            }
        }
    }

    /// A uniform sample.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> DVector<f64> {
        match self {
            Region::Ball { center, radius } => {
                DVector::from_column_slice(center) + unit_ball(rng, center.len()) * *radius
            }
            Region::Box { lower, upper } => DVector::from_fn(lower.len(), |i, _| {
                lower[i] + (upper[i] - lower[i]) * rng.gen::<f64>()
            }),
            Region::Shell {
                center,
                inner,
                outer,
            } => {
                let n = center.len() as f64;
                let u: f64 = rng.gen();
                let r = (inner.powf(n) + u * (outer.powf(n) - inner.powf(n))).powf(1.0 / n);
                DVector::from_column_slice(center) + unit_sphere(rng, center.len()) * r
            }
        }
    }
}

fn dist(x: &DVector<f64>, c: &[f64]) -> f64 {
    x.iter()
        .zip(c)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Sampled residuals of the conformal equation over a region.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub points: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub max_abs: f64,
    /// Smallest signed residual; `>= -tolerance` whenever the form has
    /// comass at most one.
    pub min: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub samples: usize,
    pub seed: u64,
}

impl ResidualReport {
    /// `x1,...,xn,residual` rows.
    pub fn to_csv(&self) -> String {
        let n = self.points.first().map_or(0, Vec::len);
        let mut out: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        out.push("residual".into());
        let mut csv = out.join(",") + "\n";
        for (p, r) in self.points.iter().zip(&self.residuals) {
            let row: Vec<String> = p
                .iter()
                .chain(std::iter::once(r))
                .map(|v| format!("{v:?}"))
                .collect();
            csv.push_str(&row.join(","));
            csv.push('\n');
        }
        csv
    }
}

/// Samples `samples` points of `region` and checks `|r(x)| <= tolerance`.
pub fn verify_curve(
    model: &CurveModel,
    form: &AlternatingForm,
    region: &Region,
    samples: usize,
    seed: u64,
    tolerance: f64,
) -> Result<ResidualReport> {
    check_form(model, form)?;
    region.validate()?;
    if region.dim() != model.domain_dim() {
        return Err(Error::ShapeMismatch {
            expected_rows: model.domain_dim(),
            expected_cols: 1,
            rows: region.dim(),
            cols: 1,
        });
    }
    if samples == 0 {
        return Err(Error::InvalidArgument(
            "verify_curve needs at least one sample".into(),
        ));
    }
    let mut rng = stream_rng(seed, 0);
    let points: Vec<DVector<f64>> = (0..samples).map(|_| region.sample(&mut rng)).collect();
    let residuals: Vec<f64> = points
        .par_iter()
        .map(|x| residual_unchecked(model, form, x))
        .collect();
    let max_abs = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let min = residuals.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ResidualReport {
        points: points.iter().map(|p| p.iter().copied().collect()).collect(),
        passed: max_abs <= tolerance,
        residuals,
        max_abs,
        min,
        tolerance,
        samples,
        seed,
    })
}
