use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::profile::EnergyProfile;
use crate::curve::CurveModel;
use crate::error::{Error, Result};
use crate::sampling::{derive_seed, sample_points, Measure};

/// The profile must span at least this many doublings of the radius.
pub const MIN_DOUBLINGS: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GrowthLabel {
    AffineBounded,
    SuperEuclidean,
    Inconclusive,
}

impl std::fmt::Display for GrowthLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GrowthLabel::AffineBounded => "AffineBounded",
            GrowthLabel::SuperEuclidean => "SuperEuclidean",
            GrowthLabel::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GrowthTolerances {
    /// Doubling-ratio threshold `1 + delta`.
    pub delta: f64,
    /// Bound on the relative affine-fit residual.
    pub affinity: f64,
    /// Points used to fit the affine map.
    pub reference_points: usize,
    pub seed: u64,
}

impl Default for GrowthTolerances {
    fn default() -> Self {
        GrowthTolerances {
            delta: 0.05,
            affinity: 1e-8,
            reference_points: 2048,
            seed: 0,
        }
    }
}

/// `h` growth between consecutive radii, normalized to one doubling:
/// `(h2 / h1)^(ln 2 / ln(r2 / r1))`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DoublingRatio {
    pub r1: f64,
    pub r2: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthVerdict {
    pub label: GrowthLabel,
    pub doubling_ratios: Vec<DoublingRatio>,
    pub top_doubling_ratio: f64,
    pub monotonicity_margin: f64,
    /// `sup |F - L| / max(1, sup |F - F(x0)|)` for the least-squares affine
    /// fit `L` on the ball of the largest radius.
    pub affinity_residual: f64,
    pub reference_radius: f64,
    pub tolerances: GrowthTolerances,
}

fn doubling(h1: f64, h2: f64, r1: f64, r2: f64) -> f64 {
    if h1 == h2 {
        1.0
    } else {
        (h2 / h1).powf(std::f64::consts::LN_2 / (r2 / r1).ln())
    }
}

/// Relative sup-deviation of `model` from its least-squares affine fit on
/// `B_radius(center)`.
pub fn affinity_residual(
    model: &CurveModel,
    center: &DVector<f64>,
    radius: f64,
    points: usize,
    seed: u64,
) -> Result<f64> {
    let n = model.domain_dim();
    let xs = sample_points(center, radius, Measure::Ball, points.max(2 * (n + 1)), seed);
    let fx0 = model.eval(center);
    let m = model.target_dim();
    let design = DMatrix::from_fn(xs.len(), n + 1, |i, j| {
        if j < n {
            xs[i][j] - center[j]
        } else {
            1.0
        }
    });
    let values = DMatrix::from_fn(xs.len(), m, |i, j| model.eval(&xs[i])[j]);
    let fit = design
        .clone()
        .svd(true, true)
        .solve(&values, 1e-14)
        .map_err(|e| Error::InvalidArgument(format!("affine fit failed: {e}")))?;
    let residual = (&design * fit - &values)
        .row_iter()
        .map(|r| r.norm())
        .fold(0.0, f64::max);
    let spread = values
        .row_iter()
        .map(|r| (r.transpose() - &fx0).norm())
        .fold(0.0, f64::max);
    Ok(residual / spread.max(1.0))
}

/// Labels a profile [`GrowthLabel::SuperEuclidean`] when the top doubling
/// ratio reaches `1 + delta`, [`GrowthLabel::AffineBounded`] when every
/// ratio stays within `1 + delta` and the affine fit is tight, and
/// [`GrowthLabel::Inconclusive`] otherwise.
pub fn classify_growth(
    profile: &EnergyProfile,
    model: &CurveModel,
    tol: &GrowthTolerances,
) -> Result<GrowthVerdict> {
    if profile.center.len() != model.domain_dim() {
        return Err(Error::ShapeMismatch {
            expected_rows: model.domain_dim(),
            expected_cols: 1,
            rows: profile.center.len(),
            cols: 1,
        });
    }
    let spanned = profile.doublings();
    if profile.radii.len() < 2 || spanned < MIN_DOUBLINGS - 1e-12 {
        return Err(Error::ProfileTooShort {
            needed: MIN_DOUBLINGS as usize,
            spanned,
        });
    }
    let h = profile.h_values();
    let doubling_ratios: Vec<DoublingRatio> = profile
        .radii
        .windows(2)
        .zip(h.windows(2))
        .map(|(r, h)| DoublingRatio {
            r1: r[0],
            r2: r[1],
            ratio: doubling(h[0], h[1], r[0], r[1]),
        })
        .collect();
    let top = doubling_ratios.last().map_or(1.0, |d| d.ratio);
    let reference_radius = *profile.radii.last().unwrap_or(&1.0);
    let center = DVector::from_column_slice(&profile.center);
    let affinity = affinity_residual(
        model,
        &center,
        reference_radius,
        tol.reference_points,
        derive_seed(tol.seed, 0),
    )?;
    let threshold = 1.0 + tol.delta;
    let label = if top >= threshold {
        GrowthLabel::SuperEuclidean
    } else if doubling_ratios.iter().all(|d| d.ratio <= threshold) && affinity <= tol.affinity {
        GrowthLabel::AffineBounded
    } else {
        GrowthLabel::Inconclusive
    };
    Ok(GrowthVerdict {
        label,
        doubling_ratios,
        top_doubling_ratio: top,
        monotonicity_margin: profile.monotonicity_margin(),
        affinity_residual: affinity,
        reference_radius,
        tolerances: *tol,
    })
}
