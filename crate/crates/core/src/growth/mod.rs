//! Energy growth of curve models: ball and sphere averages of `||DF||^p`,
//! the derivative of `h(r)`, isoperimetric gaps, modulus and Caccioppoli
//! constants, subharmonicity, the mass ratio, and the growth classifier.
//!
//! Every randomized quantity is a seeded [`Estimate`].

mod classify;
mod profile;
mod subharmonic;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

pub use classify::{classify_growth, GrowthLabel, GrowthTolerances, GrowthVerdict, MIN_DOUBLINGS};
pub use profile::{energy_profile, geometric_radii, parse_radii_grid, EnergyProfile, RadiusStats};
pub use subharmonic::{subharmonicity_min, subharmonicity_min_with_margin, SubharmonicityReport};

use crate::curve::CurveModel;
use crate::error::{Error, Result};
use crate::sampling::{antithetic_mean, derive_seed, sample_points, Estimate, Measure};

/// Default Monte-Carlo sample count per average.
pub const DEFAULT_SAMPLES: usize = 200_000;
/// Smallest accepted sample count.
pub const MIN_SAMPLES: usize = 1000;
/// Points used for image-diameter estimates.
pub const DIAMETER_POINTS: usize = 2048;
/// Directions sampled on the boundary sphere for the properness check.
pub const SHELL_DIRECTIONS: usize = 10_000;

fn check_args(model: &CurveModel, x0: &DVector<f64>, r: f64, samples: usize) -> Result<()> {
    if x0.len() != model.domain_dim() {
        return Err(Error::ShapeMismatch {
            expected_rows: model.domain_dim(),
            expected_cols: 1,
            rows: x0.len(),
            cols: 1,
        });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("center"));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius must be positive, got {r}"
        )));
    }
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_SAMPLES} samples are required, got {samples}"
        )));
    }
    Ok(())
}

fn average(
    model: &CurveModel,
    x0: &DVector<f64>,
    r: f64,
    p: f64,
    samples: usize,
    seed: u64,
    measure: Measure,
) -> Result<Estimate> {
    check_args(model, x0, r, samples)?;
    Ok(antithetic_mean(x0, r, measure, samples, seed, |x| {
        model.energy_density(x, p)
    }))
}

/// Mean of `||DF||^p` over the ball `B_r(x0)`.
pub fn ball_average(
    model: &CurveModel,
    x0: &DVector<f64>,
    r: f64,
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    average(model, x0, r, p, samples, seed, Measure::Ball)
}

/// Mean of `||DF||^p` over the sphere `dB_r(x0)`.
pub fn sphere_average(
    model: &CurveModel,
    x0: &DVector<f64>,
    r: f64,
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    average(model, x0, r, p, samples, seed, Measure::Sphere)
}

/// `(n / r) (sphere mean - ball mean)` of `||DF||^n`; the two averages use
/// the sub-seeds `derive_seed(seed, 0)` and `derive_seed(seed, 1)`.
pub fn h_prime(
    model: &CurveModel,
    x0: &DVector<f64>,
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    Ok(profile::radius_stats(model, x0, r, samples, seed)?.h_prime)
}

/// `(sphere mean of ||DF||^(n-1))^(n/(n-1)) - ball mean of ||DF||^n`, with
/// a delta-method error.
pub fn isoperimetric_gap(
    model: &CurveModel,
    x0: &DVector<f64>,
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    profile::radius_stats(model, x0, r, samples, seed)?
        .isoperimetric_gap
        .ok_or_else(|| Error::InvalidArgument("the isoperimetric gap needs n >= 2".into()))
}

pub(crate) fn gap_from(sphere_low: &Estimate, ball: &Estimate, n: usize) -> Estimate {
    let q = n as f64 / (n as f64 - 1.0);
    let lhs = sphere_low.value.max(0.0).powf(q);
    let dlhs = q * sphere_low.value.max(0.0).powf(q - 1.0) * sphere_low.std_error;
    Estimate {
        value: lhs - ball.value,
        std_error: dlhs.hypot(ball.std_error),
        samples: sphere_low.samples + ball.samples,
    }
}

/// `max |F(x) - F(y)| / (|x - y| (mean of ||DF||^n on B_2r)^(1/n))` over
/// `pairs` sampled pairs in `B_r(x0)`.
///
/// The ball average uses `max(pairs, MIN_SAMPLES)` samples and the sub-seed
/// `derive_seed(seed, 1)`; pairs with `x = y` are skipped.
pub fn modulus_constant(
    model: &CurveModel,
    x0: &DVector<f64>,
    r: f64,
    pairs: usize,
    seed: u64,
) -> Result<f64> {
    check_args(model, x0, r, MIN_SAMPLES)?;
    if pairs == 0 {
        return Err(Error::InvalidArgument(
            "modulus_constant needs at least one pair".into(),
        ));
    }
    let n = model.domain_dim();
    let energy = ball_average(
        model,
        x0,
        2.0 * r,
        n as f64,
        pairs.max(MIN_SAMPLES),
        derive_seed(seed, 1),
    )?;
    let scale = energy.value.powf(1.0 / n as f64);
    let xs = sample_points(x0, r, Measure::Ball, pairs, derive_seed(seed, 2));
    let ys = sample_points(x0, r, Measure::Ball, pairs, derive_seed(seed, 3));
    let best = xs
        .par_iter()
        .zip(ys.par_iter())
        .filter_map(|(x, y)| {
            let dx = (x - y).norm();
            (dx > 0.0).then(|| (model.eval(x) - model.eval(y)).norm() / dx)
        })
        .reduce(|| 0.0, f64::max);
    if scale == 0.0 {
        return Ok(if best == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(best / scale)
}

/// Diameter of the sampled image `F(B_r(x0))`: antithetic points of the
/// boundary sphere and of the interior, compared pairwise.
pub fn image_diameter(model: &CurveModel, x0: &DVector<f64>, r: f64, seed: u64) -> Result<f64> {
    check_args(model, x0, r, MIN_SAMPLES)?;
    let half = DIAMETER_POINTS / 2;
    let mut points = sample_points(x0, r, Measure::Sphere, half, derive_seed(seed, 0));
    points.extend(sample_points(
        x0,
        r,
        Measure::Ball,
        half,
        derive_seed(seed, 1),
    ));
    let images: Vec<DVector<f64>> = points.par_iter().map(|x| model.eval(x)).collect();
    Ok((0..images.len())
        .into_par_iter()
        .map(|i| {
            images[i + 1..]
                .iter()
                .map(|y| (&images[i] - y).norm())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max))
}

/// `(mean of ||DF||^n on B_r)^(1/n) / (diam F(B_2r) / 2r)`.
///
/// Errors with [`Error::ConstantMap`] when the sampled image is a point.
pub fn caccioppoli_ratio(
    model: &CurveModel,
    x0: &DVector<f64>,
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    check_args(model, x0, r, samples)?;
    let n = model.domain_dim() as f64;
    let diam = image_diameter(model, x0, 2.0 * r, derive_seed(seed, 1))?;
    if diam == 0.0 {
        return Err(Error::ConstantMap);
    }
    let energy = ball_average(model, x0, r, n, samples, derive_seed(seed, 0))?;
    Ok(energy.value.powf(1.0 / n) / (diam / (2.0 * r)))
}

/// The mass ratio of the image near `F(x0)` with its properness check.
#[derive(Clone, Debug, Serialize)]
pub struct MassRatio {
    pub ratio: Estimate,
    pub radius: f64,
    pub truncation_radius: f64,
    /// Whether every sampled point of `dB_R(x0)` maps outside `B_r(F(x0))`;
    /// if not, the ratio is only a lower bound.
    pub proper: bool,
    /// Smallest sampled `|F(x) - F(x0)|` on `dB_R(x0)`.
    pub shell_min: f64,
}

/// `integral over F^-1(B_r(F(x0))) n B_R(x0) of ||DF||^n`, divided by
/// `omega_n r^n`.
///
/// The shell check accepts boundary images within a relative `1e-9` of `r`.
pub fn mass_ratio(
    model: &CurveModel,
    x0: &DVector<f64>,
    r: f64,
    truncation_radius: f64,
    samples: usize,
    seed: u64,
) -> Result<MassRatio> {
    check_args(model, x0, r, samples)?;
    check_args(model, x0, truncation_radius, samples)?;
    let n = model.domain_dim();
    let fx0 = model.eval(x0);
    let shell = sample_points(
        x0,
        truncation_radius,
        Measure::Sphere,
        SHELL_DIRECTIONS,
        derive_seed(seed, 1),
    );
    let shell_min = shell
        .par_iter()
        .map(|x| (model.eval(x) - &fx0).norm())
        .reduce(|| f64::INFINITY, f64::min);
    let mean = antithetic_mean(
        x0,
        truncation_radius,
        Measure::Ball,
        samples,
        derive_seed(seed, 0),
        |x| {
            if (model.eval(x) - &fx0).norm() < r {
                model.energy_density(x, n as f64)
            } else {
                0.0
            }
        },
    );
    // vol(B_R) / (omega_n r^n) = (R / r)^n
    let factor = (truncation_radius / r).powi(n as i32);
    Ok(MassRatio {
        ratio: Estimate {
            value: factor * mean.value,
            std_error: factor * mean.std_error,
            samples: mean.samples,
        },
        radius: r,
        truncation_radius,
        proper: shell_min >= r * (1.0 - 1e-9),
        shell_min,
    })
}
