//! Blow-down rescalings `x -> (F(y + r x) - F(y)) / r`, their distance to
//! linear isometries, and the radii sandwiching preimages of balls.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curve::{AffineMap, CurveModel};
use crate::error::{Error, Result};
use crate::growth::ball_average;
use crate::sampling::{derive_seed, sample_points, stream_rng, unit_sphere, Estimate, Measure};

/// Rescaled model `x -> (F(y + r x) - F(y)) / r`.
///
/// Affine models collapse to their linear part; composites absorb the
/// rescaling into their own pre- and post-maps, so repeated rescaling never
/// nests.
pub fn rescale(model: &CurveModel, y: &DVector<f64>, r: f64) -> Result<CurveModel> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "scale must be positive, got {r}"
        )));
    }
    let n = model.domain_dim();
    if y.len() != n {
        return Err(Error::ShapeMismatch {
            expected_rows: n,
            expected_cols: 1,
            rows: y.len(),
            cols: 1,
        });
    }
    match model {
        CurveModel::Affine(a) => Ok(CurveModel::Affine(AffineMap {
            linear: a.linear.clone(),
            offset: DVector::zeros(a.target_dim()),
        })),
        CurveModel::Composite { pre, core, post } => {
            let inner = pre.apply(y);
            let base = &post.linear * core.eval(&inner);
            let pre = AffineMap::new(&pre.linear * r, inner)?;
            let post = AffineMap::new(&post.linear / r, -base / r)?;
            CurveModel::composite(pre, (**core).clone(), post)
        }
        core => {
            let m = core.target_dim();
            let pre = AffineMap::new(DMatrix::identity(n, n) * r, y.clone())?;
            let post = AffineMap::new(DMatrix::identity(m, m) / r, -core.eval(y) / r)?;
            CurveModel::composite(pre, core.clone(), post)
        }
    }
}

/// Best-fit linear isometry `G` and `max |F(x) - G x|` over a sample.
#[derive(Clone, Debug, Serialize)]
pub struct IsometryFit {
    pub deviation: f64,
    /// Rows of the `m x n` matrix of `G`.
    pub isometry: Vec<Vec<f64>>,
    /// Largest entry of `G^T G - I`.
    pub orthonormality_defect: f64,
}

impl IsometryFit {
    pub fn matrix(&self) -> DMatrix<f64> {
        let m = self.isometry.len();
        let n = self.isometry.first().map_or(0, Vec::len);
        DMatrix::from_fn(m, n, |i, j| self.isometry[i][j])
    }
}

/// Fits `G = U V^T` from the thin SVD `U S V^T` of the cross-covariance
/// `sum F(x) x^T`. For `m = n` the orientation-preserving branch is taken.
pub fn isometry_deviation(model: &CurveModel, sample: &[DVector<f64>]) -> Result<IsometryFit> {
    let (n, m) = (model.domain_dim(), model.target_dim());
    if m < n {
        return Err(Error::InvalidArgument(format!(
            "no isometry R^{n} -> R^{m} exists"
        )));
    }
    if let Some(x) = sample.iter().find(|x| x.len() != n) {
        return Err(Error::ShapeMismatch {
            expected_rows: n,
            expected_cols: 1,
            rows: x.len(),
            cols: 1,
        });
    }
    let xs = DMatrix::from_fn(n, sample.len(), |i, j| sample[j][i]);
    let gram_sv = (&xs * xs.transpose()).singular_values();
    let top = gram_sv.max();
    let rank = gram_sv
        .iter()
        .filter(|&&s| s > 1e-10 * top && s > 0.0)
        .count();
    if rank < n {
        return Err(Error::DegenerateSample { dim: n, rank });
    }
    let values: Vec<DVector<f64>> = sample.par_iter().map(|x| model.eval(x)).collect();
    let fs = DMatrix::from_fn(m, sample.len(), |i, j| values[j][i]);
    let cross = &fs * xs.transpose();
    let svd = cross.svd(true, true);
    let mut u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    if m == n && (&u * &v_t).determinant() < 0.0 {
        // smallest singular value is last once sorted; flip its left vector
        let sv = &svd.singular_values;
        let k = (0..n)
            .min_by(|&a, &b| sv[a].total_cmp(&sv[b]))
            .unwrap_or(n - 1);
        let col = -u.column(k);
        u.set_column(k, &col);
    }
    let g = &u * &v_t;
    let deviation = sample
        .iter()
        .zip(&values)
        .map(|(x, fx)| (fx - &g * x).norm())
        .fold(0.0, f64::max);
    let defect = (g.transpose() * &g - DMatrix::identity(n, n)).amax();
    Ok(IsometryFit {
        deviation,
        isometry: (0..m).map(|i| g.row(i).iter().copied().collect()).collect(),
        orthonormality_defect: defect,
    })
}

/// Points of the closed unit ball: half interior, half boundary sphere.
pub fn unit_ball_sample(n: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let o = DVector::zeros(n);
    let half = count / 2;
    let mut pts = sample_points(&o, 1.0, Measure::Ball, count - half, derive_seed(seed, 0));
    pts.extend(sample_points(
        &o,
        1.0,
        Measure::Sphere,
        half,
        derive_seed(seed, 1),
    ));
    pts
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BlowdownOptions {
    /// Points of the closed unit ball per scale.
    pub points: usize,
    /// Monte-Carlo samples for the normalized energy at each scale.
    pub energy_samples: usize,
    /// The energy hypothesis holds when `|h(r) - 1| <= energy_tolerance`
    /// (plus three standard errors) at every scale.
    pub energy_tolerance: f64,
    pub seed: u64,
}

impl Default for BlowdownOptions {
    fn default() -> Self {
        BlowdownOptions {
            points: 2048,
            energy_samples: 20_000,
            energy_tolerance: 0.05,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScaleReport {
    pub scale: f64,
    pub deviation: f64,
    /// `h(r)` at the anchor, i.e. the energy of the rescaled model on `B_1`.
    pub energy: Estimate,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowdownReport {
    pub anchor: Vec<f64>,
    pub scales: Vec<ScaleReport>,
    pub final_fit: IsometryFit,
    /// Whether the normalized-energy hypothesis holds at every scale; if not,
    /// deviations are diagnostics only.
    pub energy_hypothesis: bool,
    /// Deviations non-increasing along the scales, up to [`DEVIATION_FLOOR`].
    pub deviations_decrease: bool,
    pub options: BlowdownOptions,
}

/// Rounding allowance when comparing deviations of successive scales.
pub const DEVIATION_FLOOR: f64 = 1e-12;

/// Rescales at each of `scales` (increasing) and fits an isometry on a
/// sample of the closed unit ball. Scale `j` uses `derive_seed(seed, j)`.
pub fn blowdown(
    model: &CurveModel,
    anchor: &DVector<f64>,
    scales: &[f64],
    opts: &BlowdownOptions,
) -> Result<BlowdownReport> {
    if scales.is_empty() || scales.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "scales must be nonempty and strictly increasing".into(),
        ));
    }
    let n = model.domain_dim();
    let per_scale = scales
        .par_iter()
        .enumerate()
        .map(|(j, &r)| {
            let seed = derive_seed(opts.seed, j as u64);
            let rescaled = rescale(model, anchor, r)?;
            let fit = isometry_deviation(
                &rescaled,
                &unit_ball_sample(n, opts.points, derive_seed(seed, 0)),
            )?;
            let energy = ball_average(
                &rescaled,
                &DVector::zeros(n),
                1.0,
                n as f64,
                opts.energy_samples,
                derive_seed(seed, 1),
            )?;
            Ok((
                ScaleReport {
                    scale: r,
                    deviation: fit.deviation,
                    energy,
                },
                fit,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let energy_hypothesis = per_scale.iter().all(|(s, _)| {
        (s.energy.value - 1.0).abs() <= opts.energy_tolerance + 3.0 * s.energy.std_error
    });
    let deviations_decrease = per_scale
        .windows(2)
        .all(|w| w[1].0.deviation <= w[0].0.deviation + DEVIATION_FLOOR);
    let (scales, mut fits): (Vec<ScaleReport>, Vec<IsometryFit>) = per_scale.into_iter().unzip();
    Ok(BlowdownReport {
        anchor: anchor.iter().copied().collect(),
        scales,
        final_fit: fits.pop().expect("at least one scale"),
        energy_hypothesis,
        deviations_decrease,
        options: *opts,
    })
}

/// A radius found by the shell search, or the search cap if it was hit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiusBound {
    Finite { value: f64 },
    AtLeastCap { cap: f64 },
}

impl RadiusBound {
    pub fn value(&self) -> f64 {
        match *self {
            RadiusBound::Finite { value } => value,
            RadiusBound::AtLeastCap { .. } => f64::INFINITY,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ShellSearch {
    /// Bisection stops once the bracket is this narrow.
    pub resolution: f64,
    pub max_radius: f64,
    pub directions: usize,
    /// Local refinement rounds around the extremal direction.
    pub refine_steps: usize,
}

impl ShellSearch {
    /// Resolution `1e-6 max(r, 1)`, cap `1e3 max(r, 1)`, `10^4` directions,
    /// three refinement rounds.
    pub fn for_radius(r: f64) -> Self {
        let s = r.max(1.0);
        ShellSearch {
            resolution: 1e-6 * s,
            max_radius: 1e3 * s,
            directions: 10_000,
            refine_steps: 3,
        }
    }
}

/// `s_r` and `S_r`: the largest ball around `x0` mapped into `B_r(F(x0))`
/// and the smallest ball containing the preimage.
#[derive(Clone, Debug, Serialize)]
pub struct PropernessRadii {
    pub r: f64,
    pub inner: RadiusBound,
    pub outer: RadiusBound,
    pub resolution: f64,
    pub search: ShellSearch,
    pub seed: u64,
}

struct Shell<'a> {
    model: &'a CurveModel,
    x0: &'a DVector<f64>,
    fx0: DVector<f64>,
    dirs: Vec<DVector<f64>>,
    refine_steps: usize,
    seed: u64,
}

impl Shell<'_> {
    fn at(&self, s: f64, u: &DVector<f64>) -> f64 {
        (self.model.eval(&(self.x0 + u * s)) - &self.fx0).norm()
    }

    /// Sup (`sign = 1`) or inf (`sign = -1`) of `|F - F(x0)|` on the sphere
    /// of radius `s`, over the direction set plus a local refinement.
    fn extreme(&self, s: f64, sign: f64) -> f64 {
        // ties go to the lowest index so the result is schedule-independent
        let (i, mut best) = self
            .dirs
            .par_iter()
            .enumerate()
            .map(|(i, u)| (i, sign * self.at(s, u)))
            .reduce_with(|a, b| {
                if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                    b
                } else {
                    a
                }
            })
            .expect("nonempty direction set");
        let mut best_u = self.dirs[i].clone();
        let n = self.x0.len();
        let spacing = (1.0 / self.dirs.len() as f64).powf(1.0 / (n as f64 - 1.0).max(1.0));
        let mut rng = stream_rng(self.seed, 1);
        let mut angle = spacing;
        for _ in 0..self.refine_steps {
            for _ in 0..4 * n {
                let t = unit_sphere(&mut rng, n);
                let t = &t - &best_u * best_u.dot(&t);
                let norm = t.norm();
                if norm < 1e-12 {
                    continue;
                }
                let cand = {
                    let c = &best_u + t * (angle * rng.gen::<f64>() / norm);
                    let cn = c.norm();
                    c / cn
                };
                let val = sign * self.at(s, &cand);
                if val > best {
                    best = val;
                    best_u = cand;
                }
            }
            angle *= 0.5;
        }
        sign * best
    }
}

/// Bracketing search for the properness radii of `B_r(F(x0))`.
///
/// `s_r` is the largest `s` (to resolution) whose sphere maps into the open
/// ball; `S_r` is the smallest `S` from which every tested sphere up to the
/// cap maps outside it.
pub fn properness_radii(
    model: &CurveModel,
    x0: &DVector<f64>,
    r: f64,
    search: &ShellSearch,
    seed: u64,
) -> Result<PropernessRadii> {
    let n = model.domain_dim();
    if x0.len() != n {
        return Err(Error::ShapeMismatch {
            expected_rows: n,
            expected_cols: 1,
            rows: x0.len(),
            cols: 1,
        });
    }
    if !(r > 0.0 && r.is_finite())
        || !(search.resolution > 0.0)
        || !(search.max_radius > search.resolution)
    {
        return Err(Error::InvalidArgument(
            "properness search needs r > 0 and 0 < resolution < cap".into(),
        ));
    }
    if search.directions == 0 {
        return Err(Error::InvalidArgument(
            "properness search needs directions".into(),
        ));
    }
    let dirs = sample_points(
        &DVector::zeros(n),
        1.0,
        Measure::Sphere,
        search.directions,
        derive_seed(seed, 0),
    );
    let shell = Shell {
        model,
        x0,
        fx0: model.eval(x0),
        dirs,
        refine_steps: search.refine_steps,
        seed: derive_seed(seed, 1),
    };
    let cap = search.max_radius;

    // s_r: sup on the sphere stays below r
    let inside = |s: f64| shell.extreme(s, 1.0) < r;
    let inner = if inside(cap) {
        RadiusBound::AtLeastCap { cap }
    } else {
        let (mut lo, mut hi) = (0.0, cap);
        while hi - lo > search.resolution {
            let mid = 0.5 * (lo + hi);
            if inside(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        RadiusBound::Finite { value: lo }
    };

    // S_r: inf on the sphere reaches r, checked up to the cap
    let outside = |t: f64| shell.extreme(t, -1.0) >= r;
    let outer = if !outside(cap) {
        RadiusBound::AtLeastCap { cap }
    } else {
        let mut floor = 0.0;
        loop {
            let (mut lo, mut hi) = (floor, cap);
            while hi - lo > search.resolution {
                let mid = 0.5 * (lo + hi);
                if outside(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            // every sphere between hi and the cap must stay outside too
            let witness = (1..=16)
                .map(|k| hi + (cap - hi) * k as f64 / 16.0)
                .find(|&t| !outside(t));
            match witness {
                Some(t) => floor = t,
                None => break RadiusBound::Finite { value: hi },
            }
        }
    };
    Ok(PropernessRadii {
        r,
        inner,
        outer,
        resolution: search.resolution,
        search: *search,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::catalog::catalog_curves;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    #[test]
    fn rescale_examples() {
        let id = CurveModel::identity(3);
        assert_eq!(rescale(&id, &v(&[1.0, 2.0, 3.0]), 7.0).unwrap(), id);
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let model = CurveModel::affine(a.clone(), v(&[1.0, -1.0, 2.0])).unwrap();
        assert_eq!(
            rescale(&model, &v(&[0.5, 0.5]), 3.0).unwrap(),
            CurveModel::affine(a, DVector::zeros(3)).unwrap()
        );
        let z2 = rescale(&CurveModel::zpow(2), &v(&[0.0, 0.0]), 4.0).unwrap();
        let x = v(&[0.3, -0.2]);
        let direct = CurveModel::zpow(2).eval(&x) * 4.0;
        assert!((z2.eval(&x) - direct).amax() < 1e-15);
    }

    #[test]
    fn rescaling_composes() {
        let exp = CurveModel::ComplexExp;
        let y = v(&[0.2, -0.4]);
        let once = rescale(&rescale(&exp, &y, 1.5).unwrap(), &v(&[0.0, 0.0]), 2.0).unwrap();
        let direct = rescale(&exp, &y, 3.0).unwrap();
        for x in unit_ball_sample(2, 64, 3) {
            assert!((once.eval(&x) - direct.eval(&x)).amax() < 1e-12);
        }
    }

    #[test]
    fn isometries_fit_exactly() {
        for c in catalog_curves().into_iter().filter(|c| c.affine) {
            let n = c.model.domain_dim();
            let lin = rescale(&c.model, &DVector::zeros(n), 1.0).unwrap();
            let fit = isometry_deviation(&lin, &unit_ball_sample(n, 256, 1)).unwrap();
            assert!(fit.deviation <= 1e-12, "{}: {}", c.name, fit.deviation);
            assert!(fit.orthonormality_defect < 1e-10);
        }
    }

    #[test]
    fn degenerate_samples_are_rejected() {
        let pts = vec![v(&[1.0, 0.0]), v(&[2.0, 0.0]), v(&[-1.0, 0.0])];
        assert_eq!(
            isometry_deviation(&CurveModel::identity(2), &pts).unwrap_err(),
            Error::DegenerateSample { dim: 2, rank: 1 }
        );
    }

    #[test]
    fn exp_fails_the_energy_hypothesis() {
        let opts = BlowdownOptions {
            energy_samples: 4000,
            ..Default::default()
        };
        let report = blowdown(
            &CurveModel::ComplexExp,
            &v(&[0.0, 0.0]),
            &[1.0, 4.0, 16.0],
            &opts,
        )
        .unwrap();
        assert!(!report.energy_hypothesis);
        let id = blowdown(
            &CurveModel::identity(2),
            &v(&[1.0, 1.0]),
            &[1.0, 4.0],
            &opts,
        )
        .unwrap();
        assert!(id.energy_hypothesis && id.deviations_decrease);
    }

    #[test]
    fn properness_examples() {
        let search = ShellSearch {
            directions: 500,
            ..ShellSearch::for_radius(2.0)
        };
        let id =
            properness_radii(&CurveModel::identity(2), &v(&[1.0, 2.0]), 2.0, &search, 1).unwrap();
        assert!((id.inner.value() - 2.0).abs() <= search.resolution);
        assert!((id.outer.value() - 2.0).abs() <= search.resolution);
        let z2 = properness_radii(&CurveModel::zpow(2), &v(&[0.0, 0.0]), 2.0, &search, 1).unwrap();
        assert!((z2.inner.value() - 2f64.sqrt()).abs() <= search.resolution);
        assert!((z2.outer.value() - 2f64.sqrt()).abs() <= search.resolution);
        let exp =
            properness_radii(&CurveModel::ComplexExp, &v(&[0.0, 0.0]), 2.0, &search, 1).unwrap();
        assert!(matches!(exp.outer, RadiusBound::AtLeastCap { .. }));
    }
}
