use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::curve::{CurveModel, Region};
use crate::error::{Error, Result};
use crate::linalg::largest_gram_eigenvalue;

/// Minimum of the discrete Laplacian of `rho` over a lattice.
#[derive(Clone, Debug, Serialize)]
pub struct SubharmonicityReport {
    pub min_laplacian: f64,
    /// Node where the minimum is attained (first in lexicographic order).
    pub argmin: Vec<f64>,
    pub nodes: usize,
    pub step: f64,
    /// Required distance to `{DF = 0}` when `n = 2`.
    pub margin: f64,
}

fn bounding_box(region: &Region) -> (Vec<f64>, Vec<f64>) {
    match region {
        Region::Ball { center, radius: r }
        | Region::Shell {
            center, outer: r, ..
        } => (
            center.iter().map(|c| c - r).collect(),
            center.iter().map(|c| c + r).collect(),
        ),
        Region::Box { lower, upper } => (lower.clone(), upper.clone()),
    }
}

/// `rho = log ||DF||` for `n = 2`, `||DF||^((n-2)/2)` for `n >= 3`, from the
/// squared norm.
fn rho(n: usize, sq: f64) -> f64 {
    if n == 2 {
        0.5 * sq.ln()
    } else {
        sq.powf((n as f64 - 2.0) / 4.0)
    }
}

struct SliceMin {
    min: f64,
    argmin: Vec<f64>,
    nodes: usize,
}

/// [`subharmonicity_min_with_margin`] with margin `10 * step`.
pub fn subharmonicity_min(
    model: &CurveModel,
    region: &Region,
    step: f64,
) -> Result<SubharmonicityReport> {
    subharmonicity_min_with_margin(model, region, step, 10.0 * step)
}

/// Minimum over the nodes `step * Z^n` inside `region` of the
/// `(2n + 1)`-point Laplacian of `rho`.
///
/// For `n = 2` the distance from each node to the zero set of `DF` is
/// estimated to first order as `||DF|| / |grad ||DF|||`; a node closer than
/// `margin` is an [`Error::ZeroSetProximity`].
pub fn subharmonicity_min_with_margin(
    model: &CurveModel,
    region: &Region,
    step: f64,
    margin: f64,
) -> Result<SubharmonicityReport> {
    region.validate()?;
    let n = model.domain_dim();
    if region.dim() != n {
        return Err(Error::ShapeMismatch {
            expected_rows: n,
            expected_cols: 1,
            rows: region.dim(),
            cols: 1,
        });
    }
    if n < 2 {
        return Err(Error::InvalidArgument("subharmonicity needs n >= 2".into()));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "grid step must be positive, got {step}"
        )));
    }
    let (lo, hi) = bounding_box(region);
    let lo: Vec<i64> = lo.iter().map(|v| (v / step).floor() as i64).collect();
    let hi: Vec<i64> = hi.iter().map(|v| (v / step).ceil() as i64).collect();

    let sq_at = |idx: &[i64]| {
        let x = DVector::from_iterator(n, idx.iter().map(|&i| i as f64 * step));
        largest_gram_eigenvalue(model.jacobian(&x).matrix()).max(0.0)
    };

    let slices: Vec<Result<Option<SliceMin>>> = (lo[0]..=hi[0])
        .into_par_iter()
        .map(|i0| {
            let mut best: Option<SliceMin> = None;
            let mut idx = lo.clone();
            idx[0] = i0;
            loop {
                let x = DVector::from_iterator(n, idx.iter().map(|&i| i as f64 * step));
                if region.contains(&x) {
                    let sq0 = sq_at(&idx);
                    let mut lap = 0.0;
                    let mut grad2 = 0.0;
                    let mut touches_zero = sq0 == 0.0;
                    for axis in 0..n {
                        let mut nb = idx.clone();
                        nb[axis] += 1;
                        let sp = sq_at(&nb);
                        nb[axis] -= 2;
                        let sm = sq_at(&nb);
                        touches_zero |= n == 2 && (sp == 0.0 || sm == 0.0);
                        lap += rho(n, sp) + rho(n, sm) - 2.0 * rho(n, sq0);
                        let g = (sp.sqrt() - sm.sqrt()) / (2.0 * step);
                        grad2 += g * g;
                    }
                    if n == 2 && (touches_zero || sq0.sqrt() < margin * grad2.sqrt()) {
                        return Err(Error::ZeroSetProximity {
                            point: x.iter().copied().collect(),
                            margin,
                        });
                    }
                    let lap = lap / (step * step);
                    match &mut best {
                        Some(b) => {
                            b.nodes += 1;
                            if lap < b.min {
                                b.min = lap;
                                b.argmin = x.iter().copied().collect();
                            }
                        }
                        None => {
                            best = Some(SliceMin {
                                min: lap,
                                argmin: x.iter().copied().collect(),
                                nodes: 1,
                            })
                        }
                    }
                }
                // odometer over the remaining axes
                let mut axis = n - 1;
                loop {
                    if axis == 0 {
                        return Ok(best);
                    }
                    if idx[axis] < hi[axis] {
                        idx[axis] += 1;
                        break;
                    }
                    idx[axis] = lo[axis];
                    axis -= 1;
                }
            }
        })
        .collect();

    let mut total: Option<SliceMin> = None;
    for slice in slices {
        if let Some(s) = slice? {
            total = Some(match total {
                None => s,
                Some(t) => SliceMin {
                    nodes: t.nodes + s.nodes,
                    min: t.min.min(s.min),
                    argmin: if s.min < t.min { s.argmin } else { t.argmin },
                },
            });
        }
    }
    let total = total.ok_or(Error::EmptyRegion)?;
    Ok(SubharmonicityReport {
        min_laplacian: total.min,
        argmin: total.argmin,
        nodes: total.nodes,
        step,
        margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_flat() {
        let r = subharmonicity_min(&CurveModel::identity(3), &Region::unit_ball(3), 0.1).unwrap();
        assert_eq!(r.min_laplacian, 0.0);
        assert!(r.nodes > 3000);
    }

    #[test]
    fn zsquare_near_origin_is_rejected() {
        let err =
            subharmonicity_min(&CurveModel::zpow(2), &Region::unit_ball(2), 0.05).unwrap_err();
        assert!(matches!(err, Error::ZeroSetProximity { .. }), "{err:?}");
    }

    #[test]
    fn log_of_zsquare_is_nearly_harmonic() {
        let annulus = Region::Shell {
            center: vec![0.0, 0.0],
            inner: 0.5,
            outer: 1.0,
        };
        let r = subharmonicity_min(&CurveModel::zpow(2), &annulus, 0.02).unwrap();
        // leading error -h^2 cos(4t) / |z|^4
        assert!(r.min_laplacian < 0.0 && r.min_laplacian > -0.02 * 0.02 / 0.5f64.powi(4) * 1.01);
    }
}
