//! Named curves, each paired with the calibration it is conformal for.
//!
//! | name | map | form |
//! |------|-----|------|
//! | `identity:n` | `x -> x` | `volume:n` |
//! | `rotation` | rotation of `R^2` by `pi/3` plus a translation | `volume:2` |
//! | `complex-line` | a complex line in `C^2`, translated | `symplectic:2` |
//! | `slag-plane` | `x -> (x1, 0, x2, 0) + b` | `special_lagrangian:2:0` |
//! | `associative-plane` | `R^3` onto `e1, e2, e3` in `R^7`, translated | `associative` |
//! | `cayley-plane` | `R^4` onto `e1..e4` in `R^8` | `cayley` |
//! | `zsquare`, `zcube`, `zpow:k` | `z -> z^k` | `volume:2` |
//! | `moment` | `z -> (z, z^2)` | `symplectic:2` |
//! | `exp` | `z -> e^z` | `volume:2` |
//!
//! Two non-curves are addressable by name for negative checks: `stretch`
//! (`diag(2, 1)`) and `constant:n:m`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::model::{AffineMap, CurveModel};
use crate::calibration::Calibration;
use crate::error::{Error, Result};

/// A catalog curve together with its paired calibration.
#[derive(Clone, Debug)]
pub struct CatalogCurve {
    pub name: String,
    pub model: CurveModel,
    pub calibration: Calibration,
    pub affine: bool,
    /// `||DF|| <= 1` everywhere.
    pub lipschitz_one: bool,
}

fn embedding(m: usize, n: usize, offset: Vec<f64>) -> CurveModel {
    CurveModel::Affine(AffineMap {
        linear: DMatrix::from_fn(m, n, |i, j| if i == j { 1.0 } else { 0.0 }),
        offset: DVector::from_vec(offset),
    })
}

fn rotation() -> CurveModel {
    let (s, c) = (PI / 3.0).sin_cos();
    CurveModel::Affine(AffineMap {
        linear: DMatrix::from_row_slice(2, 2, &[c, -s, s, c]),
        offset: DVector::from_vec(vec![0.25, -1.5]),
    })
}

fn complex_line() -> CurveModel {
    // z -> (cos(a) e^{ib} z, sin(a) z)
    let (sa, ca) = (PI / 6.0).sin_cos();
    let (sb, cb) = (PI / 5.0).sin_cos();
    CurveModel::Affine(AffineMap {
        linear: DMatrix::from_row_slice(
            4,
            2,
            &[ca * cb, -ca * sb, ca * sb, ca * cb, sa, 0.0, 0.0, sa],
        ),
        offset: DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]),
    })
}

fn slag_plane() -> CurveModel {
    CurveModel::Affine(AffineMap {
        linear: DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]),
        offset: DVector::from_vec(vec![0.0, 1.0, 0.0, -1.0]),
    })
}

fn moment() -> CurveModel {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    CurveModel::HolomorphicPolynomial {
        components: vec![vec![zero, one], vec![zero, zero, one]],
    }
}

fn entry(
    name: &str,
    model: CurveModel,
    calibration: Calibration,
    lipschitz_one: bool,
) -> CatalogCurve {
    CatalogCurve {
        name: name.to_string(),
        affine: model.is_affine(),
        model,
        calibration,
        lipschitz_one,
    }
}

/// Every conformal curve of the catalog with its calibration.
pub fn catalog_curves() -> Vec<CatalogCurve> {
    use Calibration::*;
    vec![
        entry("identity:2", CurveModel::identity(2), Volume { n: 2 }, true),
        entry("identity:3", CurveModel::identity(3), Volume { n: 3 }, true),
        entry("rotation", rotation(), Volume { n: 2 }, true),
        entry("complex-line", complex_line(), Symplectic { d: 2 }, true),
        entry(
            "slag-plane",
            slag_plane(),
            SpecialLagrangian { n: 2, theta: 0.0 },
            true,
        ),
        entry(
            "associative-plane",
            embedding(7, 3, vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, -1.0]),
            Associative,
            true,
        ),
        entry("cayley-plane", embedding(8, 4, vec![0.0; 8]), Cayley, true),
        entry("zsquare", CurveModel::zpow(2), Volume { n: 2 }, false),
        entry("zcube", CurveModel::zpow(3), Volume { n: 2 }, false),
        entry("moment", moment(), Symplectic { d: 2 }, false),
        entry("exp", CurveModel::ComplexExp, Volume { n: 2 }, false),
    ]
}

fn int_param(name: &str, p: Option<&str>) -> Result<usize> {
    let p = p.ok_or_else(|| Error::InvalidParameters {
        name: name.to_string(),
        reason: "missing integer parameter".into(),
    })?;
    p.parse().map_err(|_| Error::InvalidParameters {
        name: name.to_string(),
        reason: format!("`{p}` is not a positive integer"),
    })
}

/// Resolves `name[:params]` to a model; see the module table.
pub fn named_curve(spec: &str) -> Result<CurveModel> {
    let mut parts = spec.trim().split(':');
    let name = parts.next().unwrap_or("");
    let (p1, p2) = (parts.next(), parts.next());
    if let Some(extra) = parts.next() {
        return Err(Error::InvalidParameters {
            name: name.to_string(),
            reason: format!("unexpected parameter `{extra}`"),
        });
    }
    let model = match name {
        "identity" => {
            let n = int_param(name, p1)?;
            if n == 0 {
                return Err(Error::InvalidParameters {
                    name: name.into(),
                    reason: "n must be at least 1".into(),
                });
            }
            CurveModel::identity(n)
        }
        "zpow" => {
            let k = int_param(name, p1)?;
            if k == 0 {
                return Err(Error::InvalidParameters {
                    name: name.into(),
                    reason: "k must be at least 1".into(),
                });
            }
            CurveModel::zpow(k)
        }
        "constant" => {
            let n = int_param(name, p1)?;
            let m = int_param(name, p2)?;
            CurveModel::constant(n, DVector::zeros(m))
        }
        "stretch" => CurveModel::Affine(AffineMap {
            linear: DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]),
            offset: DVector::zeros(2),
        }),
        _ => {
            return catalog_curves()
                .into_iter()
                .find(|c| c.name == spec.trim())
                .map(|c| c.model)
                .ok_or_else(|| Error::UnknownName(spec.to_string()))
        }
    };
    let fixed_arity = match name {
        "identity" | "zpow" => p2.is_none(),
        "constant" => true,
        _ => p1.is_none(),
    };
    if !fixed_arity {
        return Err(Error::InvalidParameters {
            name: name.to_string(),
            reason: "too many parameters".into(),
        });
    }
    Ok(model)
}

/// The paired calibration of a catalog curve, if it has one.
pub fn paired_calibration(name: &str) -> Option<Calibration> {
    let name = name.trim();
    if let Some(n) = name.strip_prefix("identity:").and_then(|n| n.parse().ok()) {
        return Some(Calibration::Volume { n });
    }
    if name.starts_with("zpow:") {
        return Some(Calibration::Volume { n: 2 });
    }
    catalog_curves()
        .into_iter()
        .find(|c| c.name == name)
        .map(|c| c.calibration)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{verify_curve, Region};

    #[test]
    fn catalog_curves_are_conformal() {
        for c in catalog_curves() {
            let form = c.calibration.form().unwrap();
            let n = c.model.domain_dim();
            let region = Region::ball(&DVector::from_element(n, 0.3), 1.5);
            let report = verify_curve(&c.model, &form, &region, 200, 1, 1e-9).unwrap();
            assert!(report.passed, "{}: {}", c.name, report.max_abs);
        }
    }

    #[test]
    fn affine_entries_are_isometries() {
        for c in catalog_curves().into_iter().filter(|c| c.affine) {
            let CurveModel::Affine(a) = &c.model else {
                panic!("{}", c.name)
            };
            assert!(a.isometry_defect() < 1e-15, "{}", c.name);
            assert!(c.lipschitz_one);
        }
    }

    #[test]
    fn names_resolve() {
        assert_eq!(named_curve("zsquare").unwrap(), CurveModel::zpow(2));
        assert_eq!(named_curve("zpow:3").unwrap(), CurveModel::zpow(3));
        assert_eq!(named_curve("identity:3").unwrap(), CurveModel::identity(3));
        assert_eq!(named_curve("constant:2:4").unwrap().target_dim(), 4);
        assert!(matches!(named_curve("spiral"), Err(Error::UnknownName(_))));
        assert!(named_curve("identity").is_err());
        assert!(named_curve("zsquare:2").is_err());
        assert_eq!(
            paired_calibration("identity:4"),
            Some(Calibration::Volume { n: 4 })
        );
        assert_eq!(
            paired_calibration("cayley-plane"),
            Some(Calibration::Cayley)
        );
    }
}
