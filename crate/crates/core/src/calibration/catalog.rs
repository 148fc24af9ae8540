//! Standard constant-coefficient calibrations.
//!
//! Sign conventions used here:
//!
//! - complex coordinates pair consecutive axes, `z_j = x_{2j-1} + i x_{2j}`;
//! - `symplectic(d) = sum_j dx_{2j-1} ^ dx_{2j}` on `R^{2d}`;
//! - `kahler_power(d, k) = omega^k / k!` for `omega = symplectic(d)`;
//! - `special_lagrangian(n, theta) = Re(e^{-i theta} dz_1 ^ ... ^ dz_n)`
//!   on `R^{2n}`;
//! - `associative = e123 + e145 + e167 + e246 - e257 - e347 - e356` on `R^7`;
//! - `cayley = dx_1 ^ phi' + *phi'` on `R^8`, where `phi'` is the
//!   associative form on axes `2..=8` and `*` the Hodge star of that `R^7`.
//!
//! Each of these has comass one; the acceptance tests re-derive that
//! numerically rather than trusting the transcription.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::AlternatingForm;

/// A named catalog calibration with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Calibration {
    Volume { n: usize },
    KahlerPower { d: usize, k: usize },
    SpecialLagrangian { n: usize, theta: f64 },
    Associative,
    Cayley,
    Symplectic { d: usize },
}

const ASSOCIATIVE_TERMS: [([usize; 3], f64); 7] = [
    ([1, 2, 3], 1.0),
    ([1, 4, 5], 1.0),
    ([1, 6, 7], 1.0),
    ([2, 4, 6], 1.0),
    ([2, 5, 7], -1.0),
    ([3, 4, 7], -1.0),
    ([3, 5, 6], -1.0),
];

fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameters {
        name: name.to_string(),
        reason: reason.into(),
    }
}

impl Calibration {
    /// Looks up a catalog entry by name and numeric parameters, e.g.
    /// `("kahler_power", &[3.0, 2.0])`.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        let int = |i: usize| -> Result<usize> {
            let v = *params
                .get(i)
                .ok_or_else(|| invalid(name, format!("missing parameter #{}", i + 1)))?;
            if v.fract() != 0.0 || v < 0.0 {
                return Err(invalid(name, format!("`{v}` is not a dimension")));
            }
            Ok(v as usize)
        };
        let expect = |count: usize| -> Result<()> {
            if params.len() == count {
                Ok(())
            } else {
                Err(invalid(
                    name,
                    format!("expects {count} parameters, got {}", params.len()),
                ))
            }
        };
        let cal = match name {
            "volume" | "vol" => {
                expect(1)?;
                Calibration::Volume { n: int(0)? }
            }
            "kahler_power" | "kahler" => {
                expect(2)?;
                Calibration::KahlerPower {
                    d: int(0)?,
                    k: int(1)?,
                }
            }
            "special_lagrangian" | "slag" => {
                if params.len() == 1 {
                    Calibration::SpecialLagrangian {
                        n: int(0)?,
                        theta: 0.0,
                    }
                } else {
                    expect(2)?;
                    Calibration::SpecialLagrangian {
                        n: int(0)?,
                        theta: params[1],
                    }
                }
            }
            "associative" => {
                expect(0)?;
                Calibration::Associative
            }
            "cayley" => {
                expect(0)?;
                Calibration::Cayley
            }
            "symplectic" | "sym" => {
                expect(1)?;
                Calibration::Symplectic { d: int(0)? }
            }
            other => return Err(Error::UnknownName(other.to_string())),
        };
        cal.validate()?;
        Ok(cal)
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Calibration::Volume { n: 0 } => Err(invalid("volume", "n must be at least 1")),
            Calibration::Symplectic { d: 0 } => Err(invalid("symplectic", "d must be at least 1")),
            Calibration::KahlerPower { d, k } if k == 0 || k > d => Err(invalid(
                "kahler_power",
                format!("need 1 <= k <= d, got d={d}, k={k}"),
            )),
            Calibration::SpecialLagrangian { n: 0, .. } => {
                Err(invalid("special_lagrangian", "n must be at least 1"))
            }
            Calibration::SpecialLagrangian { theta, .. } if !theta.is_finite() => {
                Err(invalid("special_lagrangian", "phase must be finite"))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Calibration::Volume { .. } => "volume",
            Calibration::KahlerPower { .. } => "kahler_power",
            Calibration::SpecialLagrangian { .. } => "special_lagrangian",
            Calibration::Associative => "associative",
            Calibration::Cayley => "cayley",
            Calibration::Symplectic { .. } => "symplectic",
        }
    }

    pub fn degree(&self) -> usize {
        match *self {
            Calibration::Volume { n } => n,
            Calibration::KahlerPower { k, .. } => 2 * k,
            Calibration::SpecialLagrangian { n, .. } => n,
            Calibration::Associative => 3,
            Calibration::Cayley => 4,
            Calibration::Symplectic { .. } => 2,
        }
    }

    pub fn ambient(&self) -> usize {
        match *self {
            Calibration::Volume { n } => n,
            Calibration::KahlerPower { d, .. } => 2 * d,
            Calibration::SpecialLagrangian { n, .. } => 2 * n,
            Calibration::Associative => 7,
            Calibration::Cayley => 8,
            Calibration::Symplectic { d } => 2 * d,
        }
    }

    pub fn form(&self) -> Result<AlternatingForm> {
        self.validate()?;
        match *self {
            Calibration::Volume { n } => Ok(AlternatingForm::volume(n)),
            Calibration::Symplectic { d } => kahler_power(d, 1),
            Calibration::KahlerPower { d, k } => kahler_power(d, k),
            Calibration::SpecialLagrangian { n, theta } => special_lagrangian(n, theta),
            Calibration::Associative => associative(7, 0),
            Calibration::Cayley => cayley(),
        }
    }
}

impl fmt::Display for Calibration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Calibration::Volume { n } => write!(f, "volume:{n}"),
            Calibration::KahlerPower { d, k } => write!(f, "kahler_power:{d}:{k}"),
            Calibration::SpecialLagrangian { n, theta } => {
                write!(f, "special_lagrangian:{n}:{theta}")
            }
            Calibration::Associative => write!(f, "associative"),
            Calibration::Cayley => write!(f, "cayley"),
            Calibration::Symplectic { d } => write!(f, "symplectic:{d}"),
        }
    }
}

/// Parses `name[:p1[:p2]]`, e.g. `symplectic:2` or `special_lagrangian:3:0.5`.
impl FromStr for Calibration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let name = parts.next().unwrap_or_default();
        let params = parts
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| invalid(name, format!("`{p}` is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        Calibration::from_name(name, &params)
    }
}

/// Builds a catalog form by name; see [`Calibration::from_name`].
pub fn catalog(name: &str, params: &[f64]) -> Result<AlternatingForm> {
    Calibration::from_name(name, params)?.form()
}

/// `omega^k / k!` for the standard symplectic form on `R^{2d}`: the sum of
/// all products of `k` distinct coordinate planes, each with coefficient 1.
fn kahler_power(d: usize, k: usize) -> Result<AlternatingForm> {
    let mut terms = Vec::new();
    crate::linalg::for_each_subset(d, k, |planes| {
        let axes: Vec<usize> = planes.iter().flat_map(|&j| [2 * j, 2 * j + 1]).collect();
        terms.push((axes, 1.0));
    });
    AlternatingForm::from_terms(2 * k, 2 * d, terms)
}

/// `Re(e^{-i theta} dz_1 ^ ... ^ dz_n)`. Choosing `dx_{2j}` (the `i` part)
/// in `s` of the `n` factors contributes `i^s`, and
/// `Re(i^s e^{-i theta}) = cos(s pi/2 - theta)`.
fn special_lagrangian(n: usize, theta: f64) -> Result<AlternatingForm> {
    let (c, s) = (theta.cos(), theta.sin());
    let mut terms = Vec::with_capacity(1 << n);
    for mask in 0u32..(1u32 << n) {
        let imaginary = mask.count_ones();
        let coefficient = match imaginary % 4 {
            0 => c,
            1 => s,
            2 => -c,
            _ => -s,
        };
        let axes = (0..n)
            .map(|j| {
                if mask & (1 << j) != 0 {
                    2 * j + 1
                } else {
                    2 * j
                }
            })
            .collect();
        terms.push((axes, coefficient));
    }
    AlternatingForm::from_terms(n, 2 * n, terms)
}

/// The associative 3-form on axes `offset..offset + 7` of `R^ambient`.
fn associative(ambient: usize, offset: usize) -> Result<AlternatingForm> {
    AlternatingForm::from_terms(
        3,
        ambient,
        ASSOCIATIVE_TERMS
            .iter()
            .map(|(axes, c)| (axes.iter().map(|a| a - 1 + offset).collect(), *c)),
    )
}

fn cayley() -> Result<AlternatingForm> {
    let phi7 = associative(7, 0)?;
    let psi7 = phi7.hodge_star();
    let shift = |form: &AlternatingForm| {
        AlternatingForm::from_terms(
            form.degree(),
            8,
            form.terms()
                .map(|(i, c)| (i.axes().iter().map(|a| a + 1).collect(), c)),
        )
    };
    let phi = shift(&phi7)?;
    let psi = shift(&psi7)?;
    AlternatingForm::dx(8, 0)?.wedge(&phi)?.add(&psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::MultiIndex;

    fn idx(axes: &[usize], m: usize) -> MultiIndex {
        MultiIndex::from_one_based(axes, m).unwrap()
    }

    #[test]
    fn volume_and_symplectic() {
        assert_eq!(
            catalog("volume", &[3.0]).unwrap(),
            AlternatingForm::volume(3)
        );
        let sym = catalog("symplectic", &[2.0]).unwrap();
        assert_eq!(sym.nnz(), 2);
        assert_eq!(sym.coefficient(&idx(&[1, 2], 4)), 1.0);
        assert_eq!(sym.coefficient(&idx(&[3, 4], 4)), 1.0);
    }

    #[test]
    fn special_lagrangian_two() {
        // Re((dx1 + i dx2) ^ (dx3 + i dx4)) = dx1^dx3 - dx2^dx4
        let sl = catalog("special_lagrangian", &[2.0, 0.0]).unwrap();
        assert_eq!(sl.nnz(), 2);
        assert_eq!(sl.coefficient(&idx(&[1, 3], 4)), 1.0);
        assert_eq!(sl.coefficient(&idx(&[2, 4], 4)), -1.0);
        // the phase pi/2 picks the imaginary part: dx1^dx4 + dx2^dx3
        let im = catalog("special_lagrangian", &[2.0, std::f64::consts::FRAC_PI_2]).unwrap();
        assert!((im.coefficient(&idx(&[1, 4], 4)) - 1.0).abs() < 1e-15);
        assert!((im.coefficient(&idx(&[2, 3], 4)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kahler_power_counts() {
        let k = catalog("kahler_power", &[3.0, 2.0]).unwrap();
        assert_eq!((k.degree(), k.ambient(), k.nnz()), (4, 6, 3));
        assert_eq!(k.coefficient(&idx(&[1, 2, 5, 6], 6)), 1.0);
        // omega^2 / 2! agrees with the wedge square
        let sym = catalog("symplectic", &[3.0]).unwrap();
        let sq = sym.wedge(&sym).unwrap().scaled(0.5);
        assert!(sq.approx_eq(&k, 1e-15));
    }

    #[test]
    fn cayley_is_self_dual() {
        let phi = catalog("cayley", &[]).unwrap();
        assert_eq!(phi.nnz(), 14);
        assert!(phi.hodge_star().approx_eq(&phi, 0.0));
        assert_eq!(phi.coefficient(&idx(&[1, 2, 3, 4], 8)), 1.0);
    }

    #[test]
    fn associative_has_seven_terms() {
        let phi = catalog("associative", &[]).unwrap();
        assert_eq!((phi.degree(), phi.ambient(), phi.nnz()), (3, 7, 7));
    }

    #[test]
    fn parse_names() {
        assert_eq!(
            "symplectic:2".parse::<Calibration>().unwrap(),
            Calibration::Symplectic { d: 2 }
        );
        assert_eq!(
            "volume:3".parse::<Calibration>().unwrap().form().unwrap(),
            AlternatingForm::volume(3)
        );
        let sl: Calibration = "special_lagrangian:3:0.25".parse().unwrap();
        assert_eq!(sl, Calibration::SpecialLagrangian { n: 3, theta: 0.25 });
        assert_eq!(sl.to_string().parse::<Calibration>().unwrap(), sl);
        assert!(matches!(
            "spinor:3".parse::<Calibration>(),
            Err(Error::UnknownName(_))
        ));
        assert!(matches!(
            "kahler:2:3".parse::<Calibration>(),
            Err(Error::InvalidParameters { .. })
        ));
        assert!(matches!(
            "volume:1.5".parse::<Calibration>(),
            Err(Error::InvalidParameters { .. })
        ));
        assert!(matches!(
            "associative:7".parse::<Calibration>(),
            Err(Error::InvalidParameters { .. })
        ));
    }
}
