//! Calibrations and the numerical comass.
//!
//! The comass of a constant-coefficient form is the maximum of
//! `omega(v_1 ^ ... ^ v_n)` over orthonormal frames. It is estimated by
//! multi-start projected-gradient ascent on the Stiefel manifold: each
//! restart orthonormalizes a Gaussian matrix, steps along the tangent
//! projection of the Euclidean gradient, and retracts by re-orthonormalizing.
//! A backtracking line search only accepts strict increases.

mod catalog;

pub use catalog::{catalog, Calibration};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{AlternatingForm, Frame};
use crate::linalg;
use crate::sampling;

pub const DEFAULT_RESTARTS: usize = 64;
pub const DEFAULT_ASCENT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

const ARMIJO: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComassOptions {
    pub restarts: usize,
    /// Stop once the proposed frame movement falls below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for ComassOptions {
    fn default() -> Self {
        ComassOptions {
            restarts: DEFAULT_RESTARTS,
            tolerance: DEFAULT_ASCENT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            seed: 0,
        }
    }
}

impl ComassOptions {
    pub fn with_seed(seed: u64) -> Self {
        ComassOptions {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComassReport {
    /// Best value found; a lower bound on the comass.
    pub estimate: f64,
    pub best_frame: Frame,
    pub restarts_used: usize,
    pub best_restart: usize,
    pub ascent_tolerance: f64,
    /// Sum of absolute coefficients, an upper bound on the comass.
    pub certified_upper_bound: f64,
    /// Whether the best restart stopped before the iteration cap.
    pub converged: bool,
    /// Restarts that hit the iteration cap.
    pub unconverged_restarts: usize,
    pub seed: u64,
}

/// One run of projected-gradient ascent.
#[derive(Clone, Debug)]
pub struct Ascent {
    pub frame: Frame,
    pub value: f64,
    /// Objective after each accepted step, starting with the initial value.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Euclidean gradient of `V -> omega(V)` in the ambient `m x n` matrix
/// space, assembled from cofactors of the row minors.
pub fn frame_gradient(form: &AlternatingForm, frame: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = (frame.nrows(), frame.ncols());
    let mut grad = DMatrix::zeros(m, n);
    for (index, c) in form.terms() {
        let rows = index.axes();
        let cof = linalg::row_minor_cofactors(frame, rows);
        for (a, &r) in rows.iter().enumerate() {
            for b in 0..n {
                grad[(r, b)] += c * cof[(a, b)];
            }
        }
    }
    grad
}

fn value(form: &AlternatingForm, frame: &DMatrix<f64>) -> f64 {
    form.terms()
        .map(|(i, c)| c * linalg::row_minor(frame, i.axes()))
        .sum()
}

fn check_comass_input(form: &AlternatingForm) -> Result<()> {
    if form.is_zero() {
        return Err(Error::ZeroForm);
    }
    if form.degree() == 0 {
        return Err(Error::InvalidArgument(
            "comass needs a form of positive degree".into(),
        ));
    }
    Ok(())
}

/// Projected-gradient ascent from `start` (orthonormalized first).
pub fn ascend(
    form: &AlternatingForm,
    start: &Frame,
    tolerance: f64,
    max_iterations: usize,
) -> Result<Ascent> {
    check_comass_input(form)?;
    if start.dim() != form.ambient() || start.len() != form.degree() {
        return Err(Error::ShapeMismatch {
            expected_rows: form.ambient(),
            expected_cols: form.degree(),
            rows: start.dim(),
            cols: start.len(),
        });
    }
    let mut v = linalg::orthonormalize(start.as_matrix())
        .ok_or_else(|| Error::InvalidArgument("start frame is rank deficient".into()))?;
    let mut f = value(form, &v);
    let mut trace = vec![f];
    let mut step = 1.0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iterations {
        iterations += 1;
        let g = frame_gradient(form, &v);
        let vtg = v.transpose() * &g;
        let sym = (&vtg + vtg.transpose()) * 0.5;
        let direction = &g - &v * sym;
        let gnorm2 = direction.norm_squared();
        let gnorm = gnorm2.sqrt();
        if gnorm < tolerance {
            converged = true;
            break;
        }

        let mut t = step;
        let accepted = loop {
            if t * gnorm < tolerance {
                break None;
            }
            let trial = &v + &direction * t;
            if let Some(w) = linalg::orthonormalize(&trial) {
                let fw = value(form, &w);
                if fw > f && fw >= f + ARMIJO * t * gnorm2 {
                    break Some((w, fw));
                }
            }
            t *= 0.5;
        };
        match accepted {
            None => {
                converged = true;
                break;
            }
            Some((w, fw)) => {
                let movement = (&w - &v).norm();
                v = w;
                f = fw;
                trace.push(f);
                step = (2.0 * t).min(1e6);
                if movement < tolerance {
                    converged = true;
                    break;
                }
            }
        }
    }

    let frame = Frame::new(v)?;
    let value = form.evaluate(&frame)?;
    Ok(Ascent {
        frame,
        value,
        trace,
        iterations,
        converged,
    })
}

/// A random orthonormal start for restart `restart`, sign-flipped so the
/// form is nonnegative on it.
pub fn random_start(form: &AlternatingForm, seed: u64, restart: usize) -> Frame {
    let mut rng = sampling::stream_rng(seed, restart as u64);
    let (m, n) = (form.ambient(), form.degree());
    loop {
        let g = sampling::gaussian_matrix(&mut rng, m, n);
        if let Some(mut q) = linalg::orthonormalize(&g) {
            if value(form, &q) < 0.0 {
                q.column_mut(0).neg_mut();
            }
            return Frame::new(q).expect("orthonormal columns are finite");
        }
    }
}

/// Multi-start estimate of the comass of `form`. Restart `k` always uses
/// stream `k` of the seed, so more restarts never lower the estimate and
/// the result does not depend on scheduling.
pub fn comass(form: &AlternatingForm, options: &ComassOptions) -> Result<ComassReport> {
    check_comass_input(form)?;
    if options.restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let runs: Vec<Ascent> = (0..options.restarts)
        .into_par_iter()
        .map(|k| {
            let start = random_start(form, options.seed, k);
            ascend(form, &start, options.tolerance, options.max_iterations)
        })
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (k, run) in runs.iter().enumerate() {
        if run.value > runs[best].value {
            best = k;
        }
    }
    let unconverged = runs.iter().filter(|r| !r.converged).count();
    let winner = &runs[best];
    Ok(ComassReport {
        estimate: winner.value,
        best_frame: winner.frame.clone(),
        restarts_used: options.restarts,
        best_restart: best,
        ascent_tolerance: options.tolerance,
        certified_upper_bound: form.l1_norm(),
        converged: winner.converged,
        unconverged_restarts: unconverged,
        seed: options.seed,
    })
}

/// Rescales `form` to unit comass using an existing estimate.
pub fn normalize(form: &AlternatingForm, report: &ComassReport) -> Result<AlternatingForm> {
    let floor = f64::EPSILON * form.l1_norm().max(f64::MIN_POSITIVE);
    if !(report.estimate > floor) {
        return Err(Error::VanishingComass(report.estimate));
    }
    Ok(form.scaled(1.0 / report.estimate))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CalibrationVerdict {
    pub calibrated: bool,
    pub estimate: f64,
}

/// Whether the comass estimate is at most `1 + tol`. Constant-coefficient
/// forms are closed, so this is the whole calibration condition. The zero
/// form is trivially a calibration.
pub fn is_calibration(
    form: &AlternatingForm,
    tol: f64,
    options: &ComassOptions,
) -> CalibrationVerdict {
    match comass(form, options) {
        Ok(report) => CalibrationVerdict {
            calibrated: report.estimate <= 1.0 + tol,
            estimate: report.estimate,
        },
        Err(_) => CalibrationVerdict {
            calibrated: form.as_scalar().is_none_or(|c| c.abs() <= 1.0 + tol),
            estimate: form.as_scalar().map_or(0.0, f64::abs),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(seed: u64) -> ComassOptions {
        ComassOptions {
            restarts: 8,
            seed,
            ..ComassOptions::default()
        }
    }

    #[test]
    fn volume_forms_have_unit_comass() {
        for n in 2..=4 {
            let r = comass(&AlternatingForm::volume(n), &quick(1)).unwrap();
            assert!((r.estimate - 1.0).abs() < 1e-12, "n={n}: {}", r.estimate);
            assert!(r.best_frame.is_orthonormal(1e-10));
        }
    }

    #[test]
    fn report_invariants() {
        let form = catalog("symplectic", &[2.0]).unwrap();
        let r = comass(&form, &quick(3)).unwrap();
        assert!(r.estimate <= r.certified_upper_bound + r.ascent_tolerance);
        assert!((form.evaluate(&r.best_frame).unwrap() - r.estimate).abs() <= 1e-12);
        assert!(r.best_frame.is_orthonormal(1e-10));
        assert!(r.converged);
    }

    #[test]
    fn zero_form_is_rejected() {
        let z = AlternatingForm::zero(2, 4);
        assert_eq!(comass(&z, &quick(0)).unwrap_err(), Error::ZeroForm);
        let opts = ComassOptions {
            restarts: 0,
            ..quick(0)
        };
        assert!(comass(&AlternatingForm::volume(2), &opts).is_err());
        assert!(is_calibration(&z, 1e-9, &quick(0)).calibrated);
    }

    #[test]
    fn normalize_examples() {
        let vol = AlternatingForm::volume(3);
        let r = comass(&vol.scaled(2.0), &quick(2)).unwrap();
        assert!(normalize(&vol.scaled(2.0), &r)
            .unwrap()
            .approx_eq(&vol, 1e-12));

        let sym = catalog("symplectic", &[2.0]).unwrap();
        let r3 = comass(&sym.scaled(3.0), &quick(2)).unwrap();
        let back = normalize(&sym.scaled(3.0), &r3).unwrap();
        assert!(back.approx_eq(&sym, 1e-6));

        let mut bogus = r3.clone();
        bogus.estimate = 0.0;
        assert!(matches!(
            normalize(&sym, &bogus),
            Err(Error::VanishingComass(_))
        ));
    }

    #[test]
    fn is_calibration_examples() {
        let vol = AlternatingForm::volume(3);
        assert!(is_calibration(&vol, 1e-6, &quick(4)).calibrated);
        let v = is_calibration(&vol.scaled(2.0), 1e-6, &quick(4));
        assert!(!v.calibrated && (v.estimate - 2.0).abs() < 1e-9);
    }

    #[test]
    fn every_step_increases_the_objective() {
        let form = catalog("cayley", &[]).unwrap();
        for k in 0..4 {
            let start = random_start(&form, 9, k);
            let run = ascend(&form, &start, 1e-10, 10_000).unwrap();
            assert!(run.trace.windows(2).all(|w| w[1] > w[0]));
            assert!(run.converged);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let form = catalog("associative", &[]).unwrap();
        let v = random_start(&form, 5, 0).into_matrix();
        let g = frame_gradient(&form, &v);
        let h = 1e-6;
        for r in 0..7 {
            for c in 0..3 {
                let mut p = v.clone();
                p[(r, c)] += h;
                let mut q = v.clone();
                q[(r, c)] -= h;
                let fd = (value(&form, &p) - value(&form, &q)) / (2.0 * h);
                assert!((fd - g[(r, c)]).abs() < 1e-8);
            }
        }
    }
}
