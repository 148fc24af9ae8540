use nalgebra::DVector;
use omega_curves::blowdown::{
    blowdown, properness_radii, BlowdownOptions, BlowdownReport, PropernessRadii, ShellSearch,
};
use omega_curves::calibration::{comass, ComassOptions, ComassReport};
use omega_curves::curve::{verify_curve, CurveModel, Region, ResidualReport};
use omega_curves::growth::{
    caccioppoli_ratio, classify_growth, energy_profile, modulus_constant, parse_radii_grid,
    EnergyProfile, GrowthLabel, GrowthTolerances, GrowthVerdict,
};
use omega_curves::sampling::derive_seed;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::input::{self, CliError, CliResult};
use crate::plot;

/// Calibration threshold for the comass verdict.
const CALIBRATION_TOLERANCE: f64 = 1e-6;

pub struct Outcome {
    pub command: &'static str,
    pub payload: Value,
    pub csv: String,
    pub passed: bool,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn csv_row(cells: &[f64]) -> String {
    let cells: Vec<String> = cells
        .iter()
        .map(|v| {
            if v.is_infinite() {
                "inf".to_string()
            } else {
                format!("{v:?}")
            }
        })
        .collect();
    cells.join(",")
}

fn radii(spec: &str) -> CliResult<Vec<f64>> {
    parse_radii_grid(spec).map_err(|e| CliError::Usage(format!("--radii: {e}")))
}

// comass

fn comass_report(
    form_arg: &str,
    restarts: usize,
    tol: f64,
    seed: u64,
) -> CliResult<(ComassReport, bool)> {
    let form = input::form(form_arg)?;
    let opts = ComassOptions {
        restarts,
        tolerance: tol,
        seed,
        ..ComassOptions::default()
    };
    let report = comass(&form, &opts)?;
    let calibrated = report.estimate <= 1.0 + CALIBRATION_TOLERANCE;
    Ok((report, calibrated))
}

pub fn run_comass(a: &ComassArgs) -> CliResult<Outcome> {
    let (report, calibrated) = comass_report(&a.form, a.restarts, a.tol, a.common.seed)?;
    let csv = format!(
        "estimate,certified_upper_bound,restarts,best_restart,converged,calibrated,seed\n{:?},{:?},{},{},{},{},{}\n",
        report.estimate,
        report.certified_upper_bound,
        report.restarts_used,
        report.best_restart,
        report.converged,
        calibrated,
        report.seed
    );
    Ok(Outcome {
        command: "comass",
        payload: json!({
            "form": a.form,
            "calibrated": calibrated,
            "calibration_tolerance": CALIBRATION_TOLERANCE,
            "report": to_value(&report),
        }),
        csv,
        passed: calibrated,
    })
}

// check-curve

fn residuals(
    curve_arg: &str,
    form_arg: Option<&str>,
    center: Option<&str>,
    radius: f64,
    samples: usize,
    tol: f64,
    seed: u64,
) -> CliResult<ResidualReport> {
    let (model, paired) = input::curve(curve_arg)?;
    let form = input::form_for(curve_arg, paired, form_arg)?;
    input::check_dims(&model, &form)?;
    let c = input::center(center, model.domain_dim())?;
    Ok(verify_curve(
        &model,
        &form,
        &Region::ball(&c, radius),
        samples,
        seed,
        tol,
    )?)
}

pub fn run_check_curve(a: &CheckCurveArgs) -> CliResult<Outcome> {
    let report = residuals(
        &a.curve,
        a.form.as_deref(),
        a.center.as_deref(),
        a.radius,
        a.samples,
        a.tol,
        a.common.seed,
    )?;
    Ok(Outcome {
        command: "check-curve",
        csv: report.to_csv(),
        passed: report.passed,
        payload: json!({
            "curve": a.curve,
            "form": a.form,
            "radius": a.radius,
            "report": to_value(&report),
        }),
    })
}

// energy

#[derive(Serialize)]
struct EnergyExtras {
    radius: f64,
    caccioppoli: Option<f64>,
    modulus: f64,
}

fn energy_data(
    model: &CurveModel,
    c: &DVector<f64>,
    radii: &[f64],
    samples: usize,
    seed: u64,
) -> CliResult<(EnergyProfile, Vec<EnergyExtras>)> {
    let profile = energy_profile(model, c, radii, samples, derive_seed(seed, 0))?;
    let pairs = (samples / 10).max(1000);
    let extras = radii
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let s = derive_seed(derive_seed(seed, 1), i as u64);
            let caccioppoli = match caccioppoli_ratio(model, c, r, samples, s) {
                Ok(v) => Some(v),
                Err(omega_curves::Error::ConstantMap) => None,
                Err(e) => return Err(e.into()),
            };
            Ok(EnergyExtras {
                radius: r,
                caccioppoli,
                modulus: modulus_constant(model, c, r, pairs, derive_seed(s, 7))?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok((profile, extras))
}

fn energy_csv(profile: &EnergyProfile, extras: &[EnergyExtras]) -> String {
    let mut lines = profile
        .to_csv()
        .lines()
        .map(String::from)
        .collect::<Vec<_>>();
    lines[0].push_str(",caccioppoli,modulus");
    for (line, e) in lines[1..].iter_mut().zip(extras) {
        line.push(',');
        line.push_str(&csv_row(&[e.caccioppoli.unwrap_or(f64::NAN), e.modulus]));
    }
    lines.join("\n") + "\n"
}

fn energy_monotone(profile: &EnergyProfile) -> bool {
    profile.monotonicity_margin() >= 0.0
        && profile
            .stats
            .iter()
            .all(|s| s.h_prime.value >= -3.0 * s.h_prime.std_error)
}

pub fn run_energy(a: &EnergyArgs) -> CliResult<Outcome> {
    let (model, _) = input::curve(&a.curve)?;
    let c = input::center(a.center.as_deref(), model.domain_dim())?;
    let grid = radii(&a.radii)?;
    let (profile, extras) = energy_data(&model, &c, &grid, a.samples, a.common.seed)?;
    let passed = energy_monotone(&profile);
    Ok(Outcome {
        command: "energy",
        csv: energy_csv(&profile, &extras),
        passed,
        payload: json!({
            "curve": a.curve,
            "seed": a.common.seed,
            "samples": a.samples,
            "monotone": passed,
            "monotonicity_margin": profile.monotonicity_margin(),
            "profile": to_value(&profile),
            "extras": to_value(&extras),
        }),
    })
}

// blowdown

fn blowdown_report(
    model: &CurveModel,
    c: &DVector<f64>,
    scales: &[f64],
    samples: usize,
    tol: f64,
    seed: u64,
) -> CliResult<BlowdownReport> {
    let opts = BlowdownOptions {
        energy_samples: samples,
        energy_tolerance: tol,
        seed,
        ..BlowdownOptions::default()
    };
    Ok(blowdown(model, c, scales, &opts)?)
}

fn blowdown_passed(r: &BlowdownReport) -> bool {
    !r.energy_hypothesis || r.deviations_decrease
}

pub fn run_blowdown(a: &BlowdownArgs) -> CliResult<Outcome> {
    let (model, _) = input::curve(&a.curve)?;
    let c = input::center(a.center.as_deref(), model.domain_dim())?;
    let report = blowdown_report(
        &model,
        &c,
        &radii(&a.radii)?,
        a.samples,
        a.tol,
        a.common.seed,
    )?;
    let mut csv = String::from("scale,deviation,energy,energy_stderr\n");
    for s in &report.scales {
        csv.push_str(&csv_row(&[
            s.scale,
            s.deviation,
            s.energy.value,
            s.energy.std_error,
        ]));
        csv.push('\n');
    }
    Ok(Outcome {
        command: "blowdown",
        passed: blowdown_passed(&report),
        csv,
        payload: json!({ "curve": a.curve, "report": to_value(&report) }),
    })
}

// proper

fn proper_table(
    model: &CurveModel,
    c: &DVector<f64>,
    grid: &[f64],
    directions: usize,
    tol: Option<f64>,
    seed: u64,
) -> CliResult<Vec<PropernessRadii>> {
    grid.iter()
        .enumerate()
        .map(|(i, &r)| {
            let mut search = ShellSearch::for_radius(r);
            search.directions = directions;
            if let Some(t) = tol {
                search.resolution = t;
            }
            Ok(properness_radii(
                model,
                c,
                r,
                &search,
                derive_seed(seed, i as u64),
            )?)
        })
        .collect()
}

fn proper_passed(rows: &[PropernessRadii]) -> bool {
    rows.iter()
        .all(|p| p.outer.value().is_finite() && p.inner.value() <= p.outer.value() + p.resolution)
}

pub fn run_proper(a: &ProperArgs) -> CliResult<Outcome> {
    let (model, _) = input::curve(&a.curve)?;
    let c = input::center(a.center.as_deref(), model.domain_dim())?;
    let rows = proper_table(
        &model,
        &c,
        &radii(&a.radii)?,
        a.samples,
        a.tol,
        a.common.seed,
    )?;
    let mut csv = String::from("r,s_r,S_r,resolution\n");
    for p in &rows {
        csv.push_str(&csv_row(&[
            p.r,
            p.inner.value(),
            p.outer.value(),
            p.resolution,
        ]));
        csv.push('\n');
    }
    Ok(Outcome {
        command: "proper",
        passed: proper_passed(&rows),
        csv,
        payload: json!({ "curve": a.curve, "seed": a.common.seed, "radii": to_value(&rows) }),
    })
}

// classify

struct Classified {
    verdict: GrowthVerdict,
    verification: ResidualReport,
    profile: EnergyProfile,
}

#[allow(clippy::too_many_arguments)]
fn classify_data(
    curve_arg: &str,
    form_arg: Option<&str>,
    center: Option<&str>,
    grid: &[f64],
    samples: usize,
    tol: f64,
    seed: u64,
) -> CliResult<Classified> {
    let (model, paired) = input::curve(curve_arg)?;
    let form = input::form_for(curve_arg, paired, form_arg)?;
    input::check_dims(&model, &form)?;
    let c = input::center(center, model.domain_dim())?;
    let verification = verify_curve(
        &model,
        &form,
        &Region::ball(&c, grid[0]),
        1000,
        derive_seed(seed, 2),
        1e-9,
    )?;
    let profile = energy_profile(&model, &c, grid, samples, derive_seed(seed, 0))?;
    let tolerances = GrowthTolerances {
        affinity: tol,
        seed: derive_seed(seed, 1),
        ..GrowthTolerances::default()
    };
    let verdict = classify_growth(&profile, &model, &tolerances)?;
    Ok(Classified {
        verdict,
        verification,
        profile,
    })
}

fn classify_payload(curve: &str, c: &Classified, samples: usize, seed: u64) -> Value {
    json!({
        "curve": curve,
        "seed": seed,
        "samples": samples,
        "label": c.verdict.label.to_string(),
        "verified_curve": c.verification.passed,
        "verification_max_residual": c.verification.max_abs,
        "verdict": to_value(&c.verdict),
        "h_values": c.profile.h_values(),
        "h_std_errors": c.profile.h_std_errors(),
        "radii": c.profile.radii,
    })
}

pub fn run_classify(a: &ClassifyArgs) -> CliResult<Outcome> {
    let grid = radii(&a.radii)?;
    let c = classify_data(
        &a.curve,
        a.form.as_deref(),
        a.center.as_deref(),
        &grid,
        a.samples,
        a.tol,
        a.common.seed,
    )?;
    let mut csv = String::from("r1,r2,doubling_ratio\n");
    for d in &c.verdict.doubling_ratios {
        csv.push_str(&csv_row(&[d.r1, d.r2, d.ratio]));
        csv.push('\n');
    }
    Ok(Outcome {
        command: "classify",
        passed: c.verdict.label != GrowthLabel::Inconclusive,
        payload: classify_payload(&a.curve, &c, a.samples, a.common.seed),
        csv,
    })
}

// report

pub struct ReportFiles {
    pub outcome: Outcome,
    pub files: Vec<(&'static str, String)>,
}

pub fn run_report(a: &ReportArgs) -> CliResult<ReportFiles> {
    let seed = a.seed;
    let grid = radii(&a.radii)?;
    let (model, paired) = input::curve(&a.curve)?;
    let form = input::form_for(&a.curve, paired, a.form.as_deref())?;
    input::check_dims(&model, &form)?;
    let c = input::center(a.center.as_deref(), model.domain_dim())?;

    let form_text = form.to_text();
    let cmass = comass(
        &form,
        &ComassOptions {
            restarts: a.restarts,
            seed: derive_seed(seed, 10),
            ..ComassOptions::default()
        },
    )?;
    let calibrated = cmass.estimate <= 1.0 + CALIBRATION_TOLERANCE;
    let residual = verify_curve(
        &model,
        &form,
        &Region::ball(&c, grid[0]),
        1000,
        derive_seed(seed, 11),
        1e-9,
    )?;
    let (profile, extras) = energy_data(&model, &c, &grid, a.samples, derive_seed(seed, 12))?;
    let bd = blowdown_report(
        &model,
        &c,
        &grid,
        20_000.min(a.samples.max(1000)),
        0.05,
        derive_seed(seed, 13),
    )?;
    let proper = proper_table(&model, &c, &grid, 10_000, None, derive_seed(seed, 14))?;
    let classified = classify_data(
        &a.curve,
        a.form.as_deref(),
        a.center.as_deref(),
        &grid,
        a.samples,
        1e-8,
        derive_seed(seed, 15),
    )?;

    let passed = calibrated
        && residual.passed
        && energy_monotone(&profile)
        && blowdown_passed(&bd)
        && classified.verdict.label != GrowthLabel::Inconclusive;
    let payload = json!({
        "curve": a.curve,
        "form": form_text,
        "seed": seed,
        "samples": a.samples,
        "comass": { "calibrated": calibrated, "report": to_value(&cmass) },
        "check_curve": {
            "passed": residual.passed,
            "max_abs": residual.max_abs,
            "min": residual.min,
            "samples": residual.samples,
            "seed": residual.seed,
        },
        "energy": { "profile": to_value(&profile), "extras": to_value(&extras) },
        "blowdown": to_value(&bd),
        "proper": to_value(&proper),
        "classify": classify_payload(&a.curve, &classified, a.samples, seed),
    });
    let files = vec![
        ("energy.csv", energy_csv(&profile, &extras)),
        ("residuals.csv", residual.to_csv()),
        ("h_profile.svg", plot::energy_svg(&profile)),
        ("residuals.svg", plot::residual_histogram_svg(&residual)),
    ];
    Ok(ReportFiles {
        outcome: Outcome {
            command: "report",
            payload,
            csv: String::new(),
            passed,
        },
        files,
    })
}
