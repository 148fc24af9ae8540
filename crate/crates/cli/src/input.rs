use std::fmt;
use std::path::Path;

use nalgebra::DVector;
use omega_curves::calibration::Calibration;
use omega_curves::curve::catalog::{named_curve, paired_calibration};
use omega_curves::curve::CurveModel;
use omega_curves::exterior::AlternatingForm;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Library(omega_curves::Error),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Library(e) => write!(f, "{e}"),
        }
    }
}

impl From<omega_curves::Error> for CliError {
    fn from(e: omega_curves::Error) -> Self {
        CliError::Library(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// A catalog name or a path to a form file.
pub fn form(arg: &str) -> CliResult<AlternatingForm> {
    let path = Path::new(arg);
    if path.is_file() {
        return AlternatingForm::from_text(&read(path)?)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())));
    }
    let cal: Calibration = arg.parse()?;
    Ok(cal.form()?)
}

/// A catalog name or a path to a curve-spec file, with the paired
/// calibration when the curve is from the catalog.
pub fn curve(arg: &str) -> CliResult<(CurveModel, Option<Calibration>)> {
    let path = Path::new(arg);
    if path.is_file() {
        let model = CurveModel::from_spec(&read(path)?)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        return Ok((model, None));
    }
    Ok((named_curve(arg)?, paired_calibration(arg)))
}

/// The explicit form, else the curve's paired calibration.
pub fn form_for(
    curve_arg: &str,
    paired: Option<Calibration>,
    explicit: Option<&str>,
) -> CliResult<AlternatingForm> {
    match (explicit, paired) {
        (Some(f), _) => form(f),
        (None, Some(cal)) => Ok(cal.form()?),
        (None, None) => Err(CliError::Usage(format!(
            "--form is required for curve `{curve_arg}`"
        ))),
    }
}

pub fn center(arg: Option<&str>, dim: usize) -> CliResult<DVector<f64>> {
    let Some(arg) = arg else {
        return Ok(DVector::zeros(dim));
    };
    let values = arg
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Usage(format!("--center: `{t}` is not a finite number")))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    if values.len() != dim {
        return Err(CliError::Usage(format!(
            "--center has dimension {} but the curve's domain has dimension {dim}",
            values.len()
        )));
    }
    Ok(DVector::from_vec(values))
}

pub fn check_dims(model: &CurveModel, form: &AlternatingForm) -> CliResult<()> {
    if form.degree() != model.domain_dim() || form.ambient() != model.target_dim() {
        return Err(CliError::Usage(format!(
            "form has degree {} on R^{} but the curve maps R^{} -> R^{}",
            form.degree(),
            form.ambient(),
            model.domain_dim(),
            model.target_dim()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_parsing() {
        assert_eq!(center(None, 3).unwrap(), DVector::zeros(3));
        assert_eq!(
            center(Some("1, -2.5"), 2).unwrap(),
            DVector::from_vec(vec![1.0, -2.5])
        );
        assert!(center(Some("1,nan"), 2).is_err());
        let err = center(Some("1,2,3"), 2).unwrap_err().to_string();
        assert!(err.contains("dimension 3") && err.contains("dimension 2"));
    }

    #[test]
    fn paired_form_fallback() {
        let (model, paired) = curve("complex-line").unwrap();
        let form = form_for("complex-line", paired, None).unwrap();
        check_dims(&model, &form).unwrap();
        assert!(form_for("x", None, None).is_err());
    }
}
