use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use super::{check_args, gap_from};
use crate::curve::CurveModel;
use crate::error::{Error, Result};
use crate::sampling::{antithetic_mean, derive_seed, Estimate, Measure};

/// Averages at one radius.
#[derive(Clone, Debug, Serialize)]
pub struct RadiusStats {
    pub radius: f64,
    /// Ball mean of `||DF||^n`.
    pub h: Estimate,
    /// Sphere mean of `||DF||^n`.
    pub sphere_n: Estimate,
    /// Sphere mean of `||DF||^(n-1)`.
    pub sphere_low: Estimate,
    pub h_prime: Estimate,
    /// `None` when `n = 1`.
    pub isoperimetric_gap: Option<Estimate>,
}

pub(crate) fn radius_stats(
    model: &CurveModel,
    x0: &DVector<f64>,
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<RadiusStats> {
    check_args(model, x0, r, samples)?;
    let n = model.domain_dim();
    let (ball_seed, sphere_seed) = (derive_seed(seed, 0), derive_seed(seed, 1));
    let h = antithetic_mean(x0, r, Measure::Ball, samples, ball_seed, |x| {
        model.energy_density(x, n as f64)
    });
    let sphere_n = antithetic_mean(x0, r, Measure::Sphere, samples, sphere_seed, |x| {
        model.energy_density(x, n as f64)
    });
    let sphere_low = antithetic_mean(x0, r, Measure::Sphere, samples, sphere_seed, |x| {
        model.energy_density(x, n as f64 - 1.0)
    });
    let k = n as f64 / r;
    let h_prime = Estimate {
        value: k * (sphere_n.value - h.value),
        std_error: k * sphere_n.std_error.hypot(h.std_error),
        samples: h.samples + sphere_n.samples,
    };
    Ok(RadiusStats {
        radius: r,
        isoperimetric_gap: (n >= 2).then(|| gap_from(&sphere_low, &h, n)),
        h,
        sphere_n,
        sphere_low,
        h_prime,
    })
}

/// `h(r)` and the sphere averages over a radii grid.
#[derive(Clone, Debug, Serialize)]
pub struct EnergyProfile {
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
    /// The domain dimension `n`, which is also the energy exponent.
    pub exponent: usize,
    pub stats: Vec<RadiusStats>,
    pub samples: usize,
    pub seed: u64,
}

impl EnergyProfile {
    pub fn h_values(&self) -> Vec<f64> {
        self.stats.iter().map(|s| s.h.value).collect()
    }

    pub fn h_std_errors(&self) -> Vec<f64> {
        self.stats.iter().map(|s| s.h.std_error).collect()
    }

    /// Spanned doublings, `log2(r_max / r_min)`.
    pub fn doublings(&self) -> f64 {
        match (self.radii.first(), self.radii.last()) {
            (Some(a), Some(b)) => (b / a).log2(),
            _ => 0.0,
        }
    }

    /// Smallest `h(r_j) - h(r_i) + 3 se` over all `i < j`; nonnegative when
    /// `h` is non-decreasing within three combined standard errors.
    pub fn monotonicity_margin(&self) -> f64 {
        let mut margin = f64::INFINITY;
        for (i, a) in self.stats.iter().enumerate() {
            for b in &self.stats[i + 1..] {
                let se = a.h.std_error.hypot(b.h.std_error);
                margin = margin.min(b.h.value - a.h.value + 3.0 * se);
            }
        }
        margin
    }

    pub const CSV_HEADER: &'static str =
        "r,h,h_stderr,sphere_n,sphere_stderr,sphere_n1,sphere_n1_stderr,h_prime,h_prime_stderr,iso_gap,iso_gap_stderr";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for s in &self.stats {
            let (g, ge) = s
                .isoperimetric_gap
                .map_or((f64::NAN, f64::NAN), |g| (g.value, g.std_error));
            let row = [
                s.radius,
                s.h.value,
                s.h.std_error,
                s.sphere_n.value,
                s.sphere_n.std_error,
                s.sphere_low.value,
                s.sphere_low.std_error,
                s.h_prime.value,
                s.h_prime.std_error,
                g,
                ge,
            ];
            let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// `count` radii `start, start * factor, ...`.
pub fn geometric_radii(start: f64, factor: f64, count: usize) -> Result<Vec<f64>> {
    if !(start.is_finite() && start > 0.0 && factor.is_finite() && factor > 1.0 && count >= 1) {
        return Err(Error::InvalidArgument(format!(
            "radii grid needs start > 0, factor > 1 and count >= 1 (got {start}, {factor}, {count})"
        )));
    }
    Ok((0..count).map(|i| start * factor.powi(i as i32)).collect())
}

/// Parses `start x factor x count`, e.g. `1x2x5`.
pub fn parse_radii_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split('x').map(str::trim).collect();
    let bad = || {
        Error::InvalidArgument(format!(
            "radii grid `{spec}` is not `start x factor x count`"
        ))
    };
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].parse().map_err(|_| bad())?;
    let factor: f64 = parts[1].parse().map_err(|_| bad())?;
    let count: usize = parts[2].parse().map_err(|_| bad())?;
    geometric_radii(start, factor, count)
}

/// Averages at every radius; radius `i` uses the sub-seed
/// `derive_seed(seed, i)`.
pub fn energy_profile(
    model: &CurveModel,
    x0: &DVector<f64>,
    radii: &[f64],
    samples: usize,
    seed: u64,
) -> Result<EnergyProfile> {
    if radii.is_empty() {
        return Err(Error::InvalidArgument("empty radii grid".into()));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) || radii[0] <= 0.0 {
        return Err(Error::InvalidArgument(
            "radii must be positive and strictly increasing".into(),
        ));
    }
    let stats = radii
        .par_iter()
        .enumerate()
        .map(|(i, &r)| radius_stats(model, x0, r, samples, derive_seed(seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(EnergyProfile {
        center: x0.iter().copied().collect(),
        radii: radii.to_vec(),
        exponent: model.domain_dim(),
        stats,
        samples,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radii_grids() {
        assert_eq!(
            parse_radii_grid("1x2x5").unwrap(),
            vec![1.0, 2.0, 4.0, 8.0, 16.0]
        );
        assert_eq!(parse_radii_grid("0.5 x 3 x 2").unwrap(), vec![0.5, 1.5]);
        for bad in ["1x2", "1x1x3", "0x2x3", "1x2x0", "axbxc"] {
            assert!(parse_radii_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn zsquare_profile() {
        let radii = geometric_radii(0.5, 2.0, 4).unwrap();
        let p =
            energy_profile(&CurveModel::zpow(2), &DVector::zeros(2), &radii, 20_000, 9).unwrap();
        assert!(p.monotonicity_margin() >= 0.0);
        assert_eq!(p.doublings(), 3.0);
        for s in &p.stats {
            assert!(s.h.within(2.0 * s.radius * s.radius, 4.0), "{s:?}");
        }
        let csv = p.to_csv();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with(EnergyProfile::CSV_HEADER));
    }

    #[test]
    fn rejects_unsorted_radii() {
        let model = CurveModel::identity(2);
        assert!(energy_profile(&model, &DVector::zeros(2), &[2.0, 1.0], 2000, 0).is_err());
        assert!(energy_profile(&model, &DVector::zeros(2), &[], 2000, 0).is_err());
    }
}
