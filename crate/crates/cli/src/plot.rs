use omega_curves::curve::ResidualReport;
use omega_curves::growth::EnergyProfile;
use plotters::prelude::*;

const SIZE: (u32, u32) = (720, 480);

/// `h(r)` on log-log axes with `3 se` error bars.
pub fn energy_svg(profile: &EnergyProfile) -> String {
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, SIZE).into_drawing_area();
        root.fill(&WHITE).expect("svg");
        let pts: Vec<(f64, f64, f64)> = profile
            .stats
            .iter()
            .map(|s| (s.radius, s.h.value, 3.0 * s.h.std_error))
            .collect();
        let (rmin, rmax) = (profile.radii[0], *profile.radii.last().expect("nonempty"));
        let lo = pts
            .iter()
            .map(|p| (p.1 - p.2).max(p.1 * 0.5))
            .fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p.1 + p.2).fold(0.0, f64::max);
        let (lo, hi) = if lo > 0.0 && hi > lo {
            (lo * 0.8, hi * 1.25)
        } else {
            (1e-3, hi.max(1.0) * 2.0)
        };
        let mut chart = ChartBuilder::on(&root)
            .caption("ball average h(r)", ("sans-serif", 20))
            .margin(12)
            .x_label_area_size(36)
            .y_label_area_size(64)
            .build_cartesian_2d((rmin * 0.8..rmax * 1.25).log_scale(), (lo..hi).log_scale())
            .expect("svg");
        chart
            .configure_mesh()
            .x_desc("r")
            .y_desc("h")
            .draw()
            .expect("svg");
        chart
            .draw_series(LineSeries::new(pts.iter().map(|p| (p.0, p.1)), &BLUE))
            .expect("svg");
        chart
            .draw_series(
                pts.iter()
                    .map(|p| Circle::new((p.0, p.1), 3, BLUE.filled())),
            )
            .expect("svg");
        chart
            .draw_series(pts.iter().filter(|p| p.2 > 0.0).map(|p| {
                PathElement::new(vec![(p.0, (p.1 - p.2).max(lo)), (p.0, p.1 + p.2)], BLUE)
            }))
            .expect("svg");
        root.present().expect("svg");
    }
    svg
}

/// Histogram of sampled residuals.
pub fn residual_histogram_svg(report: &ResidualReport) -> String {
    const BINS: usize = 30;
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, SIZE).into_drawing_area();
        root.fill(&WHITE).expect("svg");
        let min = report
            .residuals
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let max = report
            .residuals
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let (min, max) = if max > min {
            (min, max)
        } else {
            (min - 1e-12, min + 1e-12)
        };
        let width = (max - min) / BINS as f64;
        let mut counts = [0u32; BINS];
        for r in &report.residuals {
            let b = (((r - min) / width) as usize).min(BINS - 1);
            counts[b] += 1;
        }
        let top = counts.iter().copied().max().unwrap_or(1).max(1);
        let mut chart = ChartBuilder::on(&root)
            .caption("conformal residual", ("sans-serif", 20))
            .margin(12)
            .x_label_area_size(36)
            .y_label_area_size(48)
            .build_cartesian_2d(min..max, 0u32..top + top / 10 + 1)
            .expect("svg");
        chart
            .configure_mesh()
            .x_desc("residual")
            .y_desc("count")
            .x_label_formatter(&|v| format!("{v:.2e}"))
            .draw()
            .expect("svg");
        chart
            .draw_series(counts.iter().enumerate().map(|(i, &c)| {
                let x0 = min + width * i as f64;
                Rectangle::new([(x0, 0), (x0 + width, c)], BLUE.mix(0.6).filled())
            }))
            .expect("svg");
        root.present().expect("svg");
    }
    svg
}
