use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "omega-curves",
    version,
    about = "Comass, conformal residuals, energy growth and blow-downs of conformal curves",
    after_help = "Exit status: 0 pass, 2 verdict failure, 1 usage or parse error.\n\
                  Forms: catalog names (volume:3, symplectic:2, special_lagrangian:2:0, kahler_power:3:2, \
                  associative, cayley) or a path to a form file.\n\
                  Curves: catalog names (identity:3, zsquare, zcube, zpow:k, exp, moment, rotation, \
                  complex-line, slag-plane, associative-plane, cayley-plane, stretch, constant:n:m) \
                  or a path to a curve-spec file."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Estimate the comass of a form by multi-start ascent over orthonormal frames.
    ///
    /// CSV columns: estimate,certified_upper_bound,restarts,best_restart,converged,calibrated,seed
    Comass(ComassArgs),
    /// Sample the conformal residual ||DF||^n - *F^*omega over a ball.
    ///
    /// CSV columns: x1,...,xn,residual
    CheckCurve(CheckCurveArgs),
    /// Energy profile h(r) with sphere averages, h', isoperimetric gap,
    /// Caccioppoli ratio and modulus constant.
    ///
    /// CSV columns: r,h,h_stderr,sphere_n,sphere_stderr,sphere_n1,sphere_n1_stderr,
    /// h_prime,h_prime_stderr,iso_gap,iso_gap_stderr,caccioppoli,modulus
    Energy(EnergyArgs),
    /// Deviation of blow-down rescalings from linear isometries.
    ///
    /// CSV columns: scale,deviation,energy,energy_stderr
    Blowdown(BlowdownArgs),
    /// Properness radii s_r <= S_r for each radius of the grid.
    ///
    /// CSV columns: r,s_r,S_r,resolution (inf marks a search cap hit)
    Proper(ProperArgs),
    /// Classify energy growth as AffineBounded, SuperEuclidean or Inconclusive.
    ///
    /// CSV columns: r1,r2,doubling_ratio
    Classify(ClassifyArgs),
    /// Run every analysis into one bundle with SVG plots.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Master seed of every randomized quantity.
    #[arg(long, env = "OMEGA_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output file (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct ComassArgs {
    #[arg(long)]
    pub form: String,
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    /// Ascent tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct CheckCurveArgs {
    #[arg(long)]
    pub curve: String,
    /// Defaults to the curve's paired calibration for catalog curves.
    #[arg(long)]
    pub form: Option<String>,
    /// Comma-separated center of the sampling ball (default: origin).
    #[arg(long)]
    pub center: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Residual tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct EnergyArgs {
    #[arg(long)]
    pub curve: String,
    #[arg(long)]
    pub center: Option<String>,
    /// Geometric grid `start x factor x count`.
    #[arg(long, default_value = "1x2x5")]
    pub radii: String,
    #[arg(long, default_value_t = 200_000)]
    pub samples: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct BlowdownArgs {
    #[arg(long)]
    pub curve: String,
    /// Anchor point (default: origin).
    #[arg(long)]
    pub center: Option<String>,
    /// Scales, `start x factor x count`.
    #[arg(long, default_value = "1x4x3")]
    pub radii: String,
    /// Samples of the normalized energy per scale.
    #[arg(long, default_value_t = 20_000)]
    pub samples: usize,
    /// Tolerance of the normalized-energy hypothesis |h - 1|.
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ProperArgs {
    #[arg(long)]
    pub curve: String,
    #[arg(long)]
    pub center: Option<String>,
    #[arg(long, default_value = "1x2x5")]
    pub radii: String,
    /// Directions per sphere.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Search resolution (default 1e-6 max(r, 1)).
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub curve: String,
    /// Form used to verify the curve first (default: paired calibration).
    #[arg(long)]
    pub form: Option<String>,
    #[arg(long)]
    pub center: Option<String>,
    #[arg(long, default_value = "1x2x5")]
    pub radii: String,
    #[arg(long, default_value_t = 200_000)]
    pub samples: usize,
    /// Affinity tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(long)]
    pub curve: String,
    #[arg(long)]
    pub form: Option<String>,
    #[arg(long)]
    pub center: Option<String>,
    #[arg(long, default_value = "1x2x5")]
    pub radii: String,
    #[arg(long, default_value_t = 200_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    /// Master seed.
    #[arg(long, env = "OMEGA_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, default_value = "omega-report")]
    pub out: PathBuf,
}
