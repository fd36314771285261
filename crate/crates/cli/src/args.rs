use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

pub const DEFAULT_MAX_STEPS: usize = 200;
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Parser, Serialize)]
#[command(name = "gencheb", version, about = "Generalized Chebyshev acceleration experiments")]
pub struct Cli {
    /// Directory for trace.csv, report.txt and generated files.
    #[arg(long, global = true, env = "GENCHEB_OUT_DIR", default_value = "gencheb-out")]
    pub out_dir: PathBuf,

    /// Worker threads for sparse matvecs (1 gives bit-reproducible traces).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// The built-in 4x4 non-normal example.
    Example33(Example33Args),
    /// A generated normal sparse system.
    NormalSparse(NormalSparseArgs),
    /// A user-supplied Matrix Market system.
    Custom(CustomArgs),
    /// Deltoid membership grid, boundary curve and eigenvalue quotients.
    DeltoidSample(DeltoidArgs),
    /// Spectrum report only.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedingArg {
    Polynomial,
    Basic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorMode {
    /// Run on the homogeneous system from `x - x0`; errors keep shrinking
    /// below rounding level.
    Propagated,
    /// Subtract iterates from the reference solution.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeArg {
    Basic,
    Classical,
    Generalized,
}

/// `auto` or a positive integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KChoice {
    Auto,
    Fixed(usize),
}

impl std::str::FromStr for KChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(KChoice::Auto);
        }
        match s.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(KChoice::Fixed(k)),
            _ => Err(format!("expected \"auto\" or a positive integer, got \"{s}\"")),
        }
    }
}

/// Parses `re`, `re,im` or `re im`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let toks: Vec<&str> = s.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).collect();
    let num = |t: &str| t.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or(format!("invalid number \"{t}\""));
    match toks.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected \"re\" or \"re,im\", got \"{s}\"")),
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunArgs {
    /// Number of iteration steps (upper bound when a tolerance is given).
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    pub steps: usize,

    /// Stop early once the relative residual drops below this value.
    #[arg(long)]
    pub residual_tol: Option<f64>,

    /// Power k of the transformed iteration, or `auto`.
    #[arg(long, default_value = "auto")]
    pub k: KChoice,

    /// Construction of the third starting vector of the generalized scheme.
    #[arg(long, value_enum, default_value_t = SeedingArg::Polynomial)]
    pub seeding: SeedingArg,

    #[arg(long, value_enum, default_value_t = ErrorMode::Propagated)]
    pub error_mode: ErrorMode,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Example33Args {
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpecArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Dimension of the dense unitary block.
    #[arg(long, default_value_t = 100)]
    pub block: usize,
    #[arg(long, default_value_t = 0.9)]
    pub lambda1: f64,
    /// Radius of the disc holding the remaining eigenvalues.
    #[arg(long, default_value_t = 0.6)]
    pub inner_radius: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NormalSparseArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectrumSourceArgs {
    /// Dominant eigenvalue as `re` or `re,im`.
    #[arg(long, value_parser = parse_complex, conflicts_with_all = ["estimate", "spectrum"])]
    #[serde(serialize_with = "ser_opt_complex")]
    pub lambda1: Option<Complex64>,

    /// Bound on the moduli of the other eigenvalues (with --lambda1).
    #[arg(long, requires = "lambda1")]
    pub radius: Option<f64>,

    /// Estimate the dominant eigenvalue by power iteration.
    #[arg(long, conflicts_with = "spectrum")]
    pub estimate: bool,

    /// File with the full spectrum, one `re im` per line.
    #[arg(long)]
    pub spectrum: Option<PathBuf>,

    #[arg(long, default_value_t = 5000)]
    pub estimate_iters: usize,

    #[arg(long, default_value_t = 1e-9)]
    pub estimate_tol: f64,

    /// Seed for the power iteration start vector.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

fn ser_opt_complex<S: serde::Serializer>(v: &Option<Complex64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(z) => s.serialize_some(&[z.re, z.im]),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CustomArgs {
    /// Iteration matrix M (Matrix Market).
    #[arg(long)]
    pub matrix: PathBuf,

    /// Right side g; without it g = (I - M) 1 and the all-ones vector is the
    /// reference solution.
    #[arg(long)]
    pub rhs: Option<PathBuf>,

    /// Companion matrix M~ with conjugated eigenvalues (Matrix Market).
    #[arg(long)]
    pub tilde: Option<PathBuf>,

    /// Right side g~ for M~; required with --rhs for the generalized scheme.
    #[arg(long)]
    pub tilde_rhs: Option<PathBuf>,

    /// Use M~ = M* even if M fails the normality check.
    #[arg(long)]
    pub assume_normal: bool,

    #[command(flatten)]
    pub source: SpectrumSourceArgs,

    /// Schemes to run; default basic and generalized, plus classical for a
    /// known real spectrum.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub schemes: Vec<SchemeArg>,

    /// Spectral bound for the classical scheme (default |lambda1|^k).
    #[arg(long)]
    pub rho: Option<f64>,

    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    pub steps: usize,

    #[arg(long, default_value_t = DEFAULT_RESIDUAL_TOL)]
    pub residual_tol: f64,

    #[arg(long, default_value = "auto")]
    pub k: KChoice,

    #[arg(long, value_enum, default_value_t = SeedingArg::Polynomial)]
    pub seeding: SeedingArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DeltoidArgs {
    /// Grid points per unit length on [-1.1, 1.1]^2.
    #[arg(long, default_value_t = 100)]
    pub resolution: usize,

    #[arg(long, default_value_t = 720)]
    pub boundary_samples: usize,

    /// Spectrum for the quotient plot; defaults to the 4x4 example.
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReportArgs {
    /// Matrix to analyse (exact spectrum for n <= 64, otherwise needs a
    /// spectrum source).
    #[arg(long)]
    pub matrix: Option<PathBuf>,

    #[command(flatten)]
    pub source: SpectrumSourceArgs,

    #[arg(long, default_value_t = gencheb::spectrum::DEFAULT_K_MAX)]
    pub k_max: usize,
}
