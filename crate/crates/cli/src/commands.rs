use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use gencheb::cheb_kernel::{deltoid_boundary, deltoid_h, power_preimage_contains, DEFAULT_MEMBERSHIP_TOL};
use gencheb::genmat::{assemble_normal_system, example33_fixture, rhs_for, NormalMatrixSpec};
use gencheb::linalg::{read_matrix_market, write_matrix_market, ComplexSparseMatrix, ComplexVector};
use gencheb::solvers::{solve, ConvergenceTrace, IterationSystem, Scheme, Seeding, SolveError, Stopping};
use gencheb::spectrum::{
    build_report, estimate_dominant_eigenvalue, Classification, ReportOptions, SpectrumInfo, SpectrumReport,
    SpectrumSource,
};
use gencheb::textio::{format_complex_list, parse_complex_list, Metadata};
use num_complex::Complex64;
use serde::Serialize;

use crate::args::{
    Cli, Command, CustomArgs, DeltoidArgs, ErrorMode, Example33Args, KChoice, NormalSparseArgs, ReportArgs, RunArgs,
    SchemeArg, SeedingArg, SpectrumSourceArgs,
};
use crate::error::CliError;
use crate::output::{compose_report, ensure_dir, write_csv, write_text, write_traces, RunSummary, REPORT_FILE};

/// Relative commutator `||M M* - M* M||_F / ||M||_F^2` accepted as normal.
pub const NORMALITY_TOL: f64 = 1e-6;

/// Half-width of the square sampled by `deltoid-sample`.
pub const GRID_EXTENT: f64 = 1.1;

/// What a command produced, for callers that want more than the files.
#[derive(Debug, Default)]
pub struct Outcome {
    pub report: Option<SpectrumReport>,
    pub traces: Vec<ConvergenceTrace>,
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

impl Outcome {
    pub fn trace(&self, scheme: &str) -> Option<&ConvergenceTrace> {
        self.traces.iter().find(|t| t.scheme.as_str() == scheme)
    }

    fn warn(&mut self, msg: String) {
        eprintln!("gencheb: warning: {msg}");
        self.warnings.push(msg);
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let config = serde_json::to_string(cli).map_err(|e| CliError::Internal(e.to_string()))?;
    let out = cli.out_dir.as_path();
    match &cli.command {
        Command::Example33(a) => run_example33(out, a, &config),
        Command::NormalSparse(a) => run_normal_sparse(out, a, &config),
        Command::Custom(a) => run_custom(out, a, &config),
        Command::DeltoidSample(a) => run_deltoid_sample(out, a, &config),
        Command::Report(a) => run_report(out, a, &config),
    }
}

fn seeding(s: SeedingArg) -> Seeding {
    match s {
        SeedingArg::Polynomial => Seeding::Polynomial,
        SeedingArg::Basic => Seeding::Basic,
    }
}

fn choose_k(choice: KChoice, report: &SpectrumReport) -> Result<usize, CliError> {
    match choice {
        KChoice::Fixed(k) => Ok(k),
        KChoice::Auto => report.k.ok_or_else(|| {
            CliError::InvalidInput("k cannot be selected from the available spectrum information; pass --k".into())
        }),
    }
}

/// Runs one scheme from `x0 = 0`. Returns the trace and, when a tolerance
/// was given, whether it was met.
fn run_scheme(
    sys: &IterationSystem,
    x: Option<&ComplexVector>,
    scheme: Scheme,
    stopping: Stopping,
    mode: ErrorMode,
) -> Result<(ConvergenceTrace, Option<bool>), CliError> {
    let x0 = ComplexVector::zeros(sys.dim());
    let result = match (mode, x) {
        (ErrorMode::Propagated, Some(x)) => {
            let zero = ComplexVector::zeros(sys.dim());
            solve(&sys.homogeneous(), &x.sub(&x0), stopping, scheme, Some(&zero))
        }
        _ => solve(sys, &x0, stopping, scheme, x),
    };
    match result {
        Ok(sol) => Ok((sol.trace, stopping.residual_tol.map(|_| true))),
        Err(SolveError::NotConverged(best)) => Ok((best.trace, Some(false))),
        Err(e) => Err(e.into()),
    }
}

struct RunSet {
    traces: Vec<ConvergenceTrace>,
    summaries: Vec<String>,
    failed: Vec<String>,
}

fn run_schemes(
    sys: &IterationSystem,
    x: Option<&ComplexVector>,
    schemes: &[Scheme],
    stopping: Stopping,
    mode: ErrorMode,
) -> Result<RunSet, CliError> {
    let mut set = RunSet { traces: Vec::new(), summaries: Vec::new(), failed: Vec::new() };
    for &scheme in schemes {
        let (trace, converged) = run_scheme(sys, x, scheme, stopping, mode)?;
        if converged == Some(false) {
            set.failed.push(trace.scheme.to_string());
        }
        set.summaries.push(RunSummary::from_trace(&trace, converged).to_string());
        set.traces.push(trace);
    }
    Ok(set)
}

/// Writes trace.csv and report.txt, then turns unmet tolerances into an
/// error.
fn finish(
    out: &Path,
    config: &str,
    report: Option<SpectrumReport>,
    mut sections: Vec<String>,
    set: RunSet,
    mut outcome: Outcome,
) -> Result<Outcome, CliError> {
    outcome.files.push(write_traces(out, &set.traces)?);
    sections.extend(set.summaries);
    let path = out.join(REPORT_FILE);
    write_text(&path, &compose_report(config, &sections))?;
    outcome.files.push(path);
    outcome.report = report;
    outcome.traces = set.traces;
    if !set.failed.is_empty() {
        return Err(CliError::NotConverged(format!(
            "residual tolerance not reached by: {} (trace written to {})",
            set.failed.join(", "),
            out.display()
        )));
    }
    Ok(outcome)
}

fn stopping(run: &RunArgs) -> Stopping {
    Stopping { max_steps: run.steps, residual_tol: run.residual_tol }
}

pub fn run_example33(out: &Path, args: &Example33Args, config: &str) -> Result<Outcome, CliError> {
    ensure_dir(out)?;
    let ex = example33_fixture()?;
    let info = SpectrumInfo::from_eigenvalues(ex.eigenvalues.clone(), SpectrumSource::Exact)?;
    let report = build_report(&info, &ReportOptions::default());
    let k = choose_k(args.run.k, &report)?;
    let sys = ex.system.transform(k)?;
    let schemes = [Scheme::Basic, Scheme::Generalized { seeding: seeding(args.run.seeding) }];
    let set = run_schemes(&sys, Some(&ex.x), &schemes, stopping(&args.run), args.run.error_mode)?;
    let sections = vec![report.to_string(), format!("k_used: {k}")];
    finish(out, config, Some(report), sections, set, Outcome::default())
}

pub fn run_normal_sparse(out: &Path, args: &NormalSparseArgs, config: &str) -> Result<Outcome, CliError> {
    ensure_dir(out)?;
    let s = &args.spec;
    let spec = NormalMatrixSpec {
        n: s.n,
        block_size: s.block,
        lambda1: s.lambda1,
        inner_radius: s.inner_radius,
        seed: s.seed,
    };
    let gen = assemble_normal_system(&spec)?;
    let mut outcome = Outcome::default();

    let m = gen.system.matrix();
    let mtx = out.join("matrix.mtx");
    let file = File::create(&mtx).map_err(|e| CliError::io(&mtx, e))?;
    let comment = format!("normal test matrix: n={} seed={} lambda1={}", spec.n, spec.seed, spec.lambda1);
    write_matrix_market(std::io::BufWriter::new(file), m, &[&comment]).map_err(|e| CliError::matrix_market(&mtx, e))?;
    let mut meta = Metadata::new();
    meta.insert("n", spec.n)
        .insert("seed", spec.seed)
        .insert("lambda1", spec.lambda1)
        .insert("inner_radius", spec.inner_radius)
        .insert("block_size", spec.block_size)
        .insert("nnz", m.nnz());
    let meta_path = out.join("matrix.meta");
    write_text(&meta_path, &meta.to_string())?;
    let rhs_path = out.join("rhs.txt");
    write_text(&rhs_path, &format_complex_list(gen.system.g().as_slice()))?;
    let spec_path = out.join("spectrum.txt");
    write_text(&spec_path, &format_complex_list(&gen.diagonal))?;
    outcome.files.extend([mtx, meta_path, rhs_path, spec_path]);

    let info = SpectrumInfo::from_eigenvalues(gen.diagonal.clone(), SpectrumSource::Exact)?;
    let report = build_report(&info, &ReportOptions::default());
    let k = choose_k(args.run.k, &report)?;
    let sys = gen.system.transform(k)?;
    let schemes = [Scheme::Basic, Scheme::Generalized { seeding: seeding(args.run.seeding) }];
    let set = run_schemes(&sys, Some(&gen.x), &schemes, stopping(&args.run), args.run.error_mode)?;
    let sections = vec![report.to_string(), format!("k_used: {k}"), format!("nnz: {}", m.nnz())];
    finish(out, config, Some(report), sections, set, outcome)
}

fn read_matrix(path: &Path) -> Result<ComplexSparseMatrix, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let m = read_matrix_market(BufReader::new(file)).map_err(|e| CliError::matrix_market(path, e))?;
    if !m.is_square() {
        return Err(CliError::UnreadableInput {
            path: path.to_path_buf(),
            msg: format!("iteration matrix must be square, got {} x {}", m.n_rows(), m.n_cols()),
        });
    }
    Ok(m)
}

fn read_complex_list(path: &Path) -> Result<Vec<Complex64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_complex_list(&text).map_err(|e| CliError::text(path, e))
}

fn read_vector(path: &Path, n: usize) -> Result<ComplexVector, CliError> {
    let v = read_complex_list(path)?;
    if v.len() != n {
        return Err(CliError::UnreadableInput {
            path: path.to_path_buf(),
            msg: format!("expected {n} values, found {}", v.len()),
        });
    }
    Ok(ComplexVector::new(v)?)
}

/// Spectrum information from the flags, falling back to an exact dense
/// computation when a small matrix is available.
fn spectrum_info(src: &SpectrumSourceArgs, m: Option<&ComplexSparseMatrix>) -> Result<SpectrumInfo, CliError> {
    if let Some(path) = &src.spectrum {
        let values = read_complex_list(path)?;
        return Ok(SpectrumInfo::from_eigenvalues(values, SpectrumSource::UserSupplied)?);
    }
    if let Some(l) = src.lambda1 {
        return Ok(SpectrumInfo::dominant_only(l, src.radius, SpectrumSource::UserSupplied)?);
    }
    let m = m.ok_or_else(|| CliError::Usage("need --matrix, --spectrum or --lambda1".into()))?;
    if src.estimate {
        let (l, _) = estimate_dominant_eigenvalue(m, src.estimate_iters, src.estimate_tol, src.seed)?;
        return Ok(SpectrumInfo::dominant_only(l, None, SpectrumSource::Estimated)?);
    }
    if m.n_rows() > gencheb::linalg::dense::MAX_DENSE_EIG_DIM {
        return Err(CliError::Usage(format!(
            "matrix of dimension {} is too large for an exact spectrum; pass --spectrum, --lambda1 or --estimate",
            m.n_rows()
        )));
    }
    Ok(SpectrumInfo::exact_from_matrix(m)?)
}

fn relative_commutator(m: &ComplexSparseMatrix) -> Result<f64, CliError> {
    let scale = m.frobenius_norm().powi(2);
    Ok(if scale == 0.0 { 0.0 } else { m.normality_defect()? / scale })
}

fn is_real_spectrum(info: &SpectrumInfo) -> bool {
    info.complete && info.eigenvalues.iter().all(|l| l.im.abs() <= 1e-12 * l.norm().max(1e-300))
}

pub fn run_custom(out: &Path, args: &CustomArgs, config: &str) -> Result<Outcome, CliError> {
    ensure_dir(out)?;
    let mut outcome = Outcome::default();
    let m = read_matrix(&args.matrix)?;
    let n = m.n_rows();
    let (g, x) = match &args.rhs {
        Some(p) => (read_vector(p, n)?, None),
        None => {
            let x = ComplexVector::ones(n);
            (rhs_for(&m, &x)?, Some(x))
        }
    };

    let info = spectrum_info(&args.source, Some(&m))?;
    let mod_tol = info.default_mod_tol();
    let report = build_report(&info, &ReportOptions { mod_tol: Some(mod_tol), ..Default::default() });
    if report.classification == Classification::Inapplicable {
        let path = out.join(REPORT_FILE);
        write_text(&path, &compose_report(config, &[report.to_string()]))?;
        return Err(CliError::InapplicableSpectrum);
    }

    let wanted: Vec<SchemeArg> = if args.schemes.is_empty() {
        let mut v = vec![SchemeArg::Basic, SchemeArg::Generalized];
        if is_real_spectrum(&info) {
            v.push(SchemeArg::Classical);
        }
        v
    } else {
        args.schemes.clone()
    };
    let needs_tilde = wanted.contains(&SchemeArg::Generalized);

    let tilde = match &args.tilde {
        Some(p) => {
            let t = read_matrix(p)?;
            if t.n_rows() != n {
                return Err(CliError::InvalidInput(format!("M~ has dimension {}, M has {n}", t.n_rows())));
            }
            Some(t)
        }
        None if needs_tilde => {
            let defect = relative_commutator(&m)?;
            if defect <= NORMALITY_TOL {
                Some(m.conj_transpose())
            } else if args.assume_normal {
                outcome.warn(format!("M fails the normality check (relative commutator {defect:e}); using M~ = M*"));
                Some(m.conj_transpose())
            } else {
                return Err(CliError::InvalidInput(format!(
                    "M is not normal (relative commutator {defect:e}); the generalized scheme needs --tilde \
                     or --assume-normal"
                )));
            }
        }
        None => None,
    };

    let mut sys = IterationSystem::new(m, g)?.with_lambda1(info.lambda1);
    if let Some(t) = tilde {
        let gt = match (&args.tilde_rhs, &x) {
            (Some(p), _) => read_vector(p, n)?,
            (None, Some(x)) => rhs_for(&t, x)?,
            (None, None) => {
                return Err(CliError::Usage("--tilde-rhs is required with --rhs for the generalized scheme".into()))
            }
        };
        sys = sys.with_tilde(t, gt)?;
    }

    let k = choose_k(args.k, &report)?;
    let sys = sys.transform(k)?;
    let rho = args.rho.unwrap_or_else(|| info.lambda1.norm().powi(k as i32));
    let schemes: Vec<Scheme> = wanted
        .iter()
        .map(|s| match s {
            SchemeArg::Basic => Scheme::Basic,
            SchemeArg::Classical => Scheme::Classical { rho },
            SchemeArg::Generalized => Scheme::Generalized { seeding: seeding(args.seeding) },
        })
        .collect();
    let stopping = Stopping { max_steps: args.steps, residual_tol: Some(args.residual_tol) };
    let set = run_schemes(&sys, x.as_ref(), &schemes, stopping, ErrorMode::Direct)?;
    let sections = vec![report.to_string(), format!("k_used: {k}")];
    finish(out, config, Some(report), sections, set, outcome)
}

#[derive(Serialize)]
struct GridRow {
    re: f64,
    im: f64,
    in_k1: u8,
    in_k2: u8,
    in_k3: u8,
}

#[derive(Serialize)]
struct BoundaryRow {
    t: f64,
    re: f64,
    im: f64,
    h: f64,
}

#[derive(Serialize)]
struct QuotientRow {
    k: u32,
    re: f64,
    im: f64,
    inside: u8,
}

/// Grid coordinates `i / resolution` covering `[-GRID_EXTENT, GRID_EXTENT]`.
pub fn grid_coordinates(resolution: usize) -> Vec<f64> {
    let half = (GRID_EXTENT * resolution as f64).round() as i64;
    (-half..=half).map(|i| i as f64 / resolution as f64).collect()
}

pub fn run_deltoid_sample(out: &Path, args: &DeltoidArgs, config: &str) -> Result<Outcome, CliError> {
    if args.resolution == 0 {
        return Err(CliError::Usage("--resolution must be positive".into()));
    }
    ensure_dir(out)?;
    let mut outcome = Outcome::default();
    let tol = DEFAULT_MEMBERSHIP_TOL;
    let flag = |z: Complex64, k: u32| u8::from(power_preimage_contains(z, k, tol));

    let coords = grid_coordinates(args.resolution);
    let grid = coords.iter().flat_map(|&im| coords.iter().map(move |&re| Complex64::new(re, im)));
    let grid_path = out.join("deltoid_grid.csv");
    write_csv(
        &grid_path,
        &["re", "im", "in_k1", "in_k2", "in_k3"],
        grid.map(|z| GridRow { re: z.re, im: z.im, in_k1: flag(z, 1), in_k2: flag(z, 2), in_k3: flag(z, 3) }),
    )?;

    let samples = args.boundary_samples;
    let boundary = (0..samples).map(|i| {
        let t = std::f64::consts::TAU * i as f64 / samples as f64;
        let z = deltoid_boundary(t);
        BoundaryRow { t, re: z.re, im: z.im, h: deltoid_h(z) }
    });
    let boundary_path = out.join("deltoid_boundary.csv");
    write_csv(&boundary_path, &["t", "re", "im", "h"], boundary)?;

    let eigenvalues = match &args.spectrum {
        Some(p) => read_complex_list(p)?,
        None => example33_fixture()?.eigenvalues,
    };
    let info = SpectrumInfo::from_eigenvalues(eigenvalues, SpectrumSource::UserSupplied)?;
    let quotients: Vec<Complex64> = info.quotients().collect();
    let rows = (1..=3u32).flat_map(|k| {
        quotients.iter().map(move |q| {
            let z = q.powu(k);
            QuotientRow { k, re: z.re, im: z.im, inside: u8::from(power_preimage_contains(*q, k, tol)) }
        })
    });
    let quot_path = out.join("quotients.csv");
    write_csv(&quot_path, &["k", "re", "im", "inside"], rows)?;

    let report_path = out.join(REPORT_FILE);
    let summary = format!(
        "grid_points: {}\nboundary_samples: {samples}\nquotients: {}\nmembership_tol: {tol:e}",
        coords.len() * coords.len(),
        quotients.len()
    );
    write_text(&report_path, &compose_report(config, &[summary]))?;
    outcome.files.extend([grid_path, boundary_path, quot_path, report_path]);
    Ok(outcome)
}

pub fn run_report(out: &Path, args: &ReportArgs, config: &str) -> Result<Outcome, CliError> {
    ensure_dir(out)?;
    let m = args.matrix.as_deref().map(read_matrix).transpose()?;
    let info = spectrum_info(&args.source, m.as_ref())?;
    let report = build_report(&info, &ReportOptions { k_max: args.k_max, ..Default::default() });
    print!("{report}");
    let path = out.join(REPORT_FILE);
    write_text(&path, &compose_report(config, &[report.to_string()]))?;
    Ok(Outcome { report: Some(report), files: vec![path], ..Default::default() })
}
