//! Applicability classification, choice of the power `k`, and predicted
//! convergence rates from (possibly partial) spectral data.

use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::cheb_kernel::{characteristic_roots, power_preimage_contains, DEFAULT_MEMBERSHIP_TOL};
use crate::linalg::dense::{dense_eigenvalues, MAX_DENSE_EIG_DIM};
use crate::linalg::{ComplexSparseMatrix, ComplexVector, LinalgError};

pub const EXACT_MOD_TOL: f64 = 1e-8;
pub const ESTIMATED_MOD_TOL: f64 = 1e-3;
pub const DEFAULT_ROU_MAX_ORDER: usize = 64;
pub const DEFAULT_K_MAX: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("empty eigenvalue list")]
    Empty,
    #[error("dominant eigenvalue must satisfy 0 < |lambda1| < 1, got {0}")]
    InvalidLambda1(Complex64),
    #[error("eigenvalue {0} exceeds the dominant modulus")]
    ExceedsDominant(Complex64),
    #[error("argument {0} outside (0, 1)")]
    Domain(f64),
    #[error("spectrum has more than one dominant eigenvalue")]
    NotUniqueDominant,
    #[error("power iteration stalled at {estimate} with residual {residual:e}")]
    NoConvergence { estimate: Complex64, residual: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumSource {
    Exact,
    Estimated,
    UserSupplied,
}

impl SpectrumSource {
    /// Relative modulus gap below which eigenvalues count as dominant.
    pub fn default_mod_tol(self) -> f64 {
        match self {
            SpectrumSource::Exact => EXACT_MOD_TOL,
            SpectrumSource::Estimated | SpectrumSource::UserSupplied => ESTIMATED_MOD_TOL,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SpectrumSource::Exact => "exact",
            SpectrumSource::Estimated => "estimated",
            SpectrumSource::UserSupplied => "user_supplied",
        }
    }
}

/// Known eigenvalues of `M`. `lambda1` has the largest modulus and is always
/// listed. `other_radius` optionally bounds the moduli of eigenvalues that are
/// not listed, which lets [`select_k_bound`] work from a dominant eigenvalue
/// and a radius alone.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumInfo {
    pub eigenvalues: Vec<Complex64>,
    pub lambda1: Complex64,
    pub source: SpectrumSource,
    pub complete: bool,
    pub other_radius: Option<f64>,
}

fn check_lambda1(l: Complex64) -> Result<(), SpectrumError> {
    let r = l.norm();
    if !(r > 0.0 && r < 1.0) || !l.is_finite() {
        return Err(SpectrumError::InvalidLambda1(l));
    }
    Ok(())
}

impl SpectrumInfo {
    /// Full spectrum. Among eigenvalues of (numerically) equal largest
    /// modulus the one with the largest real part becomes `lambda1`.
    pub fn from_eigenvalues(eigenvalues: Vec<Complex64>, source: SpectrumSource) -> Result<Self, SpectrumError> {
        let rmax = eigenvalues.iter().map(|l| l.norm()).fold(f64::NAN, f64::max);
        if eigenvalues.is_empty() {
            return Err(SpectrumError::Empty);
        }
        let lambda1 = eigenvalues
            .iter()
            .copied()
            .filter(|l| l.norm() >= rmax * (1.0 - 1e-12))
            .max_by(|a, b| a.re.total_cmp(&b.re))
            .expect("nonempty");
        check_lambda1(lambda1)?;
        Ok(Self { eigenvalues, lambda1, source, complete: true, other_radius: None })
    }

    /// Only the dominant eigenvalue, optionally with a bound on the rest.
    pub fn dominant_only(
        lambda1: Complex64,
        other_radius: Option<f64>,
        source: SpectrumSource,
    ) -> Result<Self, SpectrumError> {
        check_lambda1(lambda1)?;
        if let Some(r) = other_radius {
            if !(r >= 0.0 && r <= lambda1.norm()) {
                return Err(SpectrumError::Domain(r));
            }
        }
        Ok(Self { eigenvalues: vec![lambda1], lambda1, source, complete: false, other_radius })
    }

    /// Exact spectrum of a small matrix by dense Schur decomposition.
    pub fn exact_from_matrix(m: &ComplexSparseMatrix) -> Result<Self, SpectrumError> {
        if m.n_rows() > MAX_DENSE_EIG_DIM {
            return Err(LinalgError::TooLarge { n: m.n_rows(), max: MAX_DENSE_EIG_DIM }.into());
        }
        Self::from_eigenvalues(dense_eigenvalues(&m.to_dense())?, SpectrumSource::Exact)
    }

    pub fn default_mod_tol(&self) -> f64 {
        self.source.default_mod_tol()
    }

    /// Quotients `lambda / lambda1` of every listed eigenvalue.
    pub fn quotients(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.eigenvalues.iter().map(move |l| l / self.lambda1)
    }

    fn is_dominant(&self, l: Complex64, mod_tol: f64) -> bool {
        l.norm() >= (1.0 - mod_tol) * self.lambda1.norm()
    }

    /// Largest `|lambda / lambda1|` over non-dominant eigenvalues, including
    /// the unlisted bound; `None` when nothing non-dominant is known.
    pub fn subdominant_ratio(&self, mod_tol: f64) -> Option<f64> {
        let r1 = self.lambda1.norm();
        let listed = self.eigenvalues.iter().filter(|l| !self.is_dominant(**l, mod_tol)).map(|l| l.norm() / r1);
        listed.chain(self.other_radius.map(|r| r / r1)).reduce(f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    UniqueDominant,
    /// Dominant eigenvalues are `lambda1` times roots of unity generating a
    /// cyclic group of order `k0`.
    RootOfUnityFamily {
        k0: usize,
    },
    Inapplicable,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::UniqueDominant => f.write_str("unique dominant eigenvalue"),
            Classification::RootOfUnityFamily { k0 } => write!(f, "root-of-unity family (k0 = {k0})"),
            Classification::Inapplicable => f.write_str("inapplicable"),
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn root_of_unity_order(zeta: Complex64, tol: f64, max_order: usize) -> Option<usize> {
    let unit = zeta / zeta.norm();
    let mut p = Complex64::new(1.0, 0.0);
    for n in 1..=max_order {
        p *= unit;
        if (p - 1.0).norm() <= tol {
            return Some(n);
        }
    }
    None
}

pub fn classify_dominant(info: &SpectrumInfo, mod_tol: f64, rou_max_order: usize) -> Classification {
    let dominant: Vec<Complex64> = info.eigenvalues.iter().copied().filter(|l| info.is_dominant(*l, mod_tol)).collect();
    // lambda1 itself may appear once or as a near-duplicate
    let others: Vec<Complex64> =
        dominant.iter().map(|l| l / info.lambda1).filter(|z| (z - 1.0).norm() > mod_tol).collect();
    if others.is_empty() {
        return Classification::UniqueDominant;
    }
    let mut k0 = 1;
    for z in others {
        match root_of_unity_order(z, mod_tol, rou_max_order) {
            Some(n) => k0 = k0 / gcd(k0, n) * n,
            None => return Classification::Inapplicable,
        }
    }
    Classification::RootOfUnityFamily { k0 }
}

/// Smallest `k >= 1` with `r^k <= 1/3`; `None` unless `0 <= r < 1`.
pub fn k_bound_for_ratio(r: f64) -> Option<usize> {
    if !(0.0..1.0).contains(&r) {
        return None;
    }
    if r <= 1.0 / 3.0 {
        return Some(1);
    }
    // r <= 3^(-1/k), with slack for ratios supplied as rounded 3^(-1/k)
    let fits = |k: usize| r <= 3f64.powf(-1.0 / k as f64) * (1.0 + 1e-12);
    let mut k = (3f64.ln() / (1.0 / r).ln()).ceil().max(1.0) as usize;
    while k > 1 && fits(k - 1) {
        k -= 1;
    }
    while !fits(k) {
        k += 1;
    }
    Some(k)
}

/// Power from the `1/3`-disc bound: every non-dominant quotient raised to
/// `k` lands in the disc of radius `1/3`, which lies inside the deltoid.
pub fn select_k_bound(info: &SpectrumInfo, mod_tol: f64) -> Result<usize, SpectrumError> {
    if classify_dominant(info, mod_tol, DEFAULT_ROU_MAX_ORDER) != Classification::UniqueDominant {
        return Err(SpectrumError::NotUniqueDominant);
    }
    match info.subdominant_ratio(mod_tol) {
        None => Ok(1),
        Some(r) => k_bound_for_ratio(r).ok_or(SpectrumError::NotUniqueDominant),
    }
}

/// Smallest `k <= k_max` with every listed `(lambda / lambda1)^k` in the
/// deltoid.
pub fn select_k_geometric(info: &SpectrumInfo, k_max: usize, tol: f64) -> Option<usize> {
    (1..=k_max).find(|&k| info.quotients().all(|z| power_preimage_contains(z, k as u32, tol)))
}

/// `k0 * k1` where `k1` pulls the largest non-dominant quotient into the
/// `1/3` disc; `k0` alone when every eigenvalue is dominant.
pub fn k_for_family(k0: usize, info: &SpectrumInfo, mod_tol: f64) -> Option<usize> {
    match info.subdominant_ratio(mod_tol) {
        None => Some(k0),
        Some(r) => k_bound_for_ratio(r).map(|k1| k0 * k1),
    }
}

fn check_unit_interval(x: f64) -> Result<(), SpectrumError> {
    if !(x > 0.0 && x < 1.0) {
        return Err(SpectrumError::Domain(x));
    }
    Ok(())
}

/// The positive `alpha` with `(e^alpha + e^-alpha + 1) / 3 = 1 / lambda1`.
pub fn alpha_from_lambda1(lambda1: f64) -> Result<f64, SpectrumError> {
    check_unit_interval(lambda1)?;
    Ok(((3.0 / lambda1 - 1.0) / 2.0).acosh())
}

/// Inverse of [`alpha_from_lambda1`]: `3u / (1 + u + u^2)` with `u = e^-alpha`.
pub fn lambda1_from_alpha(alpha: f64) -> f64 {
    let u = (-alpha).exp();
    3.0 * u / (1.0 + u + u * u)
}

/// Asymptotic error reduction per step, `s / (1 + sqrt(1 - s^2))` with
/// `s = 2 lambda1 / (3 - lambda1)`; equals `e^-alpha(lambda1)`.
pub fn asymptotic_rate_g(lambda1: f64) -> Result<f64, SpectrumError> {
    check_unit_interval(lambda1)?;
    let s = 2.0 * lambda1 / (3.0 - lambda1);
    Ok(s / (1.0 + (1.0 - s * s).sqrt()))
}

fn max_root_modulus(z: Complex64) -> f64 {
    // quotients a few ulps from the cusp are the cusp; the triple root there
    // would otherwise amplify rounding in z to its square root
    let z = if (z - 1.0).norm() <= 8.0 * f64::EPSILON { Complex64::new(1.0, 0.0) } else { z };
    characteristic_roots(z).map_or(f64::NAN, |r| r.iter().map(|t| t.norm()).fold(0.0, f64::max))
}

/// Limit of `|f_m(lambda / lambda1) / f_m(1 / lambda1)|^(1/m)`: the rate at
/// which the eigen-component for `lambda` decays under the generalized
/// scheme with dominant eigenvalue `lambda1`.
pub fn predicted_rate(lambda: Complex64, lambda1: Complex64) -> f64 {
    max_root_modulus(lambda / lambda1) / max_root_modulus(lambda1.inv())
}

/// Largest root modulus of
/// `mu^3 - a lambda mu^2 - b conj(lambda) mu - c` with
/// `a = 1 + u + u^2`, `b = -(u + u^2 + u^3)`, `c = u^3`, `u = e^-alpha`.
///
/// With `lambda1 = 3u / (1 + u + u^2)` the substitution `mu = u t` turns the
/// cubic into the characteristic polynomial of the `f_m` recurrence at
/// `lambda / lambda1`, which is what gets solved.
pub fn mu_max(lambda: Complex64, alpha: f64) -> f64 {
    let u = (-alpha).exp();
    u * max_root_modulus(lambda / lambda1_from_alpha(alpha))
}

/// Real root of `z^3 + z^2 + 2z - 1`, where `g(z) = z^2`.
pub fn feasibility_root() -> f64 {
    let p = |z: f64| ((z + 1.0) * z + 2.0) * z - 1.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if p(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Smallest `|lambda1|` for which accelerating `M^k` beats two basic steps
/// of `M^k`.
pub fn feasibility_threshold(k: usize) -> f64 {
    feasibility_root().powf(1.0 / k.max(1) as f64)
}

/// Power iteration with a Rayleigh-quotient estimate from a seeded complex
/// Gaussian start. Returns `(lambda1, ||M v - lambda1 v|| / ||v||)`.
pub fn estimate_dominant_eigenvalue(
    m: &ComplexSparseMatrix,
    iters: usize,
    tol: f64,
    seed: u64,
) -> Result<(Complex64, f64), SpectrumError> {
    if !m.is_square() {
        return Err(LinalgError::DimensionMismatch { expected: m.n_rows(), found: m.n_cols() }.into());
    }
    let n = m.n_rows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
    let start: Vec<Complex64> = (0..n).map(|_| Complex64::new(draw(), draw())).collect();
    let mut v = ComplexVector::new(start)?;
    v = v.scaled(Complex64::from(1.0 / v.norm()));
    let mut estimate = Complex64::new(0.0, 0.0);
    let mut residual = f64::INFINITY;
    for _ in 0..iters.max(1) {
        let mv = m.matvec(&v)?;
        estimate = v.dot(&mv);
        residual = mv.add_scaled(-estimate, &v).norm();
        if residual <= tol {
            return Ok((estimate, residual));
        }
        let nrm = mv.norm();
        if nrm == 0.0 {
            return Ok((Complex64::new(0.0, 0.0), 0.0));
        }
        v = mv.scaled(Complex64::from(1.0 / nrm));
    }
    Err(SpectrumError::NoConvergence { estimate, residual })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    pub k_max: usize,
    /// Defaults to the source's dominance tolerance when `None`.
    pub mod_tol: Option<f64>,
    pub rou_max_order: usize,
    pub membership_tol: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            k_max: DEFAULT_K_MAX,
            mod_tol: None,
            rou_max_order: DEFAULT_ROU_MAX_ORDER,
            membership_tol: DEFAULT_MEMBERSHIP_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub classification: Classification,
    pub lambda1: Complex64,
    pub source: SpectrumSource,
    pub k_bound: Option<usize>,
    pub k_geometric: Option<usize>,
    /// Power used for prediction: geometric when the full spectrum is known,
    /// otherwise the disc bound (`k0 k1` for root-of-unity families).
    pub k: Option<usize>,
    /// `|lambda1|^k`.
    pub predicted_basic_rate: Option<f64>,
    /// Largest predicted per-step rate over the listed eigenvalues, or
    /// `g(lambda1^k)` when only the dominant eigenvalue is known.
    pub predicted_accel_rate: Option<f64>,
    /// `g(lambda1^k)`, defined only when `lambda1^k` is real and positive.
    pub g_rate: Option<f64>,
    /// `|lambda1|^(2k)`: two basic steps cost as much as one accelerated one.
    pub fair_comparison_rate: Option<f64>,
    pub feasibility_threshold: Option<f64>,
    pub practical: Option<bool>,
}

fn real_positive(z: Complex64) -> Option<f64> {
    (z.im.abs() <= 1e-12 * z.norm() && z.re > 0.0).then_some(z.re)
}

pub fn build_report(info: &SpectrumInfo, opts: &ReportOptions) -> SpectrumReport {
    let mod_tol = opts.mod_tol.unwrap_or_else(|| info.default_mod_tol());
    let classification = classify_dominant(info, mod_tol, opts.rou_max_order);
    let mut report = SpectrumReport {
        classification,
        lambda1: info.lambda1,
        source: info.source,
        k_bound: None,
        k_geometric: None,
        k: None,
        predicted_basic_rate: None,
        predicted_accel_rate: None,
        g_rate: None,
        fair_comparison_rate: None,
        feasibility_threshold: None,
        practical: None,
    };
    let k_geometric = info.complete.then(|| select_k_geometric(info, opts.k_max, opts.membership_tol)).flatten();
    let k = match classification {
        Classification::Inapplicable => return report,
        Classification::UniqueDominant => {
            report.k_bound = select_k_bound(info, mod_tol).ok();
            report.k_geometric = k_geometric;
            k_geometric.or(report.k_bound)
        }
        Classification::RootOfUnityFamily { k0 } => {
            report.k_bound = k_for_family(k0, info, mod_tol);
            report.k_geometric = k_geometric;
            k_geometric.or(report.k_bound)
        }
    };
    let Some(k) = k else { return report };
    report.k = Some(k);
    let lk = info.lambda1.powu(k as u32);
    let rk = lk.norm();
    report.predicted_basic_rate = Some(rk);
    report.fair_comparison_rate = Some(rk * rk);
    report.g_rate = real_positive(lk).and_then(|l| asymptotic_rate_g(l).ok());
    report.predicted_accel_rate = if info.complete {
        info.eigenvalues.iter().map(|l| predicted_rate(l.powu(k as u32), lk)).reduce(f64::max)
    } else {
        report.g_rate
    };
    let threshold = feasibility_threshold(k);
    report.feasibility_threshold = Some(threshold);
    report.practical = Some(info.lambda1.norm() >= threshold);
    report
}

fn opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "none".to_string(), |x| x.to_string())
}

fn opt_f(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| format!("{x:.6}"))
}

impl fmt::Display for SpectrumReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "classification: {}", self.classification)?;
        writeln!(f, "lambda1: {:.6}{:+.6}i ({})", self.lambda1.re, self.lambda1.im, self.source.as_str())?;
        writeln!(f, "k_bound: {}", opt(&self.k_bound))?;
        writeln!(f, "k_geometric: {}", opt(&self.k_geometric))?;
        writeln!(f, "k: {}", opt(&self.k))?;
        writeln!(f, "predicted_basic_rate: {}", opt_f(self.predicted_basic_rate))?;
        writeln!(f, "predicted_accel_rate: {}", opt_f(self.predicted_accel_rate))?;
        writeln!(f, "g_rate: {}", opt_f(self.g_rate))?;
        writeln!(f, "fair_comparison_rate: {}", opt_f(self.fair_comparison_rate))?;
        writeln!(f, "feasibility_threshold: {}", opt_f(self.feasibility_threshold))?;
        writeln!(f, "practical: {}", opt(&self.practical))?;
        writeln!(f, "note: thresholds are k-th roots of {:.6}, the real root of z^3 + z^2 + 2z - 1", feasibility_root())
    }
}
