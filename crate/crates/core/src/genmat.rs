//! Seeded normal sparse test systems and a small non-normal fixture.
//!
//! A generated matrix is `M = U* D U` with `U = P U0`, where `D` is diagonal
//! with a planted dominant eigenvalue, `U0` is a random unitary block padded
//! with the identity and `P` a random permutation. `M` is normal, so
//! `M~ = M*` has the same eigenvectors with conjugated eigenvalues.
//!
//! The three random ingredients draw from separate ChaCha8 streams of the
//! same seed, so changing e.g. the block size does not reshuffle the
//! spectrum.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::linalg::dense::phase_normalized_q;
use crate::linalg::{ComplexSparseMatrix, ComplexVector, LinalgError};
use crate::solvers::IterationSystem;

/// Entries of the assembled matrix below this magnitude are dropped.
pub const DROP_TOL: f64 = 1e-14;

const SPECTRUM_STREAM: u64 = 0;
const UNITARY_STREAM: u64 = 1;
const PERMUTATION_STREAM: u64 = 2;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("fixture check failed: {0}")]
    FixtureCorrupt(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalMatrixSpec {
    pub n: usize,
    pub block_size: usize,
    pub lambda1: f64,
    pub inner_radius: f64,
    pub seed: u64,
}

impl Default for NormalMatrixSpec {
    fn default() -> Self {
        Self { n: 1000, block_size: 100, lambda1: 0.9, inner_radius: 0.6, seed: 42 }
    }
}

impl NormalMatrixSpec {
    pub fn validate(&self) -> Result<(), GenError> {
        if self.n == 0 {
            return Err(GenError::InvalidSpec("n must be positive".into()));
        }
        if self.block_size > self.n {
            return Err(GenError::InvalidSpec(format!("block size {} exceeds n = {}", self.block_size, self.n)));
        }
        if !(0.0 < self.inner_radius && self.inner_radius < self.lambda1 && self.lambda1 < 1.0) {
            return Err(GenError::InvalidSpec(format!(
                "need 0 < inner_radius < lambda1 < 1, got inner_radius = {}, lambda1 = {}",
                self.inner_radius, self.lambda1
            )));
        }
        Ok(())
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// `lambda1` followed by `n - 1` values `inner_radius * a * e^{2 pi i b}`
/// with `a` in `(0, 1)` and `b` in `[0, 1)`.
pub fn random_spectrum(spec: &NormalMatrixSpec) -> Vec<Complex64> {
    let mut r = rng(spec.seed, SPECTRUM_STREAM);
    let mut out = Vec::with_capacity(spec.n);
    out.push(Complex64::new(spec.lambda1, 0.0));
    while out.len() < spec.n {
        let a: f64 = r.random();
        let b: f64 = r.random();
        if a == 0.0 {
            continue;
        }
        out.push(Complex64::from_polar(spec.inner_radius * a, 2.0 * PI * b));
    }
    out
}

/// Dense random unitary on the leading `block_size` indices, identity on
/// the rest. The block is the phase-normalized QR factor of a complex
/// Gaussian matrix.
pub fn embedded_random_unitary(n: usize, block_size: usize, seed: u64) -> Result<ComplexSparseMatrix, GenError> {
    if block_size > n {
        return Err(GenError::InvalidSpec(format!("block size {block_size} exceeds n = {n}")));
    }
    if block_size == 0 {
        return Ok(ComplexSparseMatrix::identity(n));
    }
    let mut r = rng(seed, UNITARY_STREAM);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut draw = || -> f64 { StandardNormal.sample(&mut r) };
    let g = DMatrix::from_fn(block_size, block_size, |_, _| Complex64::new(draw() * scale, draw() * scale));
    let q = phase_normalized_q(&g);
    let mut triplets = Vec::with_capacity(block_size * block_size + n - block_size);
    for i in 0..block_size {
        for j in 0..block_size {
            triplets.push((i, j, q[(i, j)]));
        }
    }
    triplets.extend((block_size..n).map(|i| (i, i, Complex64::new(1.0, 0.0))));
    Ok(ComplexSparseMatrix::from_triplets(n, n, &triplets)?)
}

pub fn random_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng(seed, PERMUTATION_STREAM));
    perm
}

/// A generated normal system with its ingredients.
#[derive(Debug, Clone)]
pub struct NormalSystem {
    pub spec: NormalMatrixSpec,
    pub system: IterationSystem,
    /// Reference solution (all ones).
    pub x: ComplexVector,
    pub diagonal: Vec<Complex64>,
    pub unitary: ComplexSparseMatrix,
    pub permutation: Vec<usize>,
}

/// `M = U* D U` from explicit ingredients, dropping entries below
/// [`DROP_TOL`].
pub fn normal_from_parts(
    diagonal: &[Complex64],
    unitary: &ComplexSparseMatrix,
) -> Result<ComplexSparseMatrix, GenError> {
    let d = ComplexSparseMatrix::diagonal(diagonal);
    let du = d.matmul(unitary, 0.0)?;
    Ok(unitary.conj_transpose().matmul(&du, DROP_TOL)?)
}

/// Right side `(I - A) x`.
pub fn rhs_for(a: &ComplexSparseMatrix, x: &ComplexVector) -> Result<ComplexVector, GenError> {
    Ok(x.sub(&a.matvec(x)?))
}

pub fn assemble_normal_system(spec: &NormalMatrixSpec) -> Result<NormalSystem, GenError> {
    spec.validate()?;
    let diagonal = random_spectrum(spec);
    let u0 = embedded_random_unitary(spec.n, spec.block_size, spec.seed)?;
    let permutation = random_permutation(spec.n, spec.seed);
    let p = ComplexSparseMatrix::permutation(&permutation)?;
    let unitary = p.matmul(&u0, 0.0)?;
    let m = normal_from_parts(&diagonal, &unitary)?;
    let mt = m.conj_transpose();
    let x = ComplexVector::ones(spec.n);
    let g = rhs_for(&m, &x)?;
    let gt = rhs_for(&mt, &x)?;
    let system = IterationSystem::new(m, g)?.with_tilde(mt, gt)?.with_lambda1(Complex64::new(spec.lambda1, 0.0));
    Ok(NormalSystem { spec: *spec, system, x, diagonal, unitary, permutation })
}

/// The 4x4 non-normal example with its diagonalization `P^-1 M P = D`.
#[derive(Debug, Clone)]
pub struct Example33 {
    pub system: IterationSystem,
    pub x: ComplexVector,
    pub eigenvalues: Vec<Complex64>,
    pub p: DMatrix<Complex64>,
    pub d: DMatrix<Complex64>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[rustfmt::skip]
fn example33_matrix() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(4, 4, &[
        c(1.40, 0.70),   c(-1.80, -2.80), c(1.20, -2.80),  c(0.20, 0.00),
        c(0.25, 0.35),   c(-0.95, -1.05), c(-0.60, -0.70), c(-0.85, 0.35),
        c(0.00, 0.00),   c(0.90, 0.70),   c(1.30, 1.40),   c(0.90, 0.70),
        c(-0.25, -0.35), c(-0.45, 0.35),  c(-1.20, -0.70), c(-0.55, -1.05),
    ])
}

#[rustfmt::skip]
fn example33_p() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(4, 4, &[
        c(-2.0, 0.0), c(3.0, 0.0),  c(1.0, 0.0),  c(-1.0, 0.0),
        c(-0.5, 0.0), c(1.0, 0.0),  c(0.5, 0.0),  c(-0.75, 0.0),
        c(0.0, 0.0),  c(-1.0, 0.0), c(0.0, 0.0),  c(0.5, 0.0),
        c(0.5, 0.0),  c(0.0, 0.0),  c(-0.5, 0.0), c(-0.25, 0.0),
    ])
}

/// Builds the 4x4 example with `M~ = P conj(D) P^-1`, reference solution
/// all ones, and `lambda1 = 0.9`. Fails if `P^-1 M P` does not reproduce the
/// stated diagonal to `1e-12`.
pub fn example33_fixture() -> Result<Example33, GenError> {
    let m = example33_matrix();
    let p = example33_p();
    let eigenvalues = vec![c(0.9, 0.0), c(0.4, 0.7), c(0.4, -0.7), c(-0.5, 0.0)];
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(eigenvalues.clone()));
    let p_inv = p.clone().try_inverse().ok_or_else(|| GenError::FixtureCorrupt("P is singular".into()))?;
    let check = &p_inv * &m * &p;
    let defect = (&check - &d).iter().map(|v| v.norm()).fold(0.0, f64::max);
    if defect > 1e-12 {
        return Err(GenError::FixtureCorrupt(format!("P^-1 M P differs from D by {defect:e}")));
    }
    let mt = &p * d.map(|v| v.conj()) * &p_inv;
    let m_sparse = ComplexSparseMatrix::from_dense(&m, 0.0);
    let mt_sparse = ComplexSparseMatrix::from_dense(&mt, 0.0);
    let x = ComplexVector::ones(4);
    let g = rhs_for(&m_sparse, &x)?;
    let gt = rhs_for(&mt_sparse, &x)?;
    let system = IterationSystem::new(m_sparse, g)?.with_tilde(mt_sparse, gt)?.with_lambda1(eigenvalues[0]);
    Ok(Example33 { system, x, eigenvalues, p, d })
}
