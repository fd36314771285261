//! Small dense helpers backed by `nalgebra`: eigendecomposition for
//! desk-scale validation, companion-matrix cubic roots, direct solves.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use super::{ComplexVector, LinalgError};

/// Largest dimension accepted by [`dense_eigendecomposition`].
pub const MAX_DENSE_EIG_DIM: usize = 64;

const SCHUR_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<Complex64>,
    /// Unit-norm eigenvectors, one per column, in the order of `values`.
    pub vectors: DMatrix<Complex64>,
}

/// Eigenvalues and eigenvectors of a small dense complex matrix.
///
/// Uses a complex Schur factorization `A = Q T Q*`; eigenvectors of the
/// triangular factor come from back substitution and are mapped back by `Q`.
pub fn dense_eigendecomposition(a: &DMatrix<Complex64>) -> Result<Eigen, LinalgError> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(LinalgError::DimensionMismatch { expected: n, found: a.ncols() });
    }
    if n > MAX_DENSE_EIG_DIM {
        return Err(LinalgError::TooLarge { n, max: MAX_DENSE_EIG_DIM });
    }
    if n == 0 {
        return Ok(Eigen { values: vec![], vectors: DMatrix::zeros(0, 0) });
    }
    let schur = Schur::try_new(a.clone(), f64::EPSILON, SCHUR_MAX_ITER).ok_or(LinalgError::ConvergenceFailure)?;
    let (q, t) = schur.unpack();
    let values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let scale = t.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * scale;

    let mut vectors = DMatrix::zeros(n, n);
    for j in 0..n {
        let lambda = values[j];
        let mut y = DVector::<Complex64>::zeros(n);
        y[j] = Complex64::new(1.0, 0.0);
        for i in (0..j).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for l in i + 1..=j {
                s += t[(i, l)] * y[l];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < small {
                d = Complex64::new(small, 0.0);
            }
            y[i] = -s / d;
        }
        let mut v = &q * y;
        let nrm = v.norm();
        if nrm > 0.0 {
            v /= Complex64::new(nrm, 0.0);
        }
        vectors.set_column(j, &v);
    }
    Ok(Eigen { values, vectors })
}

/// Eigenvalues only.
pub fn dense_eigenvalues(a: &DMatrix<Complex64>) -> Result<Vec<Complex64>, LinalgError> {
    Ok(dense_eigendecomposition(a)?.values)
}

/// Roots of `x^3 + a2 x^2 + a1 x + a0` from its companion matrix.
pub fn cubic_roots_monic(a2: Complex64, a1: Complex64, a0: Complex64) -> Option<[Complex64; 3]> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    #[rustfmt::skip]
    let companion = DMatrix::from_row_slice(3, 3, &[
        -a2, -a1, -a0,
        one, zero, zero,
        zero, one, zero,
    ]);
    let values = dense_eigenvalues(&companion).ok()?;
    Some([values[0], values[1], values[2]])
}

/// Solves `A x = b` by LU with partial pivoting.
pub fn dense_solve(a: &DMatrix<Complex64>, b: &ComplexVector) -> Result<ComplexVector, LinalgError> {
    if a.nrows() != b.len() || !a.is_square() {
        return Err(LinalgError::DimensionMismatch { expected: a.nrows(), found: b.len() });
    }
    let rhs = DVector::from_column_slice(b.as_slice());
    let x = a.clone().lu().solve(&rhs).ok_or(LinalgError::Singular)?;
    ComplexVector::new(x.iter().copied().collect())
}

pub fn dense_matvec(a: &DMatrix<Complex64>, v: &ComplexVector) -> ComplexVector {
    let out = a * DVector::from_column_slice(v.as_slice());
    ComplexVector::from_vec_unchecked(out.iter().copied().collect())
}

/// Unitary factor of a QR decomposition with the phases of `R`'s diagonal
/// moved into `Q`, so the result does not depend on the QR sign convention.
pub fn phase_normalized_q(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let qr = a.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..q.ncols().min(r.nrows()) {
        let d = r[(j, j)];
        let n = d.norm();
        if n > 0.0 {
            let phase = d / n;
            for i in 0..q.nrows() {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}
