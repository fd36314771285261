#![allow(dead_code)]

use gencheb::linalg::dense::dense_eigenvalues;
use gencheb::linalg::{ComplexSparseMatrix, ComplexVector};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense complex matrix with entries uniform in the unit square, rescaled to
/// spectral radius `rho`.
pub fn random_dense_with_radius(n: usize, rho: f64, r: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(n, n, |_, _| c(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5));
    let radius = dense_eigenvalues(&a).unwrap().iter().map(|l| l.norm()).fold(0.0, f64::max);
    a * Complex64::from(rho / radius)
}

pub fn random_vector(n: usize, r: &mut ChaCha8Rng) -> ComplexVector {
    ComplexVector::new((0..n).map(|_| c(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5)).collect()).unwrap()
}

/// `(I - A)^{-1} b` by nalgebra's LU, independent of the crate's solver.
pub fn direct_fixed_point(a: &DMatrix<Complex64>, b: &ComplexVector) -> ComplexVector {
    let n = a.nrows();
    let lhs = DMatrix::<Complex64>::identity(n, n) - a;
    let rhs = nalgebra::DVector::from_column_slice(b.as_slice());
    let x = lhs.lu().solve(&rhs).unwrap();
    ComplexVector::new(x.iter().copied().collect()).unwrap()
}

pub fn sparse(a: &DMatrix<Complex64>) -> ComplexSparseMatrix {
    ComplexSparseMatrix::from_dense(a, 0.0)
}
