use std::sync::Arc;

use super::{ComplexSparseMatrix, ComplexVector, LinalgError};

/// The action of `base^k`, applied as `k` successive matvecs.
#[derive(Debug, Clone)]
pub struct PoweredOperator {
    base: Arc<ComplexSparseMatrix>,
    k: usize,
}

impl PoweredOperator {
    pub fn new(base: Arc<ComplexSparseMatrix>, k: usize) -> Result<Self, LinalgError> {
        if k == 0 {
            return Err(LinalgError::InvalidPower);
        }
        if !base.is_square() {
            return Err(LinalgError::DimensionMismatch { expected: base.n_rows(), found: base.n_cols() });
        }
        Ok(Self { base, k })
    }

    pub fn base(&self) -> &Arc<ComplexSparseMatrix> {
        &self.base
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.base.n_rows()
    }

    pub fn apply(&self, v: &ComplexVector) -> Result<ComplexVector, LinalgError> {
        let mut out = self.base.matvec(v)?;
        for _ in 1..self.k {
            out = self.base.matvec(&out)?;
        }
        Ok(out)
    }
}

/// `(I + A + ... + A^{k-1}) v` by Horner accumulation, `k - 1` matvecs.
pub fn geometric_sum_apply(a: &ComplexSparseMatrix, k: usize, v: &ComplexVector) -> Result<ComplexVector, LinalgError> {
    if k == 0 {
        return Err(LinalgError::InvalidPower);
    }
    if v.len() != a.n_cols() || !a.is_square() {
        return Err(LinalgError::DimensionMismatch { expected: a.n_cols(), found: v.len() });
    }
    let mut acc = v.clone();
    for _ in 1..k {
        acc = a.matvec(&acc)?.add(v);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;

    #[test]
    fn geometric_sum_scalar() {
        let a = ComplexSparseMatrix::diagonal(&[Complex64::new(0.5, 0.0); 3]);
        let v = ComplexVector::ones(3);
        assert_eq!(geometric_sum_apply(&a, 1, &v).unwrap(), v);
        let s = geometric_sum_apply(&a, 3, &v).unwrap();
        assert!(s.iter().all(|x| (x - 1.75).norm() < 1e-15));
        assert!(geometric_sum_apply(&a, 0, &v).is_err());
    }

    #[test]
    fn powered_rejects_zero() {
        let a = Arc::new(ComplexSparseMatrix::identity(2));
        assert!(PoweredOperator::new(a, 0).is_err());
    }
}
