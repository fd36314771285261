use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{ComplexVector, LinalgError};

/// Row count above which matvec splits rows across the rayon pool. Each
/// row is still summed in ascending column order, so results do not depend
/// on the thread count.
const PARALLEL_ROWS: usize = 4096;

/// Compressed-sparse-row matrix of complex entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<Complex64>,
}

impl ComplexSparseMatrix {
    /// Builds a matrix from raw CSR arrays, validating the layout.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<Complex64>,
    ) -> Result<Self, LinalgError> {
        if row_offsets.len() != n_rows + 1 || row_offsets[0] != 0 {
            return Err(LinalgError::InvalidCsr("row_offsets must have length n_rows + 1 and start at 0"));
        }
        if row_offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(LinalgError::InvalidCsr("row_offsets must be nondecreasing"));
        }
        let nnz = row_offsets[n_rows];
        if col_indices.len() != nnz || values.len() != nnz {
            return Err(LinalgError::InvalidCsr("col_indices and values must have nnz entries"));
        }
        for r in 0..n_rows {
            let cols = &col_indices[row_offsets[r]..row_offsets[r + 1]];
            if cols.iter().any(|&c| c >= n_cols) {
                return Err(LinalgError::InvalidCsr("column index out of bounds"));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(LinalgError::InvalidCsr("column indices must be strictly increasing within a row"));
            }
        }
        Ok(Self { n_rows, n_cols, row_offsets, col_indices, values })
    }

    /// Builds a matrix from `(row, col, value)` triplets in any order.
    /// Duplicate positions are summed.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, Complex64)],
    ) -> Result<Self, LinalgError> {
        let mut counts = vec![0usize; n_rows + 1];
        for &(r, c, _) in triplets {
            if r >= n_rows || c >= n_cols {
                return Err(LinalgError::IndexOutOfBounds { row: r, col: c, n_rows, n_cols });
            }
            counts[r + 1] += 1;
        }
        for i in 0..n_rows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut entries = vec![(0usize, Complex64::new(0.0, 0.0)); triplets.len()];
        for &(r, c, v) in triplets {
            entries[next[r]] = (c, v);
            next[r] += 1;
        }
        let mut row_offsets = Vec::with_capacity(n_rows + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        for r in 0..n_rows {
            let row = &mut entries[counts[r]..counts[r + 1]];
            row.sort_by_key(|e| e.0);
            for &(c, v) in row.iter() {
                if col_indices.len() > row_offsets[r] && *col_indices.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_indices.push(c);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self { n_rows, n_cols, row_offsets, col_indices, values })
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![Complex64::new(1.0, 0.0); n])
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        Self {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    /// Permutation matrix with a one at `(i, perm[i])`, so `(P A)` row `i` is
    /// row `perm[i]` of `A`.
    pub fn permutation(perm: &[usize]) -> Result<Self, LinalgError> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(LinalgError::InvalidCsr("not a permutation"));
            }
            seen[p] = true;
        }
        Ok(Self {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: perm.to_vec(),
            values: vec![Complex64::new(1.0, 0.0); n],
        })
    }

    /// Sparse copy of a dense matrix, dropping entries with modulus at or
    /// below `drop_tol`.
    pub fn from_dense(a: &DMatrix<Complex64>, drop_tol: f64) -> Self {
        let mut row_offsets = vec![0];
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for r in 0..a.nrows() {
            for c in 0..a.ncols() {
                let v = a[(r, c)];
                if v.norm() > drop_tol {
                    col_indices.push(c);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Self { n_rows: a.nrows(), n_cols: a.ncols(), row_offsets, col_indices, values }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut d = DMatrix::zeros(self.n_rows, self.n_cols);
        for (r, c, v) in self.iter() {
            d[(r, c)] = v;
        }
        d
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.row_offsets[self.n_rows]
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Entries of row `r` as `(col, value)` in ascending column order.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_offsets[r]..self.row_offsets[r + 1];
        self.col_indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    /// All stored entries as `(row, col, value)`, row-major.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.n_rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let span = self.row_offsets[r]..self.row_offsets[r + 1];
        match self.col_indices[span.clone()].binary_search(&c) {
            Ok(i) => self.values[span.start + i],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn matvec(&self, v: &ComplexVector) -> Result<ComplexVector, LinalgError> {
        if v.len() != self.n_cols {
            return Err(LinalgError::DimensionMismatch { expected: self.n_cols, found: v.len() });
        }
        let row_dot = |r: usize| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in self.row_offsets[r]..self.row_offsets[r + 1] {
                acc += self.values[i] * v[self.col_indices[i]];
            }
            acc
        };
        let out: Vec<Complex64> = if self.n_rows >= PARALLEL_ROWS {
            (0..self.n_rows).into_par_iter().map(row_dot).collect()
        } else {
            (0..self.n_rows).map(row_dot).collect()
        };
        Ok(ComplexVector::from_vec_unchecked(out))
    }

    /// Conjugate transpose, `(A*)_{ij} = conj(A_{ji})`.
    pub fn conj_transpose(&self) -> Self {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for i in 0..self.n_cols {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let nnz = self.nnz();
        let mut col_indices = vec![0usize; nnz];
        let mut values = vec![Complex64::new(0.0, 0.0); nnz];
        // rows are visited in ascending order, so each output row is sorted
        for (r, c, v) in self.iter() {
            col_indices[next[c]] = r;
            values[next[c]] = v.conj();
            next[c] += 1;
        }
        Self { n_rows: self.n_cols, n_cols: self.n_rows, row_offsets: counts, col_indices, values }
    }

    /// Sparse product `self * other`, dropping results with modulus at or
    /// below `drop_tol`.
    pub fn matmul(&self, other: &Self, drop_tol: f64) -> Result<Self, LinalgError> {
        if self.n_cols != other.n_rows {
            return Err(LinalgError::DimensionMismatch { expected: self.n_cols, found: other.n_rows });
        }
        let mut acc = vec![Complex64::new(0.0, 0.0); other.n_cols];
        let mut marker = vec![usize::MAX; other.n_cols];
        let mut touched = Vec::new();
        let mut row_offsets = vec![0];
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for r in 0..self.n_rows {
            touched.clear();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if marker[c] != r {
                        marker[c] = r;
                        acc[c] = Complex64::new(0.0, 0.0);
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                if acc[c].norm() > drop_tol {
                    col_indices.push(c);
                    values.push(acc[c]);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self { n_rows: self.n_rows, n_cols: other.n_cols, row_offsets, col_indices, values })
    }

    /// `self + s * other`
    pub fn add_scaled(&self, s: Complex64, other: &Self) -> Result<Self, LinalgError> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(LinalgError::DimensionMismatch { expected: self.n_rows, found: other.n_rows });
        }
        let triplets: Vec<_> = self.iter().chain(other.iter().map(|(r, c, v)| (r, c, s * v))).collect();
        Self::from_triplets(self.n_rows, self.n_cols, &triplets)
    }

    pub fn map_values(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v = f(*v);
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `||A A* - A* A||_F`
    pub fn normality_defect(&self) -> Result<f64, LinalgError> {
        let at = self.conj_transpose();
        let left = self.matmul(&at, 0.0)?;
        let right = at.matmul(self, 0.0)?;
        Ok(left.add_scaled(Complex64::new(-1.0, 0.0), &right)?.frobenius_norm())
    }
}
