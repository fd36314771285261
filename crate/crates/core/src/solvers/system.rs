use std::sync::Arc;

use num_complex::Complex64;

use crate::linalg::{geometric_sum_apply, ComplexSparseMatrix, ComplexVector, LinalgError, PoweredOperator};

#[derive(Debug, Clone)]
struct TildePair {
    base: Arc<ComplexSparseMatrix>,
    g: ComplexVector,
    h: ComplexVector,
}

/// One accelerable iteration `x_m = M^k x_{m-1} + h` together with the
/// original `(M, g)` it was derived from and the optional conjugate-swapped
/// companion `(M~, g~)`.
///
/// `lambda1` is a dominant eigenvalue of the untransformed `M`; the schemes
/// use `lambda1^k`.
#[derive(Debug, Clone)]
pub struct IterationSystem {
    base: Arc<ComplexSparseMatrix>,
    g: ComplexVector,
    h: ComplexVector,
    tilde: Option<TildePair>,
    lambda1: Option<Complex64>,
    k: usize,
}

impl IterationSystem {
    pub fn new(m: ComplexSparseMatrix, g: ComplexVector) -> Result<Self, LinalgError> {
        Self::from_shared(Arc::new(m), g)
    }

    pub fn from_shared(m: Arc<ComplexSparseMatrix>, g: ComplexVector) -> Result<Self, LinalgError> {
        if !m.is_square() {
            return Err(LinalgError::DimensionMismatch { expected: m.n_rows(), found: m.n_cols() });
        }
        if g.len() != m.n_rows() {
            return Err(LinalgError::DimensionMismatch { expected: m.n_rows(), found: g.len() });
        }
        Ok(Self { base: m, h: g.clone(), g, tilde: None, lambda1: None, k: 1 })
    }

    /// Attaches `M~` and `g~`. The pair is transformed with the same `k` as `M`.
    pub fn with_tilde(mut self, m_tilde: ComplexSparseMatrix, g_tilde: ComplexVector) -> Result<Self, LinalgError> {
        let n = self.dim();
        if m_tilde.n_rows() != n || m_tilde.n_cols() != n {
            return Err(LinalgError::DimensionMismatch { expected: n, found: m_tilde.n_rows() });
        }
        if g_tilde.len() != n {
            return Err(LinalgError::DimensionMismatch { expected: n, found: g_tilde.len() });
        }
        let base = Arc::new(m_tilde);
        let h = geometric_sum_apply(&base, self.k, &g_tilde)?;
        self.tilde = Some(TildePair { base, g: g_tilde, h });
        Ok(self)
    }

    pub fn with_lambda1(mut self, lambda1: Complex64) -> Self {
        self.lambda1 = Some(lambda1);
        self
    }

    pub fn dim(&self) -> usize {
        self.base.n_rows()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn matrix(&self) -> &ComplexSparseMatrix {
        &self.base
    }

    pub fn tilde_matrix(&self) -> Option<&ComplexSparseMatrix> {
        self.tilde.as_ref().map(|t| t.base.as_ref())
    }

    /// Right side of the original (`k = 1`) system.
    pub fn g(&self) -> &ComplexVector {
        &self.g
    }

    pub fn g_tilde(&self) -> Option<&ComplexVector> {
        self.tilde.as_ref().map(|t| &t.g)
    }

    /// Right side `(I + M + ... + M^{k-1}) g` of the transformed system.
    pub fn h(&self) -> &ComplexVector {
        &self.h
    }

    pub fn h_tilde(&self) -> Option<&ComplexVector> {
        self.tilde.as_ref().map(|t| &t.h)
    }

    pub fn has_tilde(&self) -> bool {
        self.tilde.is_some()
    }

    pub fn lambda1(&self) -> Option<Complex64> {
        self.lambda1
    }

    /// `lambda1^k`, the dominant eigenvalue of the transformed operator.
    pub fn effective_lambda1(&self) -> Option<Complex64> {
        self.lambda1.map(|l| l.powu(self.k as u32))
    }

    pub fn operator(&self) -> PoweredOperator {
        PoweredOperator::new(self.base.clone(), self.k).expect("k >= 1 and square base are invariants")
    }

    pub fn tilde_operator(&self) -> Option<PoweredOperator> {
        self.tilde
            .as_ref()
            .map(|t| PoweredOperator::new(t.base.clone(), self.k).expect("k >= 1 and square base are invariants"))
    }

    /// Replaces `M` by `M^k` and `g` by `(I + M + ... + M^{k-1}) g` (likewise
    /// for the tilde pair). `k` is relative to the original system, so
    /// transforming an already transformed system recomputes from `g`.
    pub fn transform(&self, k: usize) -> Result<Self, LinalgError> {
        if k == 0 {
            return Err(LinalgError::InvalidPower);
        }
        let h = geometric_sum_apply(&self.base, k, &self.g)?;
        let tilde = match &self.tilde {
            Some(t) => {
                Some(TildePair { base: t.base.clone(), g: t.g.clone(), h: geometric_sum_apply(&t.base, k, &t.g)? })
            }
            None => None,
        };
        Ok(Self { base: self.base.clone(), g: self.g.clone(), h, tilde, lambda1: self.lambda1, k })
    }

    /// Same matrices with every right-hand side set to zero. Run from
    /// `eps_0 = x - x_0`, its iterates are the errors of the original run.
    pub fn homogeneous(&self) -> Self {
        let n = self.dim();
        Self {
            base: self.base.clone(),
            g: ComplexVector::zeros(n),
            h: ComplexVector::zeros(n),
            tilde: self.tilde.as_ref().map(|t| TildePair {
                base: t.base.clone(),
                g: ComplexVector::zeros(n),
                h: ComplexVector::zeros(n),
            }),
            lambda1: self.lambda1,
            k: self.k,
        }
    }

    /// One basic step `M^k y + h`.
    pub fn step(&self, y: &ComplexVector) -> Result<ComplexVector, LinalgError> {
        Ok(self.operator().apply(y)?.add(&self.h))
    }

    /// One tilde step `M~^k y + h~`, if the tilde pair is present.
    pub fn tilde_step(&self, y: &ComplexVector) -> Option<Result<ComplexVector, LinalgError>> {
        let op = self.tilde_operator()?;
        let h = &self.tilde.as_ref()?.h;
        Some(op.apply(y).map(|v| v.add(h)))
    }

    /// `(I - M) y - g` against the original system.
    pub fn residual(&self, y: &ComplexVector) -> Result<ComplexVector, LinalgError> {
        let my = self.base.matvec(y)?;
        Ok(ComplexVector::from_vec_unchecked(
            y.iter().zip(my.iter()).zip(self.g.iter()).map(|((a, b), c)| a - b - c).collect(),
        ))
    }

    pub fn residual_norm(&self, y: &ComplexVector) -> Result<f64, LinalgError> {
        Ok(self.residual(y)?.norm())
    }

    /// Largest of `||(I - M) x - g||` and `||(I - M~) x - g~||`, relative to
    /// `max(1, ||x||)`.
    pub fn consistency_defect(&self, x: &ComplexVector) -> Result<f64, LinalgError> {
        let scale = x.norm().max(1.0);
        let mut worst = self.residual_norm(x)?;
        if let Some(t) = &self.tilde {
            let mx = t.base.matvec(x)?;
            let r: f64 =
                x.iter().zip(mx.iter()).zip(t.g.iter()).map(|((a, b), c)| (a - b - c).norm_sqr()).sum::<f64>().sqrt();
            worst = worst.max(r);
        }
        Ok(worst / scale)
    }
}
