//! Basic, classical Chebyshev and generalized Chebyshev iterations on an
//! [`IterationSystem`], with per-step telemetry in a [`ConvergenceTrace`].
//!
//! Every scheme runs on the (possibly k-transformed) operator stored in the
//! system, so one step of the basic scheme costs `k` matvecs and one step of
//! the generalized scheme costs `2k` (one application each of `M^k` and
//! `M~^k`). Residuals are always measured against the original `(M, g)`.

mod system;
mod trace;

use std::collections::VecDeque;

use num_complex::Complex64;
use thiserror::Error;

use crate::cheb_kernel::{second_step_weights, ChebCoefficientStream, ClassicalRatioStream, KernelError};
use crate::linalg::{ComplexVector, LinalgError};

pub use system::IterationSystem;
pub use trace::{ConvergenceTrace, SchemeTag, TraceRecord};

/// Residual growth factor, relative to the initial residual, treated as
/// divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e12;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("generalized scheme needs M~ and g~")]
    MissingTildeData,
    #[error("generalized scheme needs the dominant eigenvalue lambda1")]
    MissingLambda1,
    #[error("iteration diverged at step {step}: residual {residual:e}")]
    Divergence { step: usize, residual: f64 },
    #[error("residual tolerance not reached in {} steps (best residual {:e})", .0.trace.steps(), .0.residual)]
    NotConverged(Box<Solution>),
}

/// How the generalized scheme builds its third starting vector.
///
/// `Polynomial` forms `y2 = d1 (M y1 + g) - d2 (M~ y0 + g~)` with the weights
/// of `f_2(z) / f_2(1/lambda1)`, so every later error is exactly
/// `f_m(M/lambda1) / f_m(1/lambda1)` applied to the initial error. `Basic`
/// takes `y2` as a plain basic step; the dominant error component then
/// carries a factor growing like `m^2` and the observed ratio approaches its
/// limit much more slowly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Seeding {
    #[default]
    Polynomial,
    Basic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    Basic,
    /// `rho` bounds the (real) spectrum of the operator actually iterated,
    /// i.e. of `M^k` on a transformed system.
    Classical {
        rho: f64,
    },
    Generalized {
        seeding: Seeding,
    },
}

impl Scheme {
    pub fn tag(&self) -> SchemeTag {
        match self {
            Scheme::Basic => SchemeTag::Basic,
            Scheme::Classical { .. } => SchemeTag::Classical,
            Scheme::Generalized { .. } => SchemeTag::Generalized,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stopping {
    pub max_steps: usize,
    /// Stop once `||(I - M) y - g|| <= residual_tol * ||g||`. When `g = 0`
    /// the initial residual is the reference instead.
    pub residual_tol: Option<f64>,
}

impl Stopping {
    pub fn steps(max_steps: usize) -> Self {
        Self { max_steps, residual_tol: None }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: ComplexVector,
    pub residual: f64,
    pub trace: ConvergenceTrace,
}

enum Coefficients {
    Basic,
    Classical(ClassicalRatioStream),
    Generalized { seeding: Seeding, stream: ChebCoefficientStream, lambda1: Complex64 },
}

/// Produces successive iterates of one scheme, keeping only the last three.
struct Stepper<'a> {
    sys: &'a IterationSystem,
    coeffs: Coefficients,
    history: VecDeque<ComplexVector>,
    m: usize,
    matvecs: usize,
}

impl<'a> Stepper<'a> {
    fn new(sys: &'a IterationSystem, scheme: Scheme, x0: &ComplexVector) -> Result<Self, SolveError> {
        if x0.len() != sys.dim() {
            return Err(LinalgError::DimensionMismatch { expected: sys.dim(), found: x0.len() }.into());
        }
        let coeffs = match scheme {
            Scheme::Basic => Coefficients::Basic,
            Scheme::Classical { rho } => Coefficients::Classical(ClassicalRatioStream::new(rho)?),
            Scheme::Generalized { seeding } => {
                if !sys.has_tilde() {
                    return Err(SolveError::MissingTildeData);
                }
                let lambda1 = sys.effective_lambda1().ok_or(SolveError::MissingLambda1)?;
                Coefficients::Generalized { seeding, stream: ChebCoefficientStream::new(lambda1)?, lambda1 }
            }
        };
        let mut history = VecDeque::with_capacity(3);
        history.push_back(x0.clone());
        Ok(Self { sys, coeffs, history, m: 0, matvecs: 0 })
    }

    /// `history[back - i]` is `y_{m-i}`.
    fn back(&self, i: usize) -> &ComplexVector {
        &self.history[self.history.len() - 1 - i]
    }

    fn tilde_step(&self, y: &ComplexVector) -> Result<ComplexVector, SolveError> {
        self.sys.tilde_step(y).ok_or(SolveError::MissingTildeData)?.map_err(Into::into)
    }

    fn advance(&mut self) -> Result<&ComplexVector, SolveError> {
        let k = self.sys.k();
        let m = self.m + 1;
        let next = match &mut self.coeffs {
            _ if m == 1 => {
                self.matvecs += k;
                self.sys.step(self.back(0))?
            }
            Coefficients::Basic => {
                self.matvecs += k;
                self.sys.step(self.back(0))?
            }
            Coefficients::Classical(stream) => {
                let (r1, r2) = stream.step();
                self.matvecs += k;
                let a = self.sys.step(self.back(0))?;
                a.scaled(Complex64::from(r1)).add_scaled(Complex64::from(-r2), self.back(1))
            }
            Coefficients::Generalized { seeding, lambda1, .. } if m == 2 => match seeding {
                Seeding::Basic => {
                    self.matvecs += k;
                    self.sys.step(self.back(0))?
                }
                Seeding::Polynomial => {
                    let (d1, d2) = second_step_weights(*lambda1)?;
                    self.matvecs += 2 * k;
                    let a = self.sys.step(self.back(0))?;
                    let b = self.tilde_step(self.back(1))?;
                    a.scaled(d1).add_scaled(-d2, &b)
                }
            },
            Coefficients::Generalized { stream, .. } => {
                let c = stream.step()?;
                self.matvecs += 2 * k;
                let a = self.sys.step(self.back(0))?;
                let b = self.tilde_step(self.back(1))?;
                a.scaled(c.c1).add_scaled(-c.c2, &b).add_scaled(c.c3, self.back(2))
            }
        };
        if self.history.len() == 3 {
            self.history.pop_front();
        }
        self.history.push_back(next);
        self.m = m;
        Ok(self.back(0))
    }
}

struct Monitor<'r> {
    trace: ConvergenceTrace,
    reference: Option<&'r ComplexVector>,
    limit: f64,
}

impl<'r> Monitor<'r> {
    fn new(
        sys: &IterationSystem,
        scheme: Scheme,
        x0: &ComplexVector,
        reference: Option<&'r ComplexVector>,
    ) -> Result<(Self, f64), SolveError> {
        if let Some(x) = reference {
            if x.len() != sys.dim() {
                return Err(LinalgError::DimensionMismatch { expected: sys.dim(), found: x.len() }.into());
            }
        }
        let r0 = sys.residual_norm(x0)?;
        let scale = if r0 > 0.0 { r0 } else { sys.g().norm().max(1.0) };
        let mut mon =
            Self { trace: ConvergenceTrace::new(scheme.tag(), sys.k()), reference, limit: DIVERGENCE_FACTOR * scale };
        mon.record(sys, 0, x0, 0)?;
        Ok((mon, r0))
    }

    fn record(
        &mut self,
        sys: &IterationSystem,
        m: usize,
        y: &ComplexVector,
        matvecs: usize,
    ) -> Result<f64, SolveError> {
        let residual = sys.residual_norm(y)?;
        if !residual.is_finite() || residual > self.limit {
            return Err(SolveError::Divergence { step: m, residual });
        }
        let err = self.reference.map(|x| x.sub(y).norm());
        self.trace.push(m, err, residual, matvecs);
        Ok(residual)
    }
}

/// Runs `steps` steps of `scheme` from `x0` and returns every iterate
/// `y_0, ..., y_steps` with the trace. Error norms are recorded when a
/// reference solution is given.
pub fn iterate(
    sys: &IterationSystem,
    scheme: Scheme,
    x0: &ComplexVector,
    steps: usize,
    reference: Option<&ComplexVector>,
) -> Result<(Vec<ComplexVector>, ConvergenceTrace), SolveError> {
    let mut stepper = Stepper::new(sys, scheme, x0)?;
    let (mut mon, _) = Monitor::new(sys, scheme, x0, reference)?;
    let mut iterates = Vec::with_capacity(steps + 1);
    iterates.push(x0.clone());
    for _ in 0..steps {
        let y = stepper.advance()?.clone();
        mon.record(sys, stepper.m, &y, stepper.matvecs)?;
        iterates.push(y);
    }
    Ok((iterates, mon.trace))
}

/// Like [`iterate`] but keeps only the trace.
pub fn trace_run(
    sys: &IterationSystem,
    scheme: Scheme,
    x0: &ComplexVector,
    steps: usize,
    reference: Option<&ComplexVector>,
) -> Result<ConvergenceTrace, SolveError> {
    let mut stepper = Stepper::new(sys, scheme, x0)?;
    let (mut mon, _) = Monitor::new(sys, scheme, x0, reference)?;
    for _ in 0..steps {
        stepper.advance()?;
        let y = stepper.back(0).clone();
        mon.record(sys, stepper.m, &y, stepper.matvecs)?;
    }
    Ok(mon.trace)
}

/// Errors of `steps` steps started from `x0`, computed by running the scheme
/// on the homogeneous system from `x - x0`. In exact arithmetic the iterates
/// of that run are the errors `x - y_m`; in floating point they keep
/// shrinking below the rounding floor of a direct error computation.
pub fn propagated_error_trace(
    sys: &IterationSystem,
    scheme: Scheme,
    x0: &ComplexVector,
    x: &ComplexVector,
    steps: usize,
) -> Result<ConvergenceTrace, SolveError> {
    if x.len() != sys.dim() {
        return Err(LinalgError::DimensionMismatch { expected: sys.dim(), found: x.len() }.into());
    }
    let hom = sys.homogeneous();
    let zero = ComplexVector::zeros(sys.dim());
    trace_run(&hom, scheme, &x.sub(x0), steps, Some(&zero))
}

pub fn basic_iterate(
    sys: &IterationSystem,
    x0: &ComplexVector,
    steps: usize,
    reference: Option<&ComplexVector>,
) -> Result<(Vec<ComplexVector>, ConvergenceTrace), SolveError> {
    iterate(sys, Scheme::Basic, x0, steps, reference)
}

/// Classical Chebyshev acceleration; assumes the iterated operator has real
/// spectrum in `[-rho, rho]`.
pub fn chebyshev_iterate(
    sys: &IterationSystem,
    rho: f64,
    x0: &ComplexVector,
    steps: usize,
    reference: Option<&ComplexVector>,
) -> Result<(Vec<ComplexVector>, ConvergenceTrace), SolveError> {
    iterate(sys, Scheme::Classical { rho }, x0, steps, reference)
}

/// Generalized Chebyshev acceleration with weights from
/// `f_m(1/lambda1^k)`. The system must carry `M~`, `g~` and `lambda1`.
pub fn generalized_chebyshev_iterate(
    sys: &IterationSystem,
    seeding: Seeding,
    x0: &ComplexVector,
    steps: usize,
    reference: Option<&ComplexVector>,
) -> Result<(Vec<ComplexVector>, ConvergenceTrace), SolveError> {
    iterate(sys, Scheme::Generalized { seeding }, x0, steps, reference)
}

pub fn transform_system(sys: &IterationSystem, k: usize) -> Result<IterationSystem, SolveError> {
    Ok(sys.transform(k)?)
}

/// Iterates until the residual criterion of `stopping` holds or the step cap
/// is reached. Without a tolerance the run always ends at the cap and
/// succeeds. On failure the iterate with the smallest residual is returned
/// inside [`SolveError::NotConverged`].
pub fn solve(
    sys: &IterationSystem,
    x0: &ComplexVector,
    stopping: Stopping,
    scheme: Scheme,
    reference: Option<&ComplexVector>,
) -> Result<Solution, SolveError> {
    let mut stepper = Stepper::new(sys, scheme, x0)?;
    let (mut mon, r0) = Monitor::new(sys, scheme, x0, reference)?;
    let g_norm = sys.g().norm();
    let target = stopping.residual_tol.map(|tol| tol * if g_norm > 0.0 { g_norm } else { r0 });
    let mut best = (x0.clone(), r0);
    if target.is_some_and(|t| r0 <= t) {
        return Ok(Solution { x: best.0, residual: r0, trace: mon.trace });
    }
    for _ in 0..stopping.max_steps {
        stepper.advance()?;
        let y = stepper.back(0);
        let r = mon.record(sys, stepper.m, y, stepper.matvecs)?;
        if r < best.1 {
            best = (y.clone(), r);
        }
        if target.is_some_and(|t| r <= t) {
            return Ok(Solution { x: y.clone(), residual: r, trace: mon.trace });
        }
    }
    match target {
        None => Ok(Solution {
            x: stepper.back(0).clone(),
            residual: mon.trace.last().map_or(r0, |r| r.residual),
            trace: mon.trace,
        }),
        Some(_) => Err(SolveError::NotConverged(Box::new(Solution { x: best.0, residual: best.1, trace: mon.trace }))),
    }
}
