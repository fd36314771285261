//! Generalized Chebyshev polynomials of the `A2` root system, classical
//! Chebyshev ratios, and the deltoid region they leave invariant.
//!
//! The first component `f_m` of the `A2` polynomial map obeys
//!
//! ```text
//! f_0 = 1,  f_1 = x,  f_2 = 3x^2 - 2conj(x)
//! f_m = 3x f_{m-1} - 3conj(x) f_{m-2} + f_{m-3}      (m >= 3)
//! ```
//!
//! and satisfies `f_m(phi1(theta)) = phi1(m theta)`. Solvers only ever need
//! ratios of consecutive values at `w = 1/lambda1`, where the raw values grow
//! geometrically, so [`ChebCoefficientStream`] keeps a rescaled three-value
//! window instead of the values themselves.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

/// Default absolute slack on the membership quartic.
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("dominant eigenvalue must satisfy 0 < |lambda1| < 1, got {0}")]
    InvalidLambda1(Complex64),
    #[error("spectral radius must satisfy 0 < rho < 1, got {0}")]
    InvalidRho(f64),
    #[error("f_{m}(1/lambda1) vanished after renormalization; lambda1 sits on a polynomial root")]
    DegenerateCoefficient { m: usize },
}

/// A point `theta = (theta1, theta2)` of the generalized cosine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenCosPoint {
    pub theta1: f64,
    pub theta2: f64,
}

impl GenCosPoint {
    pub fn new(theta1: f64, theta2: f64) -> Self {
        Self { theta1, theta2 }
    }

    pub fn value(&self) -> Complex64 {
        phi1(self.theta1, self.theta2)
    }

    /// The second component, `conj(phi1)` for real angles.
    pub fn value_conj(&self) -> Complex64 {
        self.value().conj()
    }

    pub fn scaled(&self, m: f64) -> Self {
        Self::new(m * self.theta1, m * self.theta2)
    }
}

/// Normalized generalized cosine
/// `(e^{2 pi i t1} + e^{-2 pi i t2} + e^{2 pi i (t2 - t1)}) / 3`.
pub fn phi1(theta1: f64, theta2: f64) -> Complex64 {
    let e = |t: f64| Complex64::from_polar(1.0, 2.0 * PI * t);
    (e(theta1) + e(-theta2) + e(theta2 - theta1)) / 3.0
}

/// Evaluates `f_m(x, conj(x))` by the three-term recurrence.
///
/// Values grow like `|x|^m` outside the deltoid; use
/// [`ChebCoefficientStream`] when only ratios are needed.
pub fn eval_f(m: usize, x: Complex64) -> Complex64 {
    let xc = x.conj();
    let seeds = [Complex64::new(1.0, 0.0), x, 3.0 * x * x - 2.0 * xc];
    if m < 3 {
        return seeds[m];
    }
    let [mut a, mut b, mut c] = seeds;
    for _ in 3..=m {
        let next = 3.0 * x * c - 3.0 * xc * b + a;
        a = b;
        b = c;
        c = next;
    }
    c
}

/// Roots of `t^3 - 3z t^2 + 3conj(z) t - 1`, the characteristic polynomial
/// of the `f_m` recurrence at `z`.
///
/// For real `z` the root `t = 1` is factored out exactly and the remaining
/// reciprocal pair comes from `t^2 + (1 - 3z) t + 1`. This keeps the triple
/// root at `z = 1` (the cusp) resolved to rounding of `z` itself instead of
/// the cube root of machine epsilon that a generic cubic solve would give.
/// Complex `z` goes through a companion-matrix eigenvalue solve.
pub fn characteristic_roots(z: Complex64) -> Option<[Complex64; 3]> {
    if z.im == 0.0 {
        let x = z.re;
        let one = Complex64::new(1.0, 0.0);
        // (3x - 1)^2 - 4 = 9 (x - 1)(x + 1/3), written to avoid cancellation
        let disc = 9.0 * (x - 1.0) * (x + 1.0 / 3.0);
        let half_b = (3.0 * x - 1.0) / 2.0;
        let (r1, r2) = if disc <= 0.0 {
            let s = (-disc).sqrt() / 2.0;
            (Complex64::new(half_b, s), Complex64::new(half_b, -s))
        } else {
            let s = disc.sqrt() / 2.0;
            let big = if half_b >= 0.0 { half_b + s } else { half_b - s };
            // product of the pair is exactly one
            (Complex64::new(big, 0.0), Complex64::new(1.0 / big, 0.0))
        };
        return Some([one, r1, r2]);
    }
    crate::linalg::dense::cubic_roots_monic(-3.0 * z, 3.0 * z.conj(), Complex64::new(-1.0, 0.0))
}

/// The three weights of one generalized Chebyshev step:
/// `y_m = c1 (M y_{m-1} + g) - c2 (M~ y_{m-2} + g~) + c3 y_{m-3}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientTriple {
    pub c1: Complex64,
    pub c2: Complex64,
    pub c3: Complex64,
}

impl CoefficientTriple {
    /// `c1 - c2 + c3`, which equals one for every step.
    pub fn weight_sum(&self) -> Complex64 {
        self.c1 - self.c2 + self.c3
    }
}

/// Weights `(d1, d2)` with `y_2 = d1 (M y_1 + g) - d2 (M~ y_0 + g~)` so that
/// the error after the second step is exactly `p_2(M) eps_0`.
///
/// `d1 = 3w^2 / f_2(w)`, `d2 = 2conj(w) / f_2(w)`, `w = 1/lambda1`; they
/// satisfy `d1 - d2 = 1`.
pub fn second_step_weights(lambda1: Complex64) -> Result<(Complex64, Complex64), KernelError> {
    check_lambda1(lambda1)?;
    let w = lambda1.inv();
    let f2 = 3.0 * w * w - 2.0 * w.conj();
    if f2.norm() == 0.0 || !f2.is_finite() {
        return Err(KernelError::DegenerateCoefficient { m: 2 });
    }
    Ok((3.0 * w * w / f2, 2.0 * w.conj() / f2))
}

fn check_lambda1(lambda1: Complex64) -> Result<(), KernelError> {
    let r = lambda1.norm();
    if !(r > 0.0 && r < 1.0) || !lambda1.is_finite() {
        return Err(KernelError::InvalidLambda1(lambda1));
    }
    Ok(())
}

/// Stateful producer of the step weights for `m = 3, 4, ...`.
///
/// The window holds values proportional to `(f_{m-3}, f_{m-2}, f_{m-1})` at
/// `w = 1/lambda1`; after each step it is divided by its largest magnitude
/// and the logarithm of the divisor is accumulated in `scale_exponent`.
#[derive(Debug, Clone)]
pub struct ChebCoefficientStream {
    lambda1: Complex64,
    w: Complex64,
    window: [Complex64; 3],
    scale_exponent: f64,
    m: usize,
}

impl ChebCoefficientStream {
    pub fn new(lambda1: Complex64) -> Result<Self, KernelError> {
        check_lambda1(lambda1)?;
        let w = lambda1.inv();
        let mut stream = Self {
            lambda1,
            w,
            window: [Complex64::new(1.0, 0.0), w, 3.0 * w * w - 2.0 * w.conj()],
            scale_exponent: 0.0,
            m: 3,
        };
        stream.renormalize();
        Ok(stream)
    }

    pub fn lambda1(&self) -> Complex64 {
        self.lambda1
    }

    /// Index `m` of the triple the next call to [`step`](Self::step) emits.
    pub fn next_index(&self) -> usize {
        self.m
    }

    /// `ln |f_{m-1}(w)|` for the most recent window entry.
    pub fn log_magnitude(&self) -> f64 {
        self.scale_exponent + self.window[2].norm().ln()
    }

    /// Copy of the stream with the window multiplied by `factor`.
    pub fn with_window_scaled(&self, factor: f64) -> Self {
        let mut s = self.clone();
        for v in &mut s.window {
            *v *= factor;
        }
        s.scale_exponent -= factor.ln();
        s
    }

    pub fn step(&mut self) -> Result<CoefficientTriple, KernelError> {
        let [a, b, c] = self.window;
        let next = 3.0 * self.w * c - 3.0 * self.w.conj() * b + a;
        let mag = next.norm();
        if mag.is_nan() || mag < f64::MIN_POSITIVE || !next.is_finite() {
            return Err(KernelError::DegenerateCoefficient { m: self.m });
        }
        let triple = CoefficientTriple {
            c1: 3.0 * c / (self.lambda1 * next),
            c2: 3.0 * b / (self.lambda1.conj() * next),
            c3: a / next,
        };
        self.window = [b, c, next];
        self.renormalize();
        self.m += 1;
        Ok(triple)
    }

    fn renormalize(&mut self) {
        let max = self.window.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if max > 0.0 && max.is_finite() {
            for v in &mut self.window {
                *v /= max;
            }
            self.scale_exponent += max.ln();
        }
    }
}

/// Classical Chebyshev step weights
/// `(2 C_{m-1}(1/rho) / (rho C_m(1/rho)), C_{m-2}(1/rho) / C_m(1/rho))`
/// for `m = 2, 3, ...`.
#[derive(Debug, Clone)]
pub struct ClassicalRatioStream {
    rho: f64,
    t: f64,
    window: [f64; 2],
    m: usize,
}

impl ClassicalRatioStream {
    pub fn new(rho: f64) -> Result<Self, KernelError> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(KernelError::InvalidRho(rho));
        }
        let t = 1.0 / rho;
        Ok(Self { rho, t, window: [1.0, t], m: 2 })
    }

    pub fn next_index(&self) -> usize {
        self.m
    }

    pub fn step(&mut self) -> (f64, f64) {
        let [a, b] = self.window;
        let next = 2.0 * self.t * b - a;
        let pair = (2.0 * b / (self.rho * next), a / next);
        // C_m(t) >= 1 for t > 1, so the window never vanishes
        let max = b.abs().max(next.abs());
        self.window = [b / max, next / max];
        self.m += 1;
        pair
    }
}

/// Membership quartic `3|z|^4 + 6|z|^2 - 8 Re(z^3) - 1`; nonpositive exactly
/// on the closed deltoid.
pub fn deltoid_h(z: Complex64) -> f64 {
    let r2 = z.norm_sqr();
    3.0 * r2 * r2 + 6.0 * r2 - 8.0 * (z * z * z).re - 1.0
}

pub fn deltoid_contains(z: Complex64, tol: f64) -> bool {
    deltoid_h(z) <= tol
}

/// `true` iff `z^k` lies in the deltoid.
pub fn power_preimage_contains(z: Complex64, k: u32, tol: f64) -> bool {
    deltoid_contains(z.powu(k), tol)
}

/// Boundary curve `(2e^{it} + e^{-2it}) / 3` of the deltoid.
pub fn deltoid_boundary(t: f64) -> Complex64 {
    (2.0 * Complex64::from_polar(1.0, t) + Complex64::from_polar(1.0, -2.0 * t)) / 3.0
}
