//! Generalized Chebyshev acceleration of stationary iterations
//! `x_m = M x_{m-1} + g`.
//!
//! The `A2` generalized Chebyshev polynomials keep the deltoid invariant the
//! way classical Chebyshev polynomials keep `[-1, 1]`. When the eigenvalue
//! quotients `lambda / lambda1` of `M` fall outside the deltoid, replacing
//! `M` by `M^k` (with right side `(I + M + ... + M^{k-1}) g`) leaves the fixed
//! point unchanged and pulls the quotients in.

pub mod cheb_kernel;
pub mod genmat;
pub mod linalg;
pub mod solvers;
pub mod spectrum;
pub mod textio;
