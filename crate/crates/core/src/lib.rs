//! Convergence-rate toolkit for equidistant Riemann-sum approximations of
//! pathwise integrals `∫₀¹ Ψ'(X_s) dX_s`, where `Ψ` is convex (or of bounded
//! variation) with an atomic second derivative and `X` is a centered Gaussian
//! process of fractional-Brownian type with Hölder index `H ∈ (½, 1)`.
//!
//! Two independent pipelines compute the expected approximation error
//! `E|∫₀¹ Ψ'(X_s) dX_s − Σₖ Ψ'(X_{t_{k−1}})(X_{t_k} − X_{t_{k−1}})|` on the
//! grid `t_k = k/n`:
//!
//! * [`analytic`] evaluates it in closed form from per-step Gaussian
//!   expectations — no sampling, exact up to rounding — together with the
//!   first-order term `σ² Σᵢ wᵢ C(aᵢ) · n^{1−2H}` whose constant comes from
//!   adaptive quadrature of `C(a) = ∫₀¹ V(s)^{−1/2} φ(a/√V(s)) ds`.
//! * [`sampler`] + [`integrator`] + [`experiment`] estimate the same quantity
//!   by Monte Carlo over exactly-sampled paths (Cholesky factorization, or
//!   circulant embedding of fractional Gaussian noise in `O(n log n)`).
//!
//! The two pipelines share nothing beyond the model catalogue in [`models`],
//! so their agreement (within Monte Carlo standard error) is a meaningful
//! cross-check, and both can be compared against the predicted sharp rate
//! `n^{1−2H}` via the log-log fits in [`experiment`].
//!
//! All numerics are generic over the scalar type through [`real::Real`]
//! (implemented for `f32` and `f64`); the `*64` aliases at the crate root
//! fix the default double-precision instantiation.

pub mod analytic;
pub mod convex;
pub mod error;
pub mod experiment;
pub mod integrator;
pub mod models;
pub mod quad;
pub mod real;
pub mod rng;
pub mod sampler;
pub mod sums;
pub mod verify;

pub use error::{Error, Result};

/// Double-precision model catalogue entry.
pub type Model64 = models::CovarianceModel<f64>;
/// Double-precision convex/BV integrand specification.
pub type Spec64 = convex::ConvexSpec<f64>;
/// Double-precision sampled path batch.
pub type PathBatch64 = sampler::PathBatch<f64>;
/// Double-precision per-path error decomposition.
pub type PathError64 = integrator::PathError<f64>;
/// Double-precision per-step expectation record.
pub type StepStats64 = analytic::StepStats<f64>;
/// Double-precision per-`n` error report.
pub type ErrorReport64 = analytic::ErrorReport<f64>;
/// Double-precision Monte Carlo estimate.
pub type McEstimate64 = experiment::McEstimate<f64>;
/// Double-precision log-log rate fit.
pub type RateFit64 = experiment::RateFit<f64>;
/// Double-precision rate study result.
pub type RateStudy64 = experiment::RateStudy<f64>;
