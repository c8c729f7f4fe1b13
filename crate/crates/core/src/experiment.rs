//! Rate studies: sweep grid sizes, run the analytic and Monte Carlo
//! pipelines side by side, fit the log-log slope, and report the limiting
//! constant (as a point value, or as a two-sided band for the models whose
//! variogram is only enveloped by a power law).

use rayon::prelude::*;

use crate::analytic::{self, ErrorReport};
use crate::convex::ConvexSpec;
use crate::error::{Error, Result};
use crate::integrator;
use crate::models::CovarianceModel;
use crate::real::{cast, Real};
use crate::rng;
use crate::sampler::{self, PreparedSampler, SamplerKind};
use crate::sums::{pairwise_mean, pairwise_sum};

/// Paths per work unit in the Monte Carlo loop; path results land in
/// per-index slots, so the value only affects scheduling, never output.
const MC_CHUNK: usize = 64;

/// Monte Carlo estimate of the expected pathwise error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate<T> {
    /// Sample mean of the per-path absolute error.
    pub mean: T,
    /// Standard error of the mean (sample standard deviation over `√m`).
    pub se: T,
    /// Number of replications.
    pub m: usize,
    /// Seed the estimate was drawn with.
    pub seed: u64,
}

/// Estimates `E|path error|` over `m` independent paths. Backend choice is
/// automatic: circulant embedding for plain fBm, dense factor otherwise.
pub fn mc_expected_error<T: Real>(
    model: &CovarianceModel<T>,
    n: usize,
    spec: &ConvexSpec<T>,
    m: usize,
    seed: u64,
) -> Result<McEstimate<T>> {
    let kind = if model.fbm_hurst().is_some() {
        SamplerKind::Circulant
    } else {
        SamplerKind::Cholesky
    };
    let prep = sampler::prepare(model, n, kind)?;
    mc_expected_error_with(&prep, spec, m, seed)
}

/// Same as [`mc_expected_error`] but against an already prepared sampler,
/// so a cached factorization can be reused across calls.
pub fn mc_expected_error_with<T: Real>(
    prep: &PreparedSampler<T>,
    spec: &ConvexSpec<T>,
    m: usize,
    seed: u64,
) -> Result<McEstimate<T>> {
    if m < 2 {
        return Err(Error::Parameter {
            field: "m",
            message: format!("standard errors need at least 2 replications, got {m}"),
        });
    }
    let width = prep.n() + 1;
    let mut errors = vec![T::zero(); m];
    errors
        .par_chunks_mut(MC_CHUNK)
        .enumerate()
        .try_for_each_init(
            || (prep.scratch(), vec![T::zero(); width]),
            |(scratch, path), (chunk_index, chunk)| -> Result<()> {
                for (offset, slot) in chunk.iter_mut().enumerate() {
                    let index = (chunk_index * MC_CHUNK + offset) as u64;
                    prep.write_path(seed, index, path, scratch);
                    *slot = integrator::path_error(spec, path)?.error.abs();
                }
                Ok(())
            },
        )?;
    let mean = pairwise_mean(&errors);
    let deviations: Vec<T> = errors.iter().map(|&e| (e - mean) * (e - mean)).collect();
    let variance = pairwise_sum(&deviations) / cast::<T>((m - 1) as f64);
    Ok(McEstimate {
        mean,
        se: (variance / cast::<T>(m as f64)).sqrt(),
        m,
        seed,
    })
}

/// Ordinary least squares on `(log n, log e_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
    /// The fitted points `(log n, log e_n)`.
    pub points: Vec<(T, T)>,
}

/// Fits a power law `e_n ≈ exp(intercept) · n^{slope}` by least squares in
/// log-log coordinates. Needs at least 3 points and strictly positive
/// errors.
pub fn fit_log_log<T: Real>(ns: &[usize], errors: &[T]) -> Result<RateFit<T>> {
    if ns.len() != errors.len() || ns.len() < 3 {
        return Err(Error::Fit { points: ns.len().min(errors.len()) });
    }
    let mut points = Vec::with_capacity(ns.len());
    for (&n, &e) in ns.iter().zip(errors) {
        if !(e > T::zero()) || !e.is_finite() {
            return Err(Error::Numerical {
                context: "rate fit",
                message: format!("log-log fit needs positive finite errors, got {e} at n = {n}"),
            });
        }
        points.push((cast::<T>(n as f64).ln(), e.ln()));
    }
    let count = cast::<T>(points.len() as f64);
    let x_mean = points.iter().fold(T::zero(), |acc, p| acc + p.0) / count;
    let y_mean = points.iter().fold(T::zero(), |acc, p| acc + p.1) / count;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for &(x, y) in &points {
        sxx += (x - x_mean) * (x - x_mean);
        sxy += (x - x_mean) * (y - y_mean);
    }
    if sxx == T::zero() {
        return Err(Error::Numerical {
            context: "rate fit",
            message: "grid sizes must not all coincide".into(),
        });
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let mut ss_res = T::zero();
    let mut ss_tot = T::zero();
    for &(x, y) in &points {
        let fitted = intercept + slope * x;
        ss_res += (y - fitted) * (y - fitted);
        ss_tot += (y - y_mean) * (y - y_mean);
    }
    let r_squared = if ss_tot == T::zero() {
        T::one()
    } else {
        T::one() - ss_res / ss_tot
    };
    Ok(RateFit { slope, intercept, r_squared, points })
}

/// Two-sided prediction band for models whose variogram only envelopes a
/// power law: the limiting ratio is bracketed rather than pinned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeBand<T> {
    /// Smallest observed variogram-to-power ratio `σ₋²`.
    pub sigma_minus2: T,
    /// Largest observed ratio `σ₊²`.
    pub sigma_plus2: T,
    /// `σ₋² · Σ wᵢ C(aᵢ) · 0.8` — band floor including finite-`n` slack.
    pub lower: T,
    /// `σ₊² · Σ wᵢ C(aᵢ) · 1.2` — band ceiling including finite-`n` slack.
    pub upper: T,
}

/// Everything a grid-size sweep produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RateStudy<T> {
    /// One report per requested grid size, in order.
    pub reports: Vec<ErrorReport<T>>,
    /// Log-log fit over the analytic errors.
    pub fit: RateFit<T>,
    /// `1 − 2H` for the model's rate index `H`.
    pub expected_slope: T,
    /// Limit of the scaled errors, `σ² Σ wᵢ C(aᵢ)`.
    pub constant: T,
    /// Present for envelope-only models: the band that replaces the exact
    /// constant.
    pub envelope: Option<EnvelopeBand<T>>,
}

fn check_increasing(n_list: &[usize]) -> Result<()> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter {
            field: "n_list",
            message: "grid sizes must be strictly increasing".into(),
        });
    }
    Ok(())
}

/// Finest grid at which to measure the envelope constants: the full pair
/// sweep is quadratic, so it is capped, and table-backed models additionally
/// need a divisor of their stored grid.
fn envelope_grid<T: Real>(model: &CovarianceModel<T>, n_max: usize) -> Option<usize> {
    let cap = n_max.min(1024);
    (2..=cap).rev().find(|&d| model.grid_stride(d).is_ok())
}

/// Sweeps `n_list`, producing per-`n` reports (analytic always, Monte Carlo
/// when `mc = Some((m, seed))`), the log-log fit, and the limiting constant
/// or envelope band.
pub fn rate_study<T: Real>(
    model: &CovarianceModel<T>,
    spec: &ConvexSpec<T>,
    n_list: &[usize],
    mc: Option<(usize, u64)>,
) -> Result<RateStudy<T>> {
    check_increasing(n_list)?;
    if n_list.len() < 3 {
        return Err(Error::Fit { points: n_list.len() });
    }
    let reports: Vec<ErrorReport<T>> = n_list
        .par_iter()
        .map(|&n| -> Result<ErrorReport<T>> {
            let mut report = analytic::error_report(model, n, spec)?;
            if let Some((m, seed)) = mc {
                // Each grid size gets its own decorrelated stream family.
                let estimate =
                    mc_expected_error(model, n, spec, m, rng::derive_seed(seed, n as u64))?;
                report.mc_error = Some(estimate.mean);
                report.mc_se = Some(estimate.se);
            }
            Ok(report)
        })
        .collect::<Result<_>>()?;

    let errors: Vec<T> = reports.iter().map(|r| r.analytic_error).collect();
    let fit = fit_log_log(n_list, &errors)?;

    let mut constant_terms = Vec::with_capacity(spec.atoms().len());
    for &(a, w) in spec.atoms() {
        constant_terms.push(w * analytic::leading_constant(model, a)?);
    }
    let weighted_constant = pairwise_sum(&constant_terms);

    let envelope = if model.is_envelope_only() {
        let n_max = *n_list.last().expect("n_list verified non-empty");
        match envelope_grid(model, n_max) {
            Some(grid) => {
                let (lo, hi) = model.variogram_bounds(grid)?;
                Some(EnvelopeBand {
                    sigma_minus2: lo,
                    sigma_plus2: hi,
                    lower: lo * weighted_constant * cast::<T>(0.8),
                    upper: hi * weighted_constant * cast::<T>(1.2),
                })
            }
            None => None,
        }
    } else {
        None
    };

    Ok(RateStudy {
        reports,
        fit,
        expected_slope: T::one() - cast::<T>(2.0) * model.holder_index(),
        constant: model.sigma2() * weighted_constant,
        envelope,
    })
}

/// The scaled errors `exact_expected_error(n) · n^{2H−1}` along `n_list` —
/// the sequence that converges to the limiting constant (or into the
/// envelope band).
pub fn ratio_convergence<T: Real>(
    model: &CovarianceModel<T>,
    spec: &ConvexSpec<T>,
    n_list: &[usize],
) -> Result<Vec<(usize, T)>> {
    check_increasing(n_list)?;
    if n_list.is_empty() {
        return Err(Error::Parameter {
            field: "n_list",
            message: "need at least one grid size".into(),
        });
    }
    let exponent = cast::<T>(2.0) * model.holder_index() - T::one();
    n_list
        .par_iter()
        .map(|&n| -> Result<(usize, T)> {
            let e = analytic::exact_expected_error(model, n, spec)?;
            Ok((n, e * cast::<T>(n as f64).powf(exponent)))
        })
        .collect()
}
