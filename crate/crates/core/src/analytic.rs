//! Closed-form expected discretization error. For a convex piecewise-linear
//! derivative and a Gaussian process with variance `V`, each Riemann step
//! contributes an explicitly computable Gaussian expectation; summing those
//! per-step terms gives the exact mean error at every grid size, with no
//! sampling involved. The module also evaluates the limiting constant that
//! the scaled errors converge to, so the finite-`n` sums can be compared
//! against their asymptote.

use crate::convex::ConvexSpec;
use crate::error::{Error, Result};
use crate::models::{grid_time, CovarianceModel};
use crate::quad;
use crate::real::{cast, Real};
use crate::sums::pairwise_sum;

/// Relative tolerance used for the limiting-constant quadrature.
pub const QUAD_REL_TOL: f64 = 1e-10;

/// Standard normal density. Infinite arguments give 0 through IEEE
/// semantics: `exp(-inf) = 0`.
pub fn phi<T: Real>(x: T) -> T {
    let two = cast::<T>(2.0);
    (-(x * x) / two).exp() / (two * T::PI()).sqrt()
}

/// Standard normal upper tail `P(Z > x)`, evaluated as `erfc(x/√2)/2` so
/// both tails keep full relative accuracy. `tail(inf) = 0`, `tail(-inf) = 1`.
pub fn normal_tail<T: Real>(x: T) -> T {
    let half = cast::<T>(0.5);
    half * (x / cast::<T>(2.0).sqrt()).erfc()
}

/// Per-step ingredients of the expected error at one atom level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats<T> {
    /// Step index, 1-based: the step from `t_{k-1}` to `t_k`.
    pub k: usize,
    /// Process variance at the left endpoint.
    pub v_prev: T,
    /// Process variance at the right endpoint.
    pub v_curr: T,
    /// Regression coefficient of the right endpoint on the left,
    /// `R(t_k, t_{k-1}) / V(t_{k-1})`, taken as 0 when `V(t_{k-1}) = 0`.
    pub gamma: T,
    /// The step's contribution to the expected error at this atom level.
    pub d_k: T,
}

/// Expected one-step gap at level `a` for a step with marginal variances
/// `v_prev`, `v_curr` and regression coefficient `gamma`.
///
/// The degenerate left endpoint (`v_prev = 0`) is handled by an explicit
/// branch: the limiting value replaces `a/√0`, which would otherwise
/// poison the expression with `0 · NaN`.
fn step_gap<T: Real>(v_prev: T, v_curr: T, gamma: T, a: T) -> T {
    let sc = v_curr.sqrt();
    if v_prev == T::zero() {
        if a == T::zero() {
            return sc * phi(T::zero());
        }
        // a/√0 = sign(a)·∞, so the left-endpoint density vanishes and the
        // left tail is an indicator.
        let tail_prev = if a > T::zero() { T::zero() } else { T::one() };
        return sc * phi(a / sc) + a * tail_prev - a * normal_tail(a / sc);
    }
    let sp = v_prev.sqrt();
    sc * phi(a / sc) - gamma * sp * phi(a / sp) + a * (normal_tail(a / sp) - normal_tail(a / sc))
}

/// Computes the step statistics for step `k` of `n` at atom level `a`.
pub fn step_expectation<T: Real>(
    model: &CovarianceModel<T>,
    n: usize,
    k: usize,
    a: T,
) -> Result<StepStats<T>> {
    if n == 0 {
        return Err(Error::Parameter {
            field: "n",
            message: "grid size must be at least 1".into(),
        });
    }
    if k == 0 || k > n {
        return Err(Error::Parameter {
            field: "k",
            message: format!("step index must lie in 1..={n}, got {k}"),
        });
    }
    let t_prev = grid_time::<T>(k - 1, n);
    let t_curr = grid_time::<T>(k, n);
    let v_prev = model.variance(t_prev)?;
    let v_curr = model.variance(t_curr)?;
    let r = model.covariance(t_curr, t_prev)?;
    let gamma = if v_prev == T::zero() { T::zero() } else { r / v_prev };
    Ok(StepStats {
        k,
        v_prev,
        v_curr,
        gamma,
        d_k: step_gap(v_prev, v_curr, gamma, a),
    })
}

/// Grid variances `V(t_k)` for `k = 0..=n` and regression coefficients for
/// each step, shared by the per-atom sweeps.
fn grid_profile<T: Real>(
    model: &CovarianceModel<T>,
    n: usize,
) -> Result<(Vec<T>, Vec<T>)> {
    let mut vs = Vec::with_capacity(n + 1);
    for k in 0..=n {
        vs.push(model.variance(grid_time::<T>(k, n))?);
    }
    let mut gammas = Vec::with_capacity(n);
    for k in 1..=n {
        let v_prev = vs[k - 1];
        if v_prev == T::zero() {
            gammas.push(T::zero());
        } else {
            let r = model.covariance(grid_time::<T>(k, n), grid_time::<T>(k - 1, n))?;
            gammas.push(r / v_prev);
        }
    }
    Ok((vs, gammas))
}

fn atom_step_sums<T: Real>(
    model: &CovarianceModel<T>,
    n: usize,
    atoms: &[(T, T)],
) -> Result<Vec<T>> {
    if n == 0 {
        return Err(Error::Parameter {
            field: "n",
            message: "grid size must be at least 1".into(),
        });
    }
    let (vs, gammas) = grid_profile(model, n)?;
    let mut buf = vec![T::zero(); n];
    let mut sums = Vec::with_capacity(atoms.len());
    for &(a, _) in atoms {
        for k in 1..=n {
            buf[k - 1] = step_gap(vs[k - 1], vs[k], gammas[k - 1], a);
        }
        sums.push(pairwise_sum(&buf));
    }
    Ok(sums)
}

/// Exact expected error of the `n`-step Riemann approximation for a convex
/// spec: twice the weighted sum over atoms of the per-step gap totals.
/// Signed specs have no such identity and are rejected; use
/// [`upper_bound_expected_error`] for those.
pub fn exact_expected_error<T: Real>(
    model: &CovarianceModel<T>,
    n: usize,
    spec: &ConvexSpec<T>,
) -> Result<T> {
    if spec.signed() {
        return Err(Error::Mode {
            required: "convex",
            message: "the exact expected error holds only for convex specs; \
                      signed specs admit only the upper bound"
                .into(),
        });
    }
    let sums = atom_step_sums(model, n, spec.atoms())?;
    let terms: Vec<T> = spec
        .atoms()
        .iter()
        .zip(&sums)
        .map(|(&(_, w), &s)| w * s)
        .collect();
    Ok(cast::<T>(2.0) * pairwise_sum(&terms))
}

/// Upper bound on the expected error valid in both modes: the same sum with
/// every atom weight replaced by its absolute value, so signed cancellations
/// are surrendered in exchange for validity.
pub fn upper_bound_expected_error<T: Real>(
    model: &CovarianceModel<T>,
    n: usize,
    spec: &ConvexSpec<T>,
) -> Result<T> {
    let sums = atom_step_sums(model, n, spec.atoms())?;
    let terms: Vec<T> = spec
        .atoms()
        .iter()
        .zip(&sums)
        .map(|(&(_, w), &s)| w.abs() * s)
        .collect();
    Ok(cast::<T>(2.0) * pairwise_sum(&terms))
}

/// Limiting constant `C(a) = ∫₀¹ V(s)^{-1/2} φ(a/√V(s)) ds` for one atom
/// level, to relative tolerance [`QUAD_REL_TOL`]. Returns the value and the
/// quadrature's achieved absolute error estimate.
///
/// When the variance vanishes at the origin the integrand blows up like
/// `s^{-H}`; the substitution `s = u^{1/(1-H)}` over an initial segment
/// turns that piece into a bounded integrand before the rule sees it.
pub fn leading_constant_detailed<T: Real>(
    model: &CovarianceModel<T>,
    a: T,
) -> Result<(T, T)> {
    let rel_tol = cast::<T>(QUAD_REL_TOL);
    // The quadrature rule only samples the open interval, so the closure
    // never sees a point outside the model's domain; a NaN fallback would
    // surface through the rule's non-finite check if it ever did.
    let integrand = |s: T| -> T {
        let v = model.variance_continuous(s).unwrap_or_else(|_| T::nan());
        let root = v.sqrt();
        phi(a / root) / root
    };
    if !model.starts_at_zero() {
        return quad::integrate(integrand, T::zero(), T::one(), rel_tol);
    }
    // Substitute away the origin singularity on [0, delta]. For table-backed
    // models the continuous variance is only piecewise smooth, so delta is
    // kept no larger than the first breakpoint.
    let h = model.holder_index();
    let delta = model
        .first_grid_time()
        .map_or(cast::<T>(0.1), |t| t.min(cast::<T>(0.1)));
    let power = T::one() / (T::one() - h);
    let substituted = |u: T| -> T {
        let s = u.powf(power);
        power * u.powf(power - T::one()) * integrand(s)
    };
    let (head, head_err) =
        quad::integrate(substituted, T::zero(), delta.powf(T::one() - h), rel_tol)?;
    let (tail, tail_err) = quad::integrate(integrand, delta, T::one(), rel_tol)?;
    Ok((head + tail, head_err + tail_err))
}

/// Limiting constant `C(a)`; see [`leading_constant_detailed`].
pub fn leading_constant<T: Real>(model: &CovarianceModel<T>, a: T) -> Result<T> {
    leading_constant_detailed(model, a).map(|(value, _)| value)
}

/// First-order prediction of the expected error at grid size `n`:
/// `σ² · Σᵢ wᵢ C(aᵢ) · n^{1-2H}`. Convex mode only. For envelope-only
/// models `σ²` is the small-scale limit ratio and the prediction is exact
/// only up to the model's envelope factors.
pub fn theorem_leading_term<T: Real>(
    model: &CovarianceModel<T>,
    n: usize,
    spec: &ConvexSpec<T>,
) -> Result<T> {
    if spec.signed() {
        return Err(Error::Mode {
            required: "convex",
            message: "the leading-term prediction applies to convex specs only".into(),
        });
    }
    if n == 0 {
        return Err(Error::Parameter {
            field: "n",
            message: "grid size must be at least 1".into(),
        });
    }
    let mut acc = Vec::with_capacity(spec.atoms().len());
    for &(a, w) in spec.atoms() {
        acc.push(w * leading_constant(model, a)?);
    }
    let h = model.holder_index();
    let rate = cast::<T>(n as f64).powf(T::one() - cast::<T>(2.0) * h);
    Ok(model.sigma2() * pairwise_sum(&acc) * rate)
}

/// Both sides of the variance–regression identity
/// `√V_c − γ√V_p = −(√V_c − √V_p)²/(2√V_p) + θ/(2√V_p)`,
/// where `θ` is the step variogram and `γ` the regression coefficient
/// implied by `R = (V_c + V_p − θ)/2`. Exact agreement of the returned pair
/// (up to rounding) is a structural check on any covariance model.
pub fn gaussian_relation_check<T: Real>(v_curr: T, v_prev: T, theta: T) -> (T, T) {
    let two = cast::<T>(2.0);
    let r = (v_curr + v_prev - theta) / two;
    let gamma = r / v_prev;
    let sc = v_curr.sqrt();
    let sp = v_prev.sqrt();
    let lhs = sc - gamma * sp;
    let diff = sc - sp;
    let rhs = -(diff * diff) / (two * sp) + theta / (two * sp);
    (lhs, rhs)
}

/// One grid size's worth of rate-study output: the exact expected error,
/// its first-order prediction, and optional Monte Carlo cross-check.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport<T> {
    /// Grid size.
    pub n: usize,
    /// Atom list `(level, weight)` of the integrand the report was built
    /// from.
    pub atoms: Vec<(T, T)>,
    /// Exact expected error from the closed-form sum.
    pub analytic_error: T,
    /// First-order prediction `σ² Σ wᵢ C(aᵢ) n^{1-2H}`.
    pub leading_term: T,
    /// `analytic_error - leading_term`.
    pub remainder: T,
    /// `analytic_error · n^{2H-1}`, the quantity that converges to the
    /// limiting constant.
    pub ratio: T,
    /// Monte Carlo mean of the pathwise error, when requested.
    pub mc_error: Option<T>,
    /// Standard error of the Monte Carlo mean, when requested.
    pub mc_se: Option<T>,
}

/// Builds the analytic half of an [`ErrorReport`] (no Monte Carlo fields).
pub fn error_report<T: Real>(
    model: &CovarianceModel<T>,
    n: usize,
    spec: &ConvexSpec<T>,
) -> Result<ErrorReport<T>> {
    let analytic_error = exact_expected_error(model, n, spec)?;
    let leading_term = theorem_leading_term(model, n, spec)?;
    let h = model.holder_index();
    let ratio = analytic_error * cast::<T>(n as f64).powf(cast::<T>(2.0) * h - T::one());
    Ok(ErrorReport {
        n,
        atoms: spec.atoms().to_vec(),
        analytic_error,
        leading_term,
        remainder: analytic_error - leading_term,
        ratio,
        mc_error: None,
        mc_se: None,
    })
}
