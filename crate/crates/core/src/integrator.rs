//! Pathwise Riemann approximation and its error. For a convex spec the
//! per-step error of the left-endpoint Riemann sum against
//! `Ψ(X_1) − Ψ(X_0)` is a sum of convexity gaps, one per step — each
//! non-negative — so the pathwise error needs no absolute value and is
//! computed in the same atom-sum form the analytic engine takes
//! expectations of.

use crate::convex::ConvexSpec;
use crate::error::{Error, Result};
use crate::real::Real;
use crate::sums::pairwise_sum;

/// Decomposed result of approximating `∫ Ψ'(X) dX` along one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathError<T> {
    /// Left-endpoint Riemann sum `Σ_k Ψ'₋(X_{k-1})(X_k − X_{k-1})`.
    pub riemann: T,
    /// Exact pathwise integral `Ψ(X_1) − Ψ(X_0)`.
    pub exact: T,
    /// `exact − riemann` in telescoped per-step form; non-negative for
    /// convex specs.
    pub error: T,
}

fn require_path<T>(path: &[T]) -> Result<()> {
    if path.len() < 2 {
        return Err(Error::Parameter {
            field: "path",
            message: format!(
                "a path needs at least 2 points (n >= 1 steps), got {}",
                path.len()
            ),
        });
    }
    Ok(())
}

/// Left-endpoint Riemann sum of `Ψ'₋(X)` against the path increments.
pub fn riemann_sum<T: Real>(spec: &ConvexSpec<T>, path: &[T]) -> Result<T> {
    require_path(path)?;
    let terms: Vec<T> = path
        .windows(2)
        .map(|w| spec.psi_prime_left(w[0]) * (w[1] - w[0]))
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Exact integral `Ψ(X_1) − Ψ(X_0)` — the telescoped value the Riemann sum
/// approximates.
pub fn exact_integral<T: Real>(spec: &ConvexSpec<T>, path: &[T]) -> Result<T> {
    require_path(path)?;
    Ok(spec.psi(path[path.len() - 1]) - spec.psi(path[0]))
}

/// Full per-path decomposition. The error is accumulated step by step as
/// convexity gaps rather than formed as one big difference, so a spec with
/// no atoms yields exactly zero and convex specs yield a sum of
/// non-negative terms. Each step's gap is cross-checked against its direct
/// `Ψ`-difference form; disagreement surfaces as an internal error.
pub fn path_error<T: Real>(spec: &ConvexSpec<T>, path: &[T]) -> Result<PathError<T>> {
    require_path(path)?;
    let mut gaps = Vec::with_capacity(path.len() - 1);
    for w in path.windows(2) {
        gaps.push(spec.convexity_gap(w[1], w[0])?);
    }
    Ok(PathError {
        riemann: riemann_sum(spec, path)?,
        exact: exact_integral(spec, path)?,
        error: pairwise_sum(&gaps),
    })
}
