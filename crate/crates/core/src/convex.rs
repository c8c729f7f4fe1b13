//! Integrand specification: a convex (or bounded-variation) function
//! `Ψ(x) = α + βx + Σᵢ wᵢ|x − aᵢ|` together with its left derivative
//! `Ψ'₋(x) = β + Σᵢ wᵢ·sgn₋(x − aᵢ)` and the atomic measure `μ = Ψ'' =
//! Σᵢ wᵢ δ_{aᵢ}`. The measure is kept atomic on purpose: every integrand the
//! rate theory is exercised on here (indicators, distances, piecewise-linear
//! payoffs) lives in this class, and level quadrature would add nothing.

use crate::error::{Error, Result};
use crate::real::{cast, Real};

/// `Ψ` as a linear part plus finitely many weighted kinks.
///
/// In convex mode (`signed = false`) all weights are non-negative and atoms
/// at exactly equal levels are merged at construction, so levels end up
/// strictly increasing. In signed (bounded-variation) mode weights may be
/// negative and duplicate levels are kept as given (sorted, but not merged):
/// the total-variation bound `2 Σᵢ |wᵢ| Σₖ Dₖ(aᵢ)` is defined on the atom
/// list as written, and merging cancelling atoms would silently change it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSpec<T> {
    alpha: T,
    beta: T,
    atoms: Vec<(T, T)>,
    signed: bool,
}

impl<T: Real> ConvexSpec<T> {
    /// Builds a spec from a linear part and `(level, weight)` atoms.
    pub fn new(alpha: T, beta: T, atoms: Vec<(T, T)>, signed: bool) -> Result<Self> {
        for &(a, w) in &atoms {
            if !a.is_finite() {
                return Err(Error::Parameter {
                    field: "atoms",
                    message: format!("atom level must be finite, got {a}"),
                });
            }
            if !w.is_finite() {
                return Err(Error::Parameter {
                    field: "atoms",
                    message: format!("atom weight must be finite, got {w}"),
                });
            }
            if !signed && w < T::zero() {
                return Err(Error::Parameter {
                    field: "atoms",
                    message: format!(
                        "convex mode requires non-negative weights, got {w} at level {a}"
                    ),
                });
            }
        }
        let mut atoms = atoms;
        atoms.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite levels are ordered"));
        if !signed {
            // Merge exact duplicates; non-negative weights keep the sum valid.
            let mut merged: Vec<(T, T)> = Vec::with_capacity(atoms.len());
            for (a, w) in atoms {
                match merged.last_mut() {
                    Some(last) if last.0 == a => last.1 += w,
                    _ => merged.push((a, w)),
                }
            }
            atoms = merged;
        }
        Ok(Self { alpha, beta, atoms, signed })
    }

    /// The positive part `Ψ(x) = (x)⁺ = ½x + ½|x|`, whose derivative is the
    /// strict indicator `1_{x>0}` under the left-derivative convention.
    pub fn positive_part() -> Self {
        Self::new(T::zero(), cast(0.5), vec![(T::zero(), cast(0.5))], false)
            .expect("positive part is a valid convex spec")
    }

    /// The distance `Ψ(x) = |x − a|` to a single level.
    pub fn absolute_deviation(a: T) -> Self {
        Self::new(T::zero(), T::zero(), vec![(a, T::one())], false)
            .expect("absolute deviation is a valid convex spec")
    }

    /// A purely linear `Ψ(x) = α + βx` (no kinks, hence no error).
    pub fn linear(alpha: T, beta: T) -> Self {
        Self::new(alpha, beta, Vec::new(), false).expect("linear spec is valid")
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn atoms(&self) -> &[(T, T)] {
        &self.atoms
    }

    pub fn signed(&self) -> bool {
        self.signed
    }

    /// `Σᵢ |wᵢ| φ(aᵢ)` — finite by construction for finitely many atoms.
    pub fn total_phi_mass(&self) -> T {
        self.atoms
            .iter()
            .fold(T::zero(), |acc, &(a, w)| acc + w.abs() * crate::analytic::phi(a))
    }

    /// `Ψ(x) = α + βx + Σᵢ wᵢ|x − aᵢ|`.
    pub fn psi(&self, x: T) -> T {
        let mut v = self.alpha + self.beta * x;
        for &(a, w) in &self.atoms {
            v += w * (x - a).abs();
        }
        v
    }

    /// Left derivative `Ψ'₋(x) = β + Σᵢ wᵢ·sgn₋(x − aᵢ)` with
    /// `sgn₋(u) = 1` for `u > 0` and `−1` otherwise (left-continuous at the
    /// kinks, so the induced indicator for `(x−a)⁺` is strictly `1_{x>a}`).
    pub fn psi_prime_left(&self, x: T) -> T {
        let mut v = self.beta;
        for &(a, w) in &self.atoms {
            v += if x > a { w } else { -w };
        }
        v
    }

    /// Convexity gap `Ψ(x) − Ψ(y) − Ψ'₋(y)(x − y)`, evaluated both directly
    /// and through the atom-sum representation
    /// `2 Σᵢ wᵢ [(x−aᵢ)⁺ − (y−aᵢ)⁺ − 1_{y>aᵢ}(x−y)]`.
    ///
    /// Returns the atom-sum form after checking the two agree to the scalar
    /// type's identity tolerance (scaled by the magnitudes involved); a
    /// mismatch is an internal error, not bad input. Non-negative in convex
    /// mode.
    pub fn convexity_gap(&self, x: T, y: T) -> Result<T> {
        let direct = self.psi(x) - self.psi(y) - self.psi_prime_left(y) * (x - y);
        let mut atom_sum = T::zero();
        for &(a, w) in &self.atoms {
            let pos = |u: T| if u > T::zero() { u } else { T::zero() };
            let indicator = if y > a { x - y } else { T::zero() };
            atom_sum += w * (pos(x - a) - pos(y - a) - indicator);
        }
        atom_sum = atom_sum + atom_sum;

        let mut scale = T::one() + self.alpha.abs() + (T::one() + self.beta.abs()) * (x.abs() + y.abs());
        for &(a, w) in &self.atoms {
            scale += w.abs() * (x.abs() + y.abs() + a.abs() + a.abs());
        }
        let tol = T::identity_tol() * scale;
        if (direct - atom_sum).abs() > tol {
            return Err(Error::Internal(format!(
                "convexity gap representations disagree: direct {direct} vs atom sum {atom_sum} \
                 (tolerance {tol})"
            )));
        }
        Ok(atom_sum)
    }
}
