//! Scalar abstraction: everything numeric in this crate is generic over a
//! floating-point type implementing [`Real`].

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar with the operations the error engine needs beyond
/// what `num_traits::Float` offers: the complementary error function and an
/// identity tolerance calibrated to the type's precision.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Complementary error function `erfc(x) = 1 − erf(x)`, accurate to the
    /// type's working precision.
    fn erfc(self) -> Self;

    /// Absolute tolerance for exact algebraic identities at unit scale
    /// (representation equalities, telescoping sums, and the like).
    fn identity_tol() -> Self;
}

impl Real for f64 {
    fn erfc(self) -> Self {
        libm::erfc(self)
    }

    fn identity_tol() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }

    fn identity_tol() -> Self {
        1e-5
    }
}

/// Lossless-in-practice conversion from an `f64` constant into the working
/// scalar type. Panics only if `T` cannot represent any finite `f64` at all,
/// which no `Real` implementation does.
#[inline]
pub fn cast<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("finite f64 constant must convert into a Real scalar")
}

/// Conversion from a grid index, used for `t_k = k/n` arithmetic.
#[inline]
pub fn cast_usize<T: Real>(k: usize) -> T {
    T::from_usize(k).expect("grid index must convert into a Real scalar")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfc_matches_reference_values() {
        // erfc(0) = 1, erfc(1) = 0.15729920705028513 (standard tables).
        assert!((Real::erfc(0.0f64) - 1.0).abs() < 1e-15);
        assert!((Real::erfc(1.0f64) - 0.157_299_207_050_285_13).abs() < 1e-15);
        assert!(Real::erfc(f64::INFINITY).abs() < 1e-300);
        assert!((Real::erfc(f64::NEG_INFINITY) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn erfc_f32_upcast_is_consistent() {
        let narrow = f64::from(Real::erfc(0.7f32));
        assert!((narrow - Real::erfc(0.7f64)).abs() < 1e-6);
    }

    #[test]
    fn cast_round_trips_constants() {
        assert_eq!(cast::<f64>(0.5), 0.5);
        assert_eq!(cast::<f32>(0.5), 0.5f32);
        assert_eq!(cast_usize::<f64>(7), 7.0);
    }
}
