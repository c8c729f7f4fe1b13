//! Deterministic reductions. Monte Carlo means and the per-step analytic
//! sums both use fixed-order pairwise summation, so results do not depend on
//! worker count and carry an `O(log n)` instead of `O(n)` rounding factor.

use crate::real::Real;

/// Below this length a straight left-to-right loop is cheaper than recursion
/// and just as deterministic.
const PAIRWISE_LEAF: usize = 32;

/// Sum of a slice in a fixed bisection order, independent of thread count.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    if xs.len() <= PAIRWISE_LEAF {
        let mut acc = T::zero();
        for &x in xs {
            acc += x;
        }
        acc
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Mean of a non-empty slice via pairwise summation.
pub fn pairwise_mean<T: Real>(xs: &[T]) -> T {
    debug_assert!(!xs.is_empty());
    pairwise_sum(xs) / crate::real::cast_usize(xs.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_sum_on_small_inputs() {
        let xs = [1.0, 2.0, 3.0, 4.5];
        assert_eq!(pairwise_sum(&xs), 10.5);
    }

    #[test]
    fn long_sum_is_more_accurate_than_naive() {
        // 10^6 copies of 0.1: exact value 10^5.
        let xs = vec![0.1f64; 1_000_000];
        let pairwise = pairwise_sum(&xs);
        assert!((pairwise - 1e5).abs() < 1e-7);
    }

    #[test]
    fn split_point_is_stable() {
        // Same input, same result, bit for bit, across calls.
        let xs: Vec<f64> = (0..10_001).map(|i| (i as f64).sin()).collect();
        let a = pairwise_sum(&xs);
        let b = pairwise_sum(&xs);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn mean_of_constant_slice() {
        let xs = vec![2.5f64; 777];
        assert!((pairwise_mean(&xs) - 2.5).abs() < 1e-14);
    }
}
