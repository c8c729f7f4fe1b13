//! Dense lower Cholesky factorization for grid covariance matrices. The
//! matrices here are small (a few thousand rows at most) and symmetric
//! positive definite by construction, so a plain textbook factorization with
//! a clear failure signal beats pulling in a linear-algebra stack.

use crate::real::Real;

/// Factors a symmetric positive-definite `dim × dim` matrix (row-major,
/// full storage, only the lower triangle is read) into its lower Cholesky
/// factor. On failure returns the offending pivot value — a cheap estimate
/// of how far from positive definite the matrix is.
pub(super) fn factor_lower<T: Real>(matrix: &[T], dim: usize) -> Result<Vec<T>, f64> {
    debug_assert_eq!(matrix.len(), dim * dim);
    let mut l = vec![T::zero(); dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut s = matrix[i * dim + j];
            for k in 0..j {
                s -= l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                // `!(s > 0)` also catches NaN pivots.
                if !(s > T::zero()) {
                    return Err(s.to_f64().unwrap_or(f64::NEG_INFINITY));
                }
                l[i * dim + i] = s.sqrt();
            } else {
                l[i * dim + j] = s / l[j * dim + j];
            }
        }
    }
    Ok(l)
}

/// Applies the lower factor to a standard-normal vector: `out = L z`.
pub(super) fn apply_lower<T: Real>(l: &[T], dim: usize, z: &[T], out: &mut [T]) {
    debug_assert_eq!(z.len(), dim);
    debug_assert_eq!(out.len(), dim);
    for i in 0..dim {
        let row = &l[i * dim..i * dim + i + 1];
        let mut acc = T::zero();
        for (lk, zk) in row.iter().zip(z.iter()) {
            acc += *lk * *zk;
        }
        out[i] = acc;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_factors_to_itself() {
        let m = vec![1.0_f64, 0.0, 0.0, 1.0];
        let l = factor_lower(&m, 2).unwrap();
        assert_eq!(l, m);
    }

    #[test]
    fn two_by_two_hand_example() {
        // [[4, 2], [2, 5]] = L Lᵀ with L = [[2, 0], [1, 2]].
        let m = vec![4.0_f64, 2.0, 2.0, 5.0];
        let l = factor_lower(&m, 2).unwrap();
        assert_eq!(l, vec![2.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn indefinite_matrix_reports_failing_pivot() {
        // [[1, 2], [2, 1]] has eigenvalues 3 and −1; the second pivot is
        // 1 − 2² = −3.
        let m = vec![1.0_f64, 2.0, 2.0, 1.0];
        let pivot = factor_lower(&m, 2).unwrap_err();
        assert!((pivot - (-3.0)).abs() < 1e-15);
    }

    #[test]
    fn apply_lower_matches_direct_product() {
        let l = vec![2.0_f64, 0.0, 1.0, 2.0];
        let z = [0.5_f64, -1.0];
        let mut out = [0.0_f64; 2];
        apply_lower(&l, 2, &z, &mut out);
        assert_eq!(out, [1.0, -1.5]);
    }

    #[test]
    fn reconstruction_of_a_random_spd_matrix() {
        // A = B Bᵀ + I for a fixed B is safely positive definite.
        let dim = 5;
        let mut b = vec![0.0_f64; dim * dim];
        let mut state = 1u64;
        for v in b.iter_mut() {
            // Tiny LCG purely to fill deterministic test data.
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            *v = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
        }
        let mut a = vec![0.0_f64; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let mut s = if i == j { 1.0 } else { 0.0 };
                for k in 0..dim {
                    s += b[i * dim + k] * b[j * dim + k];
                }
                a[i * dim + j] = s;
            }
        }
        let l = factor_lower(&a, dim).unwrap();
        for i in 0..dim {
            for j in 0..dim {
                let mut s = 0.0;
                for k in 0..dim {
                    s += l[i * dim + k] * l[j * dim + k];
                }
                assert!((s - a[i * dim + j]).abs() < 1e-12);
            }
        }
    }
}
