//! Cyclic Jacobi eigensolver for dense symmetric matrices.
//!
//! Slow (O(n³) per sweep) but simple and independent of the Krylov code,
//! which makes it the reference for checking Lanczos results.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Full eigen-decomposition of a symmetric matrix.
///
/// Returns ascending eigenvalues and orthonormal eigenvectors as columns.
pub fn symmetric_eigen(matrix: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "matrix must be square");
    let mut a = matrix.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = a.norm().max(f64::MIN_POSITIVE);

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::SolverFailure("Jacobi sweeps did not converge".into()));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].total_cmp(&a[(y, y)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    Ok((values, v.select_columns(&order)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_p3_roots() {
        // characteristic polynomial of the P3 Laplacian: x(x-1)(x-3)
        let l = DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]);
        let (vals, vecs) = symmetric_eigen(&l).unwrap();
        for (got, want) in vals.iter().zip([0.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        let recon = &vecs * DMatrix::from_diagonal(&vals.clone().into()) * vecs.transpose();
        assert!((recon - l).norm() < 1e-13);
    }

    #[test]
    fn diagonal_input_is_fixed_point() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -1.0, 2.0]));
        let (vals, _) = symmetric_eigen(&d).unwrap();
        assert_eq!(vals, vec![-1.0, 2.0, 3.0]);
    }
}
