//! Lanczos iteration with full reorthogonalization and optional deflation.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use super::tridiag::tridiagonal_eigen;
use crate::error::Result;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Which {
    Smallest,
    Largest,
}

#[derive(Debug, Clone)]
pub(crate) struct RitzPair {
    pub value: f64,
    pub vector: DVector<f64>,
    /// All Ritz values of the final tridiagonal matrix, ascending.
    pub ritz_values: Vec<f64>,
    pub steps: usize,
}

#[derive(Debug)]
pub(crate) enum Outcome {
    Converged(RitzPair),
    /// Invariant subspace or step budget reached without meeting tolerance.
    Stalled { steps: usize, residual: f64 },
}

fn project_out(w: &mut DVector<f64>, deflate: Option<&DVector<f64>>, basis: &[DVector<f64>]) {
    if let Some(u) = deflate {
        let c = u.dot(w);
        w.axpy(-c, u, 1.0);
    }
    for q in basis {
        let c = q.dot(w);
        w.axpy(-c, q, 1.0);
    }
}

fn random_start(n: usize, deflate: Option<&DVector<f64>>, rng: &mut Rng) -> DVector<f64> {
    loop {
        let mut v = DVector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(rng)));
        project_out(&mut v, deflate, &[]);
        let norm = v.norm();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}

/// Runs one Lanczos pass on symmetric `op`, restricted to the orthogonal
/// complement of the unit vector `deflate` when given, and returns the
/// extreme Ritz pair once its true residual is at most `tol`.
pub(crate) fn extreme_pair(
    op: &DMatrix<f64>,
    deflate: Option<&DVector<f64>>,
    which: Which,
    tol: f64,
    max_steps: usize,
    scale: f64,
    rng: &mut Rng,
) -> Result<Outcome> {
    let n = op.nrows();
    let dim = if deflate.is_some() { n - 1 } else { n };
    let max_steps = max_steps.min(dim).max(1);
    let breakdown = 1e-12 * scale;

    let mut basis = vec![random_start(n, deflate, rng)];
    let mut alpha = Vec::with_capacity(max_steps);
    let mut beta: Vec<f64> = Vec::with_capacity(max_steps);
    let mut last_residual = f64::INFINITY;

    for j in 0..max_steps {
        let mut w = op * &basis[j];
        let a = basis[j].dot(&w);
        alpha.push(a);
        // two passes of classical Gram-Schmidt keep the basis orthogonal to
        // working precision
        project_out(&mut w, deflate, &basis);
        project_out(&mut w, deflate, &basis);
        let b = w.norm();

        let k = j + 1;
        let exhausted = b <= breakdown || k == max_steps;
        if k <= 24 || k % 4 == 0 || exhausted {
            let (values, vectors) = tridiagonal_eigen(&alpha, &beta)?;
            let idx = match which {
                Which::Smallest => 0,
                Which::Largest => k - 1,
            };
            let estimate = b * vectors[(k - 1, idx)].abs();
            if estimate <= tol || exhausted {
                let mut x = DVector::zeros(n);
                for (i, q) in basis.iter().enumerate().take(k) {
                    x.axpy(vectors[(i, idx)], q, 1.0);
                }
                project_out(&mut x, deflate, &[]);
                x /= x.norm();
                let ox = op * &x;
                let theta = x.dot(&ox);
                let residual = (ox - &x * theta).norm();
                last_residual = residual;
                if residual <= tol {
                    return Ok(Outcome::Converged(RitzPair {
                        value: theta,
                        vector: x,
                        ritz_values: values,
                        steps: k,
                    }));
                }
                if exhausted {
                    return Ok(Outcome::Stalled { steps: k, residual });
                }
            }
        }

        beta.push(b);
        basis.push(w / b);
    }
    Ok(Outcome::Stalled { steps: max_steps, residual: last_residual })
}
