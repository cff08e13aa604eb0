//! Ordinary least squares with explicit rank checks.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Columns whose normalized residual after projection on earlier columns is
/// below this are treated as linearly dependent.
const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: DVector<f64>,
    pub residuals: DVector<f64>,
    pub fitted: DVector<f64>,
    pub rss: f64,
    pub tss: f64,
    pub r_squared: f64,
}

impl OlsFit {
    pub fn n_obs(&self) -> usize {
        self.residuals.len()
    }

    pub fn n_params(&self) -> usize {
        self.coefficients.len()
    }

    /// Classical (homoskedastic) standard errors.
    pub fn classical_std_errors(&self, x: &DMatrix<f64>) -> Option<Vec<f64>> {
        let dof = self.n_obs().checked_sub(self.n_params()).filter(|&d| d > 0)? as f64;
        let sigma2 = self.rss / dof;
        let inv = (x.transpose() * x).try_inverse()?;
        Some((0..self.n_params()).map(|j| (sigma2 * inv[(j, j)]).max(0.0).sqrt()).collect())
    }
}

/// Names of columns that are (numerically) linear combinations of earlier
/// columns, each followed by the earlier columns it depends on.
fn collinear_columns(x: &DMatrix<f64>, names: &[String]) -> Vec<String> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut accepted: Vec<usize> = Vec::new();
    let mut offending = Vec::new();
    for j in 0..x.ncols() {
        let col = x.column(j).into_owned();
        let norm = col.norm();
        if norm == 0.0 {
            offending.push(names[j].clone());
            continue;
        }
        let mut r = &col / norm;
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&r);
                r.axpy(-c, q, 1.0);
            }
        }
        let rn = r.norm();
        if rn <= RANK_TOL {
            // which earlier columns take part in the dependence
            let sub = x.select_columns(&accepted);
            let coef = sub.clone().svd(true, true).solve(&col, 1e-12).unwrap_or_else(|_| DVector::zeros(accepted.len()));
            let scale = coef.amax().max(f64::MIN_POSITIVE);
            for (k, &a) in accepted.iter().enumerate() {
                let contribution = (coef[k] * x.column(a).norm()).abs();
                if contribution > 1e-8 * scale.max(norm) && !offending.contains(&names[a]) {
                    offending.push(names[a].clone());
                }
            }
            offending.push(names[j].clone());
        } else {
            basis.push(r / rn);
            accepted.push(j);
        }
    }
    offending
}

/// Least-squares fit of `y` on the columns of `x`.
///
/// Fails with [`Error::CollinearControls`] naming the dependent columns when
/// `x` is rank deficient, and with [`Error::SampleTooSmall`] when there are
/// no residual degrees of freedom.
pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>, names: &[String]) -> Result<OlsFit> {
    let (n, k) = x.shape();
    if y.len() != n {
        return Err(Error::Shape { expected: n, actual: y.len() });
    }
    if names.len() != k {
        return Err(Error::Shape { expected: k, actual: names.len() });
    }
    if n <= k {
        return Err(Error::SampleTooSmall(format!("{n} observations for {k} parameters")));
    }
    let bad = collinear_columns(x, names);
    if !bad.is_empty() {
        return Err(Error::CollinearControls(bad));
    }
    let qr = x.clone().qr();
    let qty = qr.q().transpose() * y;
    let coefficients = qr
        .r()
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::CollinearControls(names.to_vec()))?;
    let fitted = x * &coefficients;
    let residuals = y - &fitted;
    let rss = residuals.norm_squared();
    let mean = y.mean();
    let tss = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    Ok(OlsFit { coefficients, residuals, fitted, rss, tss, r_squared })
}
