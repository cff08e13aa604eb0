//! Maximum-entropy completion of partially observed exposure matrices.
//!
//! Observed cells are pinned at their reported values. The remaining (free)
//! cells start from the product-of-marginals seed and are alternately
//! rescaled by row and by column (RAS) until every row and column total
//! matches its target.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Axis, Error, Result};

/// Marginal constraints plus the cells that are already known.
#[derive(Debug, Clone, PartialEq)]
pub struct ImputationProblem {
    pub n: usize,
    /// Pinned cells `(row, column, value)`.
    pub observed: Vec<(usize, usize, f64)>,
    /// Required row totals `E_i^out`.
    pub row_targets: Vec<f64>,
    /// Required column totals `E_j^in`.
    pub col_targets: Vec<f64>,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Keep the diagonal at zero (no self-exposure). On by default.
    pub zero_diagonal: bool,
}

impl ImputationProblem {
    pub fn new(row_targets: Vec<f64>, col_targets: Vec<f64>) -> Self {
        Self {
            n: row_targets.len(),
            observed: Vec::new(),
            row_targets,
            col_targets,
            tolerance: 1e-8,
            max_iterations: 10_000,
            zero_diagonal: true,
        }
    }

    pub fn with_observed(mut self, observed: Vec<(usize, usize, f64)>) -> Self {
        self.observed = observed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputationResult {
    #[serde(skip)]
    pub matrix: DMatrix<f64>,
    /// Completed row+column sweeps.
    pub iterations: usize,
    pub max_marginal_deviation: f64,
    pub converged: bool,
    /// Deviation before the first sweep and after each sweep.
    pub deviation_history: Vec<f64>,
}

/// Product seed `E_ij = row_i · col_j / total`, diagonal included.
pub fn entropy_closed_form(row_targets: &[f64], col_targets: &[f64]) -> Result<DMatrix<f64>> {
    if row_targets.len() != col_targets.len() {
        return Err(Error::Shape { expected: row_targets.len(), actual: col_targets.len() });
    }
    if row_targets.iter().chain(col_targets).any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidInput("marginal targets must be finite and non-negative".into()));
    }
    let total: f64 = row_targets.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateProblem("total exposure is zero".into()));
    }
    let n = row_targets.len();
    Ok(DMatrix::from_fn(n, n, |i, j| row_targets[i] * col_targets[j] / total))
}

fn relative_gap(achieved: f64, target: f64) -> f64 {
    (achieved - target).abs() / target.abs().max(1.0)
}

fn max_deviation(m: &DMatrix<f64>, rows: &[f64], cols: &[f64]) -> f64 {
    let r = m.row_iter().zip(rows).map(|(row, &t)| relative_gap(row.sum(), t));
    let c = m.column_iter().zip(cols).map(|(col, &t)| relative_gap(col.sum(), t));
    r.chain(c).fold(0.0, f64::max)
}

/// Completes the matrix by RAS on free cells.
///
/// Fails fast with [`Error::Infeasible`] when pinned mass already exceeds a
/// target or a positive remainder has no free cell to go to. If the iteration
/// cap is hit first, the best matrix so far is returned with
/// `converged = false`.
pub fn ras_impute(problem: &ImputationProblem) -> Result<ImputationResult> {
    let n = problem.n;
    let (rows, cols) = (&problem.row_targets, &problem.col_targets);
    if rows.len() != n {
        return Err(Error::Shape { expected: n, actual: rows.len() });
    }
    if cols.len() != n {
        return Err(Error::Shape { expected: n, actual: cols.len() });
    }
    if !(problem.tolerance > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let seed = entropy_closed_form(rows, cols)?;
    let total: f64 = rows.iter().sum();
    let col_total: f64 = cols.iter().sum();
    if relative_gap(total, col_total) > problem.tolerance {
        return Err(Error::DegenerateProblem(format!(
            "row targets sum to {total} but column targets sum to {col_total}"
        )));
    }

    let mut pinned = DMatrix::from_element(n, n, false);
    let mut m = DMatrix::zeros(n, n);
    for &(i, j, v) in &problem.observed {
        if i >= n || j >= n {
            return Err(Error::Index(format!("observed cell ({i}, {j}) outside {n}x{n} matrix")));
        }
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidInput(format!("observed cell ({i}, {j}) = {v} is not non-negative")));
        }
        if problem.zero_diagonal && i == j && v != 0.0 {
            return Err(Error::InvalidInput(format!("observed self exposure at node {i}")));
        }
        if pinned[(i, j)] {
            return Err(Error::InvalidInput(format!("cell ({i}, {j}) observed twice")));
        }
        pinned[(i, j)] = true;
        m[(i, j)] = v;
    }
    let free = |i: usize, j: usize| !pinned[(i, j)] && !(problem.zero_diagonal && i == j);

    // targets for the free cells alone
    let mut adj_rows = vec![0.0; n];
    let mut adj_cols = vec![0.0; n];
    for (axis, targets, adj) in [(Axis::Row, rows, &mut adj_rows), (Axis::Column, cols, &mut adj_cols)] {
        for k in 0..n {
            let line = |t: usize| if axis == Axis::Row { (k, t) } else { (t, k) };
            let pinned_mass: f64 = (0..n).filter(|&t| pinned[line(t)]).map(|t| m[line(t)]).sum();
            let has_free = (0..n).any(|t| {
                let (i, j) = line(t);
                free(i, j)
            });
            let remainder = targets[k] - pinned_mass;
            let slack = problem.tolerance * targets[k].max(1.0);
            if remainder < -slack || (remainder > slack && !has_free) {
                return Err(Error::Infeasible { axis, index: k, required: pinned_mass, target: targets[k] });
            }
            adj[k] = remainder.max(0.0);
        }
    }

    // product seed over the mass left after pinning; with nothing pinned this
    // is the closed form itself
    let free_total: f64 = adj_rows.iter().sum();
    for i in 0..n {
        for j in 0..n {
            if free(i, j) {
                m[(i, j)] = if problem.observed.is_empty() {
                    seed[(i, j)]
                } else if free_total > 0.0 {
                    adj_rows[i] * adj_cols[j] / free_total
                } else {
                    0.0
                };
            }
        }
    }

    let mut deviation = max_deviation(&m, rows, cols);
    let mut history = vec![deviation];
    let mut iterations = 0;
    while deviation > problem.tolerance && iterations < problem.max_iterations {
        for i in 0..n {
            let s: f64 = (0..n).filter(|&j| free(i, j)).map(|j| m[(i, j)]).sum();
            if s > 0.0 {
                let f = adj_rows[i] / s;
                for j in (0..n).filter(|&j| free(i, j)) {
                    m[(i, j)] *= f;
                }
            }
        }
        for j in 0..n {
            let s: f64 = (0..n).filter(|&i| free(i, j)).map(|i| m[(i, j)]).sum();
            if s > 0.0 {
                let f = adj_cols[j] / s;
                for i in (0..n).filter(|&i| free(i, j)) {
                    m[(i, j)] *= f;
                }
            }
        }
        iterations += 1;
        deviation = max_deviation(&m, rows, cols);
        history.push(deviation);
    }

    Ok(ImputationResult {
        matrix: m,
        iterations,
        max_marginal_deviation: deviation,
        converged: deviation <= problem.tolerance,
        deviation_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let s = entropy_closed_form(&[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(s, DMatrix::from_element(2, 2, 0.5));
        let s = entropy_closed_form(&[2.0, 0.0], &[0.0, 2.0]).unwrap();
        assert_eq!(s, DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 0.0, 0.0]));
        let s = entropy_closed_form(&[3.0, 1.0], &[2.0, 2.0]).unwrap();
        assert_eq!(s, DMatrix::from_row_slice(2, 2, &[1.5, 1.5, 0.5, 0.5]));
        assert!(matches!(entropy_closed_form(&[0.0], &[0.0]), Err(Error::DegenerateProblem(_))));
    }

    #[test]
    fn two_by_two_matches_entropy_grid() {
        // with the diagonal free, the only degree of freedom is E_11 = t
        let rows = [3.0, 1.0];
        let cols = [2.0, 2.0];
        let mut p = ImputationProblem::new(rows.to_vec(), cols.to_vec());
        p.zero_diagonal = false;
        let r = ras_impute(&p).unwrap();
        let entropy = |t: f64| {
            [t, 3.0 - t, 2.0 - t, t - 1.0].iter().map(|&e| if e > 0.0 { -e * e.ln() } else { 0.0 }).sum::<f64>()
        };
        let best = (0..=100_000)
            .map(|k| 1.0 + k as f64 * 1e-5)
            .max_by(|a, b| entropy(*a).total_cmp(&entropy(*b)))
            .unwrap();
        assert!((r.matrix[(0, 0)] - best).abs() < 2e-5);
        assert!((r.matrix[(0, 0)] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn zero_diagonal_two_nodes_is_forced() {
        let r = ras_impute(&ImputationProblem::new(vec![2.0, 5.0], vec![5.0, 2.0])).unwrap();
        assert!(r.converged);
        assert_eq!(r.matrix[(0, 0)], 0.0);
        assert!((r.matrix[(0, 1)] - 2.0).abs() < 1e-10);
        assert!((r.matrix[(1, 0)] - 5.0).abs() < 1e-10);
    }

    #[test]
    fn pinning_the_fixed_point_changes_nothing() {
        let rows = vec![4.0, 3.0, 5.0, 2.0];
        let cols = vec![3.0, 5.0, 2.0, 4.0];
        let base = ras_impute(&ImputationProblem::new(rows.clone(), cols.clone())).unwrap();
        let v = base.matrix[(1, 2)];
        let pinned = ras_impute(&ImputationProblem::new(rows, cols).with_observed(vec![(1, 2, v)])).unwrap();
        assert_eq!(pinned.matrix[(1, 2)], v);
        assert!((pinned.matrix.clone() - base.matrix.clone()).amax() < 1e-8);
    }

    #[test]
    fn infeasible_row_is_named() {
        let p = ImputationProblem::new(vec![1.0, 3.0, 2.0], vec![2.0, 2.0, 2.0]).with_observed(vec![(0, 1, 1.5)]);
        match ras_impute(&p) {
            Err(Error::Infeasible { axis: Axis::Row, index: 0, .. }) => {}
            other => panic!("expected row infeasibility, got {other:?}"),
        }
        let p = ImputationProblem::new(vec![3.0, 3.0, 2.0], vec![1.0, 5.0, 2.0]).with_observed(vec![(1, 0, 1.5)]);
        assert!(matches!(ras_impute(&p), Err(Error::Infeasible { axis: Axis::Column, index: 0, .. })));
    }

    #[test]
    fn satisfied_problem_takes_zero_iterations() {
        let p = ImputationProblem::new(vec![1.0, 2.0], vec![2.0, 1.0]).with_observed(vec![(0, 1, 1.0), (1, 0, 2.0)]);
        let r = ras_impute(&p).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(r.converged);
    }

    #[test]
    fn fully_observed_sparse_matrix_is_returned_unchanged() {
        // 3-cycle observed; the three other off-diagonal cells must stay empty
        let obs = vec![(0, 1, 2.0), (1, 2, 3.0), (2, 0, 4.0)];
        let p = ImputationProblem::new(vec![2.0, 3.0, 4.0], vec![4.0, 2.0, 3.0]).with_observed(obs);
        let r = ras_impute(&p).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.matrix, DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 0.0, 0.0, 0.0, 3.0, 4.0, 0.0, 0.0]));
    }

    #[test]
    fn unbalanced_totals_are_rejected() {
        let p = ImputationProblem::new(vec![1.0, 2.0], vec![1.0, 1.0]);
        assert!(matches!(ras_impute(&p), Err(Error::DegenerateProblem(_))));
    }
}
