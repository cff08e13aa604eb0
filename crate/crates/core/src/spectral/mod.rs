//! Algebraic connectivity and the Fiedler vector.
//!
//! [`lambda2_lanczos`] is the production path: Lanczos iteration on the
//! Laplacian restricted to the complement of the all-ones vector, so the
//! second-smallest Laplacian eigenvalue becomes the smallest eigenvalue of
//! the restricted operator. [`lambda2_dense`] computes the full spectrum by
//! Jacobi rotations and serves as the reference.

mod jacobi;
mod lanczos;
mod tridiag;

pub use jacobi::symmetric_eigen;
pub use tridiag::tridiagonal_eigen;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::rng;
use lanczos::{extreme_pair, Outcome, Which};

/// Largest graph accepted by the dense reference solver.
pub const DENSE_LIMIT: usize = 2000;

const MAX_RESTARTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lanczos,
    Dense,
}

/// Low end of a Laplacian spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub node_ids: Vec<String>,
    pub lambda2: f64,
    /// Unit eigenvector for `lambda2`, orthogonal to the all-ones vector,
    /// signed so that its first non-negligible entry is positive.
    pub fiedler: Vec<f64>,
    /// Smallest eigenvalues, ascending. Entries past `lambda2` are Ritz
    /// estimates when computed by Lanczos.
    pub eigenvalues_low: Vec<f64>,
    pub iterations: usize,
    pub restarts: usize,
    /// `‖L v − λ₂ v‖₂`
    pub residual: f64,
    pub method: Method,
    pub disconnected: bool,
}

impl SpectrumResult {
    /// Squared Fiedler components `v²₂,ᵢ`.
    pub fn centrality(&self) -> Vec<f64> {
        self.fiedler.iter().map(|v| v * v).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Residual tolerance relative to `max(1, ‖L‖₁)`.
    pub tol: f64,
    /// Iteration cap; defaults to `5 n`.
    pub max_iter: Option<usize>,
    /// Number of low eigenvalues to report.
    pub k_low: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: None, k_low: 6, seed: 0x5EED_F1ED }
    }
}

fn ones_unit(n: usize) -> DVector<f64> {
    DVector::from_element(n, 1.0 / (n as f64).sqrt())
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.abs().sum()).fold(0.0, f64::max)
}

/// Flips `v` so its first entry above `1e-8 · max|v|` is positive.
pub(crate) fn canonical_sign(v: &mut DVector<f64>) {
    let cutoff = 1e-8 * v.amax();
    if let Some(first) = v.iter().copied().find(|x| x.abs() > cutoff) {
        if first < 0.0 {
            v.neg_mut();
        }
    }
}

/// Zero-eigenvalue vector for a disconnected graph: the centered indicator of
/// the component containing node 0.
fn disconnected_result(g: &WeightedGraph, components: &[Vec<usize>], k_low: usize, method: Method) -> SpectrumResult {
    let n = g.n();
    let first = &components[0];
    let share = first.len() as f64 / n as f64;
    let mut v = DVector::from_element(n, -share);
    for &i in first {
        v[i] += 1.0;
    }
    v /= v.norm();
    let residual = (g.laplacian() * &v).norm();
    SpectrumResult {
        node_ids: g.node_ids().to_vec(),
        lambda2: 0.0,
        fiedler: v.iter().copied().collect(),
        eigenvalues_low: vec![0.0; components.len().min(k_low.max(2))],
        iterations: 0,
        restarts: 0,
        residual,
        method,
        disconnected: true,
    }
}

/// λ₂ and Fiedler vector by deflated Lanczos iteration.
///
/// A disconnected graph yields `λ₂ = 0` with `disconnected` set. If the
/// iteration breaks down or stalls it restarts from a fresh random vector,
/// at most three times.
pub fn lambda2_lanczos(g: &WeightedGraph, opts: &LanczosOptions) -> Result<SpectrumResult> {
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidInput("spectrum needs at least two nodes".into()));
    }
    let components = g.components();
    if components.len() > 1 {
        return Ok(disconnected_result(g, &components, opts.k_low, Method::Lanczos));
    }

    let l = g.laplacian();
    let scale = norm1(l).max(1.0);
    let tol = opts.tol * scale;
    let ones = ones_unit(n);
    let max_steps = opts.max_iter.unwrap_or(5 * n);
    let mut rng = rng::rng_from_seed(opts.seed);

    let mut iterations = 0;
    let mut last_residual = f64::NAN;
    for restart in 0..=MAX_RESTARTS {
        match extreme_pair(l, Some(&ones), Which::Smallest, tol, max_steps, scale, &mut rng)? {
            Outcome::Converged(pair) => {
                iterations += pair.steps;
                let mut v = pair.vector;
                canonical_sign(&mut v);
                let lv = l * &v;
                let lambda2 = v.dot(&lv);
                let residual = (lv - &v * lambda2).norm();
                let mut low = vec![0.0];
                low.extend(pair.ritz_values.iter().take(opts.k_low.saturating_sub(1)));
                low[1] = lambda2;
                return Ok(SpectrumResult {
                    node_ids: g.node_ids().to_vec(),
                    lambda2,
                    fiedler: v.iter().copied().collect(),
                    eigenvalues_low: low,
                    iterations,
                    restarts: restart,
                    residual,
                    method: Method::Lanczos,
                    disconnected: false,
                });
            }
            Outcome::Stalled { steps, residual } => {
                iterations += steps;
                last_residual = residual;
            }
        }
    }
    Err(Error::SolverFailure(format!(
        "Lanczos did not reach residual {tol:e} after {MAX_RESTARTS} restarts (last residual {last_residual:e})"
    )))
}

/// λ₂ and Fiedler vector from a full Jacobi eigen-decomposition.
pub fn lambda2_dense(g: &WeightedGraph) -> Result<SpectrumResult> {
    let n = g.n();
    if n > DENSE_LIMIT {
        return Err(Error::OracleTooLarge { n, limit: DENSE_LIMIT });
    }
    if n < 2 {
        return Err(Error::InvalidInput("spectrum needs at least two nodes".into()));
    }
    let components = g.components();
    if components.len() > 1 {
        return Ok(disconnected_result(g, &components, 6, Method::Dense));
    }
    let (values, vectors) = symmetric_eigen(g.laplacian())?;
    let ones = ones_unit(n);
    let mut v = vectors.column(1).into_owned();
    let c = ones.dot(&v);
    v.axpy(-c, &ones, 1.0);
    v /= v.norm();
    canonical_sign(&mut v);
    let lv = g.laplacian() * &v;
    let lambda2 = v.dot(&lv);
    let residual = (lv - &v * lambda2).norm();
    let mut low: Vec<f64> = values.iter().take(6).copied().collect();
    low[1] = lambda2;
    Ok(SpectrumResult {
        node_ids: g.node_ids().to_vec(),
        lambda2,
        fiedler: v.iter().copied().collect(),
        eigenvalues_low: low,
        iterations: 0,
        restarts: 0,
        residual,
        method: Method::Dense,
        disconnected: false,
    })
}

/// Convenience wrapper returning only λ₂ (Lanczos, default options).
pub fn algebraic_connectivity(g: &WeightedGraph) -> Result<f64> {
    Ok(lambda2_lanczos(g, &LanczosOptions::default())?.lambda2)
}

/// Largest eigenvalue of a symmetric operator, by Lanczos.
pub fn largest_eigenvalue(op: &DMatrix<f64>) -> Result<f64> {
    let n = op.nrows();
    if n == 0 {
        return Err(Error::InvalidInput("empty operator".into()));
    }
    let scale = norm1(op).max(1.0);
    let mut rng = rng::rng_from_seed(LanczosOptions::default().seed);
    for _ in 0..=MAX_RESTARTS {
        if let Outcome::Converged(pair) =
            extreme_pair(op, None, Which::Largest, 1e-8 * scale, 5 * n, scale, &mut rng)?
        {
            return Ok(pair.value);
        }
    }
    Err(Error::SolverFailure("largest eigenvalue did not converge".into()))
}

/// Characteristic time for shocks to equilibrate, `1 / λ₂`.
pub fn mixing_time(lambda2: f64) -> Result<f64> {
    if !(lambda2 > 0.0) {
        return Err(Error::InfiniteMixing(lambda2));
    }
    Ok(1.0 / lambda2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph_from_edges(n: usize, edges: &[(usize, usize, f64)]) -> WeightedGraph {
        let mut a = DMatrix::zeros(n, n);
        for &(i, j, w) in edges {
            a[(i, j)] = w;
            a[(j, i)] = w;
        }
        WeightedGraph::from_adjacency((0..n).map(|i| format!("v{i}")).collect(), a).unwrap()
    }

    fn cycle(n: usize) -> WeightedGraph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        graph_from_edges(n, &edges)
    }

    #[test]
    fn cycle_eight() {
        let s = lambda2_lanczos(&cycle(8), &LanczosOptions::default()).unwrap();
        let expected = 2.0 * (1.0 - (std::f64::consts::PI / 4.0).cos());
        assert!((s.lambda2 - expected).abs() < 1e-10);
        assert!((expected - 0.585786).abs() < 1e-6);
    }

    #[test]
    fn complete_k5() {
        let mut edges = Vec::new();
        for i in 0..5 {
            for j in (i + 1)..5 {
                edges.push((i, j, 1.0));
            }
        }
        let g = graph_from_edges(5, &edges);
        let dense = lambda2_dense(&g).unwrap();
        assert!((dense.lambda2 - 5.0).abs() < 1e-12);
        let s = lambda2_lanczos(&g, &LanczosOptions::default()).unwrap();
        assert!((s.lambda2 - 5.0).abs() < 1e-9);
    }

    #[test]
    fn two_triangles_are_disconnected() {
        let g = graph_from_edges(
            6,
            &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0)],
        );
        for s in [lambda2_lanczos(&g, &LanczosOptions::default()).unwrap(), lambda2_dense(&g).unwrap()] {
            assert_eq!(s.lambda2, 0.0);
            assert!(s.disconnected);
            assert!(s.residual < 1e-14);
            let sum: f64 = s.fiedler.iter().sum();
            assert!(sum.abs() < 1e-12);
        }
    }

    #[test]
    fn path_p3_dense() {
        let g = graph_from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let s = lambda2_dense(&g).unwrap();
        assert!((s.lambda2 - 1.0).abs() < 1e-14);
        // Fiedler vector of P3 is (1, 0, -1)/sqrt(2)
        assert!((s.fiedler[0] - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(s.fiedler[1].abs() < 1e-12);
    }

    #[test]
    fn single_weighted_edge() {
        let g = graph_from_edges(2, &[(0, 1, 2.5)]);
        assert!((lambda2_dense(&g).unwrap().lambda2 - 5.0).abs() < 1e-14);
        let s = lambda2_lanczos(&g, &LanczosOptions::default()).unwrap();
        assert!((s.lambda2 - 5.0).abs() < 1e-12);
        assert!(s.fiedler[0] > 0.0);
    }

    #[test]
    fn oracle_size_guard() {
        let n = DENSE_LIMIT + 1;
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        let g = graph_from_edges(n, &edges);
        assert!(matches!(lambda2_dense(&g), Err(Error::OracleTooLarge { .. })));
    }

    #[test]
    fn mixing_time_values() {
        assert_eq!(mixing_time(1.0).unwrap(), 1.0);
        assert!((mixing_time(1719.0).unwrap() - 5.817e-4).abs() < 1e-7);
        assert!((mixing_time(7151.0).unwrap() - 1.398e-4).abs() < 1e-7);
        assert!(matches!(mixing_time(0.0), Err(Error::InfiniteMixing(_))));
        assert!(mixing_time(-1.0).is_err());
    }

    #[test]
    fn largest_eigenvalue_of_k4() {
        let mut edges = Vec::new();
        for i in 0..4 {
            for j in (i + 1)..4 {
                edges.push((i, j, 1.0));
            }
        }
        let g = graph_from_edges(4, &edges);
        assert!((largest_eigenvalue(g.laplacian()).unwrap() - 4.0).abs() < 1e-7);
    }
}
