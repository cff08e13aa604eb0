//! Resampling inference.
//!
//! Replication `b` draws its indices from the stream `sub_seed(seed, b)`, so
//! the output is identical whether replications run in parallel or not.

use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::quantile_sorted;
use crate::rng;

/// Raw replication output: one estimate vector per successful replication,
/// in replication order.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapDraws {
    pub estimates: Vec<Vec<f64>>,
    pub reps: usize,
    pub failures: usize,
}

impl BootstrapDraws {
    /// Sorted draws of component `k`.
    pub fn sorted(&self, k: usize) -> Vec<f64> {
        let mut v: Vec<f64> = self.estimates.iter().map(|e| e[k]).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Sample standard deviation of component `k`.
    pub fn std_error(&self, k: usize) -> f64 {
        let m = self.estimates.len();
        if m < 2 {
            return f64::NAN;
        }
        let mean = self.estimates.iter().map(|e| e[k]).sum::<f64>() / m as f64;
        let ss: f64 = self.estimates.iter().map(|e| (e[k] - mean).powi(2)).sum();
        (ss / (m - 1) as f64).sqrt()
    }

    /// Equal-tailed percentile interval of component `k` at `level`.
    pub fn percentile_ci(&self, k: usize, level: f64) -> (f64, f64) {
        percentile_ci(&self.sorted(k), level)
    }
}

/// Equal-tailed percentile interval of already sorted draws.
pub fn percentile_ci(sorted: &[f64], level: f64) -> (f64, f64) {
    if sorted.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let tail = (1.0 - level) / 2.0;
    (quantile_sorted(sorted, tail), quantile_sorted(sorted, 1.0 - tail))
}

/// Runs `reps` replications, each given a resample of `0..n_blocks` drawn with
/// replacement.
///
/// Failed replications are dropped and counted; more than 10% failures is an
/// error.
pub fn block_bootstrap<F>(n_blocks: usize, reps: usize, seed: u64, estimator: F) -> Result<BootstrapDraws>
where
    F: Fn(&[usize]) -> Result<Vec<f64>> + Sync,
{
    let all: Vec<usize> = (0..n_blocks).collect();
    stratified_bootstrap(&[all], reps, seed, estimator)
}

/// Like [`block_bootstrap`], but resamples within each stratum separately so
/// every stratum keeps its size. The index slice passed to `estimator` lists
/// strata in order.
pub fn stratified_bootstrap<F>(strata: &[Vec<usize>], reps: usize, seed: u64, estimator: F) -> Result<BootstrapDraws>
where
    F: Fn(&[usize]) -> Result<Vec<f64>> + Sync,
{
    if strata.iter().all(|s| s.is_empty()) {
        return Err(Error::InvalidInput("nothing to resample".into()));
    }
    let results: Vec<Option<Vec<f64>>> = (0..reps)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::stream(seed, b as u64);
            let mut idx = Vec::with_capacity(strata.iter().map(Vec::len).sum());
            for s in strata {
                for _ in 0..s.len() {
                    idx.push(s[rng.random_range(0..s.len())]);
                }
            }
            estimator(&idx).ok().filter(|v| v.iter().all(|x| x.is_finite()))
        })
        .collect();
    let failures = results.iter().filter(|r| r.is_none()).count();
    if failures * 10 > reps {
        return Err(Error::BootstrapUnstable { failed: failures, reps });
    }
    Ok(BootstrapDraws { estimates: results.into_iter().flatten().collect(), reps, failures })
}
