//! Treatment-effect estimation on network-level time series.
//!
//! The unit of observation is a quarter: each row carries that quarter's
//! algebraic connectivity and macro controls. Inference resamples whole
//! quarters.

pub mod bootstrap;
mod decay;
mod did;
pub mod ols;

pub use bootstrap::{block_bootstrap, percentile_ci, stratified_bootstrap, BootstrapDraws};
pub use decay::{fit_spatial_decay, DecayFit, DecayObservation, DecayOptions};
pub use did::{event_study, naive_did, placebo_test, pretrends_test, spatial_did, InstitutionSeries};
pub use ols::{ols, OlsFit};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::graph::Quarter;

/// Name of the built-in linear time trend control.
pub const TREND: &str = "trend";

/// Quarterly network statistic aligned with macro controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelSeries {
    pub quarters: Vec<Quarter>,
    pub lambda2: Vec<f64>,
    /// Named control series aligned with `quarters`.
    pub controls: Vec<(String, Vec<f64>)>,
    /// First quarter of treatment. It is excluded from estimation; the
    /// post-period starts the quarter after.
    pub crisis_quarter: Quarter,
}

impl PanelSeries {
    pub fn new(
        quarters: Vec<Quarter>,
        lambda2: Vec<f64>,
        controls: Vec<(String, Vec<f64>)>,
        crisis_quarter: Quarter,
    ) -> Result<Self> {
        let t = quarters.len();
        if lambda2.len() != t {
            return Err(Error::Shape { expected: t, actual: lambda2.len() });
        }
        if quarters.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("quarters must be strictly increasing".into()));
        }
        for (name, values) in &controls {
            if values.len() != t {
                return Err(Error::InvalidInput(format!("control {name} has {} values for {t} quarters", values.len())));
            }
            if name == TREND {
                return Err(Error::InvalidInput(format!("control name {TREND} is reserved")));
            }
        }
        if lambda2.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("lambda2 series has non-finite values".into()));
        }
        Ok(Self { quarters, lambda2, controls, crisis_quarter })
    }

    pub fn len(&self) -> usize {
        self.quarters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quarters.is_empty()
    }

    /// Values of control `name`; `trend` counts quarters from the first one.
    pub fn control(&self, name: &str) -> Result<Vec<f64>> {
        if name == TREND {
            let q0 = self.quarters.first().map_or(0, |q| q.0);
            return Ok(self.quarters.iter().map(|q| f64::from(q.0 - q0)).collect());
        }
        self.controls
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| Error::NotFound(format!("control {name}")))
    }

    /// Same panel with every outcome shifted by `c`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.lambda2.iter_mut().for_each(|v| *v += c);
        out
    }

    pub fn with_crisis(&self, crisis_quarter: Quarter) -> Self {
        Self { crisis_quarter, ..self.clone() }
    }
}

/// One estimated coefficient with bootstrap inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEstimate {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Two-sided p-value of `estimate / std_error` against Student t with the
    /// residual degrees of freedom.
    pub p_value: f64,
}

impl CoefficientEstimate {
    pub fn significant(&self, level: f64) -> bool {
        self.p_value < level
    }
}

/// Joint test that a block of coefficients is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointTest {
    pub coefficients: Vec<String>,
    pub f_stat: f64,
    pub df1: usize,
    pub df2: usize,
    /// From the F distribution.
    pub p_value: f64,
    /// Share of null-model bootstrap statistics at least as large.
    pub bootstrap_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimator: String,
    pub coefficients: Vec<CoefficientEstimate>,
    pub r_squared: f64,
    pub n_obs: usize,
    pub bootstrap_reps: usize,
    pub bootstrap_failures: usize,
    pub seed: u64,
    /// Quarter that defines the post-period (the placebo date for placebo runs).
    pub break_quarter: Option<Quarter>,
    pub joint_test: Option<JointTest>,
}

impl EstimateReport {
    pub fn coefficient(&self, name: &str) -> Option<&CoefficientEstimate> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

pub(crate) fn t_p_value(estimate: f64, std_error: f64, dof: usize) -> f64 {
    if !(std_error > 0.0) {
        return if estimate == 0.0 { 1.0 } else { 0.0 };
    }
    let t = (estimate / std_error).abs();
    match StudentsT::new(0.0, 1.0, dof.max(1) as f64) {
        Ok(dist) => 2.0 * dist.sf(t),
        Err(_) => f64::NAN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trend_and_lookup() {
        let q: Vec<Quarter> = (0..4).map(|k| Quarter(8000 + k)).collect();
        let p = PanelSeries::new(q, vec![1.0; 4], vec![("vix".into(), vec![1.0, 2.0, 3.0, 4.0])], Quarter(8002)).unwrap();
        assert_eq!(p.control(TREND).unwrap(), vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(p.control("vix").unwrap()[2], 3.0);
        assert!(matches!(p.control("gdp"), Err(Error::NotFound(_))));
    }

    #[test]
    fn t_p_values() {
        assert!((t_p_value(0.0, 1.0, 10) - 1.0).abs() < 1e-12);
        // 97.5th percentile of t(10) is 2.228
        assert!((t_p_value(2.228139, 1.0, 10) - 0.05).abs() < 1e-5);
    }
}
