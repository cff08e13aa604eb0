//! Capital-surcharge counterfactuals and resolution priorities.
//!
//! A surcharged institution is assumed to shed exposure in proportion to its
//! requirement: with `shrink_i = k0 / K_i`, each edge `(i, j)` is scaled by
//! `sqrt(shrink_i · shrink_j)` and λ₂ is recomputed on the result. This
//! response model is a modelling choice, not an estimated relationship.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Institution, WeightedGraph};
use crate::spectral::{self, LanczosOptions, SpectrumResult};

/// How surcharges are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum PolicyMode {
    /// `K_i = k0 + α · v²ᵢ · Assets_i` (assets in trillions), optionally only
    /// for the `top_m` institutions by Fiedler centrality.
    NetworkTargeted { top_m: Option<usize> },
    /// The `top_m` largest institutions pay `α · Assets_i / n`.
    SizeBased { top_m: usize },
    /// Institutions with leverage above `threshold` pay `α · Assets_i / n`.
    LeverageBased { threshold: f64 },
    /// Everyone pays `α`.
    Uniform,
}

impl PolicyMode {
    pub fn label(&self) -> &'static str {
        match self {
            PolicyMode::NetworkTargeted { .. } => "network_targeted",
            PolicyMode::SizeBased { .. } => "size_based",
            PolicyMode::LeverageBased { .. } => "leverage_based",
            PolicyMode::Uniform => "uniform",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapitalPolicy {
    /// Baseline requirement as a fraction of assets.
    pub k0: f64,
    /// Surcharge coefficient.
    pub alpha: f64,
    #[serde(flatten)]
    pub mode: PolicyMode,
}

impl CapitalPolicy {
    pub const DEFAULT_K0: f64 = 0.08;
    pub const DEFAULT_LEVERAGE_THRESHOLD: f64 = 15.0;

    pub fn new(alpha: f64, mode: PolicyMode) -> Self {
        Self { k0: Self::DEFAULT_K0, alpha, mode }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k0 > 0.0 && self.k0 < 1.0) {
            return Err(Error::Param(format!("k0 must lie in (0, 1), got {}", self.k0)));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Param(format!("alpha must be non-negative, got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Flat policy description as read from configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub mode: String,
    #[serde(default = "default_k0")]
    pub k0: f64,
    pub alpha: f64,
    #[serde(default)]
    pub top_m: Option<usize>,
    #[serde(default)]
    pub leverage_threshold: Option<f64>,
}

fn default_k0() -> f64 {
    CapitalPolicy::DEFAULT_K0
}

impl TryFrom<&PolicyConfig> for CapitalPolicy {
    type Error = Error;

    fn try_from(c: &PolicyConfig) -> Result<Self> {
        let mode = match c.mode.as_str() {
            "network_targeted" => PolicyMode::NetworkTargeted { top_m: c.top_m },
            "size_based" => PolicyMode::SizeBased {
                top_m: c.top_m.ok_or_else(|| Error::Param("size_based mode needs top_m".into()))?,
            },
            "leverage_based" => PolicyMode::LeverageBased {
                threshold: c.leverage_threshold.unwrap_or(CapitalPolicy::DEFAULT_LEVERAGE_THRESHOLD),
            },
            "uniform" => PolicyMode::Uniform,
            other => return Err(Error::Param(format!("unknown policy mode {other}"))),
        };
        let policy = CapitalPolicy { k0: c.k0, alpha: c.alpha, mode };
        policy.validate()?;
        Ok(policy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyOutcome {
    pub mode: String,
    pub alpha: f64,
    pub node_ids: Vec<String>,
    pub requirements: Vec<f64>,
    pub lambda2_before: f64,
    pub lambda2_after: f64,
    /// `100 · (1 − after / before)`
    pub reduction_pct: f64,
    /// Institutions with `K_i > k0`.
    pub banks_affected: usize,
}

/// Fails with [`Error::StaleSpectrum`] unless `spectrum` was computed on `g`.
fn check_spectrum(g: &WeightedGraph, spectrum: &SpectrumResult) -> Result<()> {
    if spectrum.node_ids != g.node_ids() || spectrum.fiedler.len() != g.n() {
        return Err(Error::StaleSpectrum("node sets differ".into()));
    }
    let v = nalgebra::DVector::from_column_slice(&spectrum.fiedler);
    let rayleigh = v.dot(&(g.laplacian() * &v));
    let scale = g.degree().amax();
    if (rayleigh - spectrum.lambda2).abs() > 1e-6 * spectrum.lambda2.abs() + 1e-12 * scale {
        return Err(Error::StaleSpectrum(format!(
            "Fiedler Rayleigh quotient {rayleigh} does not match lambda2 {}",
            spectrum.lambda2
        )));
    }
    Ok(())
}

/// Centrality rounded to 1e-12 so that entries equal up to round-off tie
/// (and are then ordered by id).
fn tie_key(c: f64) -> i64 {
    (c * 1e12).round() as i64
}

/// Indices of the `m` largest `key` values, ties broken by node id.
fn top_by(g: &WeightedGraph, key: &[f64], m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..key.len()).collect();
    order.sort_by(|&a, &b| key[b].total_cmp(&key[a]).then_with(|| g.node_ids()[a].cmp(&g.node_ids()[b])));
    order.truncate(m);
    order
}

/// Capital requirement per node under `policy`.
pub fn capital_requirements(
    g: &WeightedGraph,
    meta: &[Institution],
    spectrum: &SpectrumResult,
    policy: &CapitalPolicy,
) -> Result<Vec<f64>> {
    policy.validate()?;
    check_spectrum(g, spectrum)?;
    let n = g.n();
    let inst: Vec<&Institution> = g
        .node_ids()
        .iter()
        .map(|id| meta.iter().find(|m| m.id == *id).ok_or_else(|| Error::NotFound(format!("metadata for {id}"))))
        .collect::<Result<_>>()?;
    // assets are recorded in billions; the surcharge formula uses trillions
    let trillions: Vec<f64> = inst.iter().map(|m| m.assets / 1000.0).collect();
    let (k0, alpha) = (policy.k0, policy.alpha);
    let mut k = vec![k0; n];
    match policy.mode {
        PolicyMode::NetworkTargeted { top_m } => {
            let c = spectrum.centrality();
            let keys: Vec<f64> = c.iter().map(|&v| tie_key(v) as f64).collect();
            let chosen = top_by(g, &keys, top_m.unwrap_or(n));
            for i in chosen {
                k[i] = k0 + alpha * c[i] * trillions[i];
            }
        }
        PolicyMode::SizeBased { top_m } => {
            for i in top_by(g, &trillions, top_m) {
                k[i] = k0 + alpha * trillions[i] / n as f64;
            }
        }
        PolicyMode::LeverageBased { threshold } => {
            for i in (0..n).filter(|&i| inst[i].leverage() > threshold) {
                k[i] = k0 + alpha * trillions[i] / n as f64;
            }
        }
        PolicyMode::Uniform => k.iter_mut().for_each(|v| *v = k0 + alpha),
    }
    Ok(k)
}

/// Requirements under `policy` and λ₂ of the network after institutions
/// shrink their exposures in response.
pub fn apply_capital_policy(
    g: &WeightedGraph,
    meta: &[Institution],
    spectrum: &SpectrumResult,
    policy: &CapitalPolicy,
) -> Result<PolicyOutcome> {
    let requirements = capital_requirements(g, meta, spectrum, policy)?;
    let shrink: Vec<f64> = requirements.iter().map(|k| policy.k0 / k).collect();
    let banks_affected = requirements.iter().filter(|&&k| k > policy.k0).count();
    let lambda2_after = if banks_affected == 0 {
        spectrum.lambda2
    } else {
        let counterfactual = g.reweighted(|i, j| (shrink[i] * shrink[j]).sqrt());
        spectral::lambda2_lanczos(&counterfactual, &LanczosOptions::default())?.lambda2
    };
    let before = spectrum.lambda2;
    let reduction_pct = if before > 0.0 { 100.0 * (1.0 - lambda2_after / before) } else { 0.0 };
    Ok(PolicyOutcome {
        mode: policy.mode.label().into(),
        alpha: policy.alpha,
        node_ids: g.node_ids().to_vec(),
        requirements,
        lambda2_before: before,
        lambda2_after,
        reduction_pct,
        banks_affected,
    })
}

/// First-order change `λ₂ · Σ_{i∈S} v²ᵢ` from targeting the nodes in `targeted`.
pub fn lambda2_reduction_approx(spectrum: &SpectrumResult, targeted: &[usize]) -> Result<f64> {
    let n = spectrum.fiedler.len();
    let mut total = 0.0;
    for &i in targeted {
        let v = spectrum.fiedler.get(i).ok_or_else(|| Error::Index(format!("node {i} of {n}")))?;
        total += v * v;
    }
    Ok(spectrum.lambda2 * total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingEntry {
    pub id: String,
    /// `v²₂,ᵢ`
    pub centrality: f64,
    /// λ₂ of the network without this institution.
    pub lambda2_without: f64,
    /// `λ₂(without i) − λ₂`
    pub delta_lambda2: f64,
    /// `100 · (1 − λ₂(without i) / λ₂)`
    pub reduction_pct: f64,
    /// Removal split the network; `lambda2_without` refers to its largest piece.
    pub disconnects: bool,
}

fn lambda2_of(g: &WeightedGraph) -> Result<f64> {
    if g.n() < 2 {
        return Ok(0.0);
    }
    Ok(spectral::lambda2_lanczos(g, &LanczosOptions::default())?.lambda2)
}

/// Removes each institution in turn (with all its exposures), recomputes λ₂,
/// and ranks institutions by Fiedler centrality, ties by id.
pub fn resolution_ranking(g: &WeightedGraph, spectrum: &SpectrumResult) -> Result<Vec<RankingEntry>> {
    check_spectrum(g, spectrum)?;
    let n = g.n();
    if n < 3 {
        return Err(Error::InvalidInput("resolution ranking needs at least three institutions".into()));
    }
    if !g.is_connected() {
        return Err(Error::DegenerateNetwork("resolution ranking needs a connected network".into()));
    }
    let before = spectrum.lambda2;
    let centrality = spectrum.centrality();
    let mut entries: Vec<RankingEntry> = (0..n)
        .into_par_iter()
        .map(|i| {
            let reduced = g.without_node(i);
            let comps = reduced.components();
            let disconnects = comps.len() > 1;
            let after = if disconnects {
                // largest piece; the earliest one wins a size tie
                let largest = comps.iter().fold(&comps[0], |best, c| if c.len() > best.len() { c } else { best });
                lambda2_of(&reduced.induced(largest))?
            } else {
                lambda2_of(&reduced)?
            };
            Ok(RankingEntry {
                id: g.node_ids()[i].clone(),
                centrality: centrality[i],
                lambda2_without: after,
                delta_lambda2: after - before,
                reduction_pct: 100.0 * (1.0 - after / before),
                disconnects,
            })
        })
        .collect::<Result<_>>()?;
    entries.sort_by(|a, b| tie_key(b.centrality).cmp(&tie_key(a.centrality)).then_with(|| a.id.cmp(&b.id)));
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn graph(n: usize, edges: &[(usize, usize, f64)]) -> WeightedGraph {
        let mut a = DMatrix::zeros(n, n);
        for &(i, j, w) in edges {
            a[(i, j)] = w;
            a[(j, i)] = w;
        }
        WeightedGraph::from_adjacency((0..n).map(|i| format!("n{i}")).collect(), a).unwrap()
    }

    fn meta(n: usize) -> Vec<Institution> {
        (0..n)
            .map(|i| Institution {
                id: format!("n{i}"),
                name: format!("Bank {i}"),
                country: "US".into(),
                assets: 500.0 + 100.0 * i as f64,
                equity: 20.0 + 10.0 * i as f64,
                lat: None,
                lon: None,
            })
            .collect()
    }

    fn path4() -> WeightedGraph {
        graph(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
    }

    #[test]
    fn zero_alpha_changes_nothing() {
        let g = path4();
        let s = spectral::lambda2_dense(&g).unwrap();
        let out = apply_capital_policy(&g, &meta(4), &s, &CapitalPolicy::new(0.0, PolicyMode::NetworkTargeted { top_m: None }))
            .unwrap();
        assert!(out.requirements.iter().all(|&k| k == 0.08));
        assert_eq!(out.reduction_pct, 0.0);
        assert_eq!(out.banks_affected, 0);
    }

    #[test]
    fn uniform_doubling_halves_lambda2() {
        let g = path4();
        let s = spectral::lambda2_dense(&g).unwrap();
        let out = apply_capital_policy(&g, &meta(4), &s, &CapitalPolicy::new(0.08, PolicyMode::Uniform)).unwrap();
        assert!((out.lambda2_after - 0.5 * s.lambda2).abs() < 1e-9);
        assert!((out.reduction_pct - 50.0).abs() < 1e-6);
        assert_eq!(out.banks_affected, 4);
    }

    #[test]
    fn leverage_threshold_selects_banks() {
        let g = path4();
        let s = spectral::lambda2_dense(&g).unwrap();
        // leverages: 25, 20, 17.5, 16
        let out = apply_capital_policy(&g, &meta(4), &s, &CapitalPolicy::new(0.1, PolicyMode::LeverageBased { threshold: 18.0 }))
            .unwrap();
        assert_eq!(out.banks_affected, 2);
        assert!(out.requirements[0] > 0.08 && out.requirements[3] == 0.08);
    }

    #[test]
    fn stale_spectrum_is_rejected() {
        let g = path4();
        let s = spectral::lambda2_dense(&graph(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)])).unwrap();
        let r = apply_capital_policy(&g, &meta(4), &s, &CapitalPolicy::new(0.1, PolicyMode::Uniform));
        assert!(matches!(r, Err(Error::StaleSpectrum(_))));
    }

    #[test]
    fn approximation_identities() {
        let s = spectral::lambda2_dense(&path4()).unwrap();
        assert!((lambda2_reduction_approx(&s, &[0, 1, 2, 3]).unwrap() - s.lambda2).abs() < 1e-12);
        assert_eq!(lambda2_reduction_approx(&s, &[]).unwrap(), 0.0);
        let parts = lambda2_reduction_approx(&s, &[0]).unwrap() + lambda2_reduction_approx(&s, &[2, 3]).unwrap();
        assert!((parts - lambda2_reduction_approx(&s, &[0, 2, 3]).unwrap()).abs() < 1e-15);
        assert!(lambda2_reduction_approx(&s, &[4]).is_err());
    }

    #[test]
    fn path_ranking_puts_endpoints_first() {
        // P4 Fiedler vector is proportional to cos((2i+1)π/8): endpoints
        // carry cos(π/8) ≈ 0.924, interior nodes cos(3π/8) ≈ 0.383
        let g = path4();
        let s = spectral::lambda2_dense(&g).unwrap();
        let ranking = resolution_ranking(&g, &s).unwrap();
        let order: Vec<&str> = ranking.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(order, vec!["n0", "n3", "n1", "n2"]);
        // dropping an endpoint leaves P3 (λ₂ = 1); an interior node disconnects
        assert!((ranking[0].lambda2_without - 1.0).abs() < 1e-9);
        assert!(ranking[2].disconnects);
    }

    #[test]
    fn star_hub_removal_disconnects() {
        let g = graph(5, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (0, 4, 1.0)]);
        let s = spectral::lambda2_dense(&g).unwrap();
        let ranking = resolution_ranking(&g, &s).unwrap();
        let hub = ranking.iter().find(|e| e.id == "n0").unwrap();
        assert!(hub.disconnects);
        assert_eq!(hub.lambda2_without, 0.0);
        let leaves: Vec<f64> = ranking.iter().filter(|e| e.id != "n0").map(|e| e.lambda2_without).collect();
        assert!(leaves.iter().all(|&l| (l - leaves[0]).abs() < 1e-9));
        assert_eq!(ranking.len(), 5);
    }

    #[test]
    fn config_parsing() {
        let c: PolicyConfig = serde_json::from_str(r#"{"mode":"size_based","alpha":0.1,"top_m":5}"#).unwrap();
        let p = CapitalPolicy::try_from(&c).unwrap();
        assert_eq!(p.mode, PolicyMode::SizeBased { top_m: 5 });
        assert_eq!(p.k0, 0.08);
        let bad = PolicyConfig { mode: "size_based".into(), k0: 0.08, alpha: 0.1, top_m: None, leverage_threshold: None };
        assert!(CapitalPolicy::try_from(&bad).is_err());
    }
}
