//! Synthetic networks, panels and decay curves with known ground truth.

use nalgebra::DMatrix;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;
use rand_distr::{Distribution, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use crate::econometrics::{DecayObservation, InstitutionSeries, PanelSeries};
use crate::error::{Error, Result};
use crate::graph::{ExposureRecord, Institution, Quarter, WeightedGraph};
use crate::rng::{self, Rng};

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("b{i:04}")).collect()
}

fn normal(mean: f64, sd: f64) -> Normal<f64> {
    Normal::new(mean, sd.max(0.0)).expect("standard deviation is non-negative")
}

/// Circulant ring lattice: node `i` links to the `d/2` nearest nodes on each
/// side, every edge with weight `w`.
pub fn make_regular(n: usize, d: usize, w: f64) -> Result<WeightedGraph> {
    if d == 0 || d % 2 == 1 || d >= n {
        return Err(Error::Param(format!("ring lattice needs an even degree 0 < d < n (n = {n}, d = {d})")));
    }
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::Param(format!("edge weight must be positive, got {w}")));
    }
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for k in 1..=d / 2 {
            let j = (i + k) % n;
            a[(i, j)] = w;
            a[(j, i)] = w;
        }
    }
    WeightedGraph::from_adjacency(ids(n), a)
}

/// Exact λ₂ of [`make_regular`]: `w · Σ_{k=1}^{d/2} 2(1 − cos(2πk/n))`.
pub fn ring_lattice_lambda2(n: usize, d: usize, w: f64) -> f64 {
    let theta = 2.0 * std::f64::consts::PI / n as f64;
    (1..=d / 2).map(|k| 2.0 * w * (1.0 - (theta * k as f64).cos())).sum()
}

/// Network family for consolidation experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    RingLattice { d: usize },
    ErdosRenyi { p: f64 },
    CorePeriphery { core_frac: f64 },
}

/// Before/after network sizes and average bilateral intensities.
///
/// `w0`, `w1` are the mean edge weight over ordered node pairs,
/// `Σ_{i≠j} a_ij / (n(n−1))`, i.e. weighted degree divided by `n − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsolidationScenario {
    pub n0: usize,
    pub n1: usize,
    pub w0: f64,
    pub w1: f64,
    pub topology: Topology,
    pub seed: u64,
}

impl ConsolidationScenario {
    /// Ratio `λ₂(after) / λ₂(before) ≈ (n0/n1)·(w1/w0)` implied by `λ₂ ∝ w̄/n`.
    pub fn predicted_ratio(&self) -> f64 {
        (self.n0 as f64 / self.n1 as f64) * (self.w1 / self.w0)
    }

    /// Whether intensity grows faster than the node count shrinks.
    pub fn paradox_condition(&self) -> bool {
        self.w1 / self.w0 > self.n0 as f64 / self.n1 as f64
    }
}

/// Scales every edge so the average bilateral intensity is exactly `w_bar`.
fn rescale(a: DMatrix<f64>, w_bar: f64) -> Result<WeightedGraph> {
    let n = a.nrows();
    let current = a.sum() / (n * (n - 1)) as f64;
    if !(current > 0.0) {
        return Err(Error::Param("generated network has no edges".into()));
    }
    WeightedGraph::from_adjacency(ids(n), a * (w_bar / current))
}

fn erdos_renyi(n: usize, p: f64, rng: &mut Rng) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                let w = rng.random_range(0.5..1.5);
                a[(i, j)] = w;
                a[(j, i)] = w;
            }
        }
    }
    a
}

/// One network of `n` nodes from `topology` with average intensity `w_bar`.
pub fn generate_network(n: usize, w_bar: f64, topology: Topology, rng: &mut Rng) -> Result<WeightedGraph> {
    if n < 3 {
        return Err(Error::Param(format!("need at least 3 nodes, got {n}")));
    }
    if !(w_bar > 0.0) {
        return Err(Error::Param(format!("average intensity must be positive, got {w_bar}")));
    }
    match topology {
        Topology::RingLattice { d } => {
            // w̄ = d·w / (n − 1)
            make_regular(n, d, w_bar * (n - 1) as f64 / d as f64)
        }
        Topology::ErdosRenyi { p } => {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::Param(format!("edge probability must lie in (0, 1], got {p}")));
            }
            for _ in 0..100 {
                let a = erdos_renyi(n, p, rng);
                let g = WeightedGraph::from_adjacency(ids(n), a.clone())?;
                if g.is_connected() {
                    return rescale(a, w_bar);
                }
            }
            Err(Error::Param(format!("G({n}, {p}) is almost never connected; raise p")))
        }
        Topology::CorePeriphery { core_frac } => {
            let core = (core_frac * n as f64).round() as usize;
            if core < 2 || core >= n {
                return Err(Error::Param(format!("core fraction {core_frac} gives {core} core nodes of {n}")));
            }
            let mut a = DMatrix::zeros(n, n);
            for i in 0..core {
                for j in (i + 1)..core {
                    a[(i, j)] = 1.0;
                    a[(j, i)] = 1.0;
                }
            }
            let core_nodes: Vec<usize> = (0..core).collect();
            for i in core..n {
                let links = rng.random_range(1..=2.min(core));
                for &j in core_nodes.choose_multiple(rng, links) {
                    let w = rng.random_range(0.2..0.8);
                    a[(i, j)] = w;
                    a[(j, i)] = w;
                }
            }
            rescale(a, w_bar)
        }
    }
}

/// Networks before and after consolidation.
pub fn consolidation_pair(scenario: &ConsolidationScenario) -> Result<(WeightedGraph, WeightedGraph)> {
    if scenario.n1 > scenario.n0 {
        return Err(Error::Param(format!("n1 = {} exceeds n0 = {}", scenario.n1, scenario.n0)));
    }
    let before = generate_network(scenario.n0, scenario.w0, scenario.topology, &mut rng::stream(scenario.seed, 0))?;
    let after = generate_network(scenario.n1, scenario.w1, scenario.topology, &mut rng::stream(scenario.seed, 1))?;
    Ok((before, after))
}

/// Recipe for a synthetic crisis panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrisisPanelSpec {
    pub start: Quarter,
    /// Number of quarters.
    pub t: usize,
    pub crisis_quarter: Quarter,
    pub baseline: f64,
    /// Step in the network series from the crisis quarter on.
    pub direct_effect: f64,
    /// Extra institution-level effect per treated neighbor.
    pub spillover_per_link: f64,
    pub noise_sigma: f64,
    /// Linear trend per quarter, shared by pre- and post-periods.
    pub trend_slope: f64,
    /// Anticipation ramp over the eight quarters before the crisis, per
    /// quarter. Zero keeps pre-trends parallel.
    pub pretrend_slope: f64,
    /// Coefficients on `gdp_growth`, `vix`, `sovereign_debt`.
    pub control_coefs: [f64; 3],
    pub n_institutions: usize,
    /// Expected number of counterparties per institution.
    pub mean_degree: f64,
    pub institution_noise: f64,
    pub seed: u64,
}

impl Default for CrisisPanelSpec {
    fn default() -> Self {
        Self {
            start: Quarter::from_year_quarter(2003, 1),
            t: 48,
            crisis_quarter: Quarter::from_year_quarter(2008, 3),
            baseline: 1700.0,
            direct_effect: 1176.0,
            spillover_per_link: 0.0,
            noise_sigma: 50.0,
            trend_slope: 5.0,
            pretrend_slope: 0.0,
            control_coefs: [-143.0, 38.9, 892.0],
            n_institutions: 40,
            mean_degree: 1.0,
            institution_noise: 100.0,
            seed: 0,
        }
    }
}

/// Known effects built into a generated panel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrisisTruth {
    pub direct_effect: f64,
    /// What the institution-level comparator converges to in this draw:
    /// direct effect plus spillovers at the realized mean degree.
    pub naive_effect: f64,
    /// Same at the expected mean degree.
    pub naive_expected: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrisisPanel {
    pub panel: PanelSeries,
    pub institutions: Vec<InstitutionSeries>,
    /// Counterparty count per institution.
    pub degrees: Vec<usize>,
    pub truth: CrisisTruth,
}

/// Control names produced by [`crisis_panel`].
pub const CONTROL_NAMES: [&str; 3] = ["gdp_growth", "vix", "sovereign_debt"];

/// Generates a network-level series and institution outcomes.
///
/// The network series is
/// `baseline + trend·t + ramp_t + effect·1{q ≥ crisis} + c′X_t + ε_t`. Each
/// institution gets its own level, the direct effect plus
/// `spillover_per_link` times its counterparty count after the crisis, and
/// independent noise.
pub fn crisis_panel(spec: &CrisisPanelSpec) -> Result<CrisisPanel> {
    if spec.t < 12 {
        return Err(Error::Param(format!("need at least 12 quarters, got {}", spec.t)));
    }
    let end = spec.start.offset(spec.t as i32 - 1);
    if spec.crisis_quarter <= spec.start || spec.crisis_quarter >= end {
        return Err(Error::Param(format!("crisis quarter {} is not inside {}..{}", spec.crisis_quarter, spec.start, end)));
    }
    if spec.n_institutions < 2 || !(spec.mean_degree >= 0.0) {
        return Err(Error::Param("need at least 2 institutions and a non-negative mean degree".into()));
    }
    let quarters: Vec<Quarter> = (0..spec.t as i32).map(|k| spec.start.offset(k)).collect();
    let c = spec.crisis_quarter;

    let mut crng = rng::stream(spec.seed, 1);
    let gdp: Vec<f64> = (0..spec.t).map(|_| normal(2.5, 1.5).sample(&mut crng)).collect();
    let vix: Vec<f64> = (0..spec.t).map(|_| 20.0 + 8.0 * normal(0.0, 1.0).sample(&mut crng).abs()).collect();
    let sovereign: Vec<f64> =
        (0..spec.t).map(|k| 0.6 + 0.004 * k as f64 + normal(0.0, 0.05).sample(&mut crng)).collect();

    let mut nrng = rng::stream(spec.seed, 2);
    let noise = normal(0.0, spec.noise_sigma);
    let lambda2: Vec<f64> = quarters
        .iter()
        .enumerate()
        .map(|(k, &q)| {
            let ramp_start = c.offset(-8);
            let ramp = spec.pretrend_slope * f64::from((q.0.min(c.0) - ramp_start.0).max(0));
            let step = if q >= c { spec.direct_effect } else { 0.0 };
            let controls = spec.control_coefs[0] * gdp[k] + spec.control_coefs[1] * vix[k] + spec.control_coefs[2] * sovereign[k];
            let e = if spec.noise_sigma > 0.0 { noise.sample(&mut nrng) } else { 0.0 };
            spec.baseline + spec.trend_slope * k as f64 + ramp + step + controls + e
        })
        .collect();
    let controls = vec![
        (CONTROL_NAMES[0].to_string(), gdp),
        (CONTROL_NAMES[1].to_string(), vix),
        (CONTROL_NAMES[2].to_string(), sovereign),
    ];
    let panel = PanelSeries::new(quarters.clone(), lambda2, controls, c)?;

    // institution layer: counterparty graph G(m, mean_degree / (m − 1))
    let m = spec.n_institutions;
    let mut irng = rng::stream(spec.seed, 3);
    let p = (spec.mean_degree / (m - 1) as f64).min(1.0);
    let mut degrees = vec![0usize; m];
    for i in 0..m {
        for j in (i + 1)..m {
            if irng.random::<f64>() < p {
                degrees[i] += 1;
                degrees[j] += 1;
            }
        }
    }
    let level = normal(1000.0, 200.0);
    let inoise = normal(0.0, spec.institution_noise);
    let institutions = (0..m)
        .map(|i| {
            let mu = level.sample(&mut irng);
            let effect = spec.direct_effect + spec.spillover_per_link * degrees[i] as f64;
            let outcomes = quarters
                .iter()
                .map(|&q| {
                    let e = if spec.institution_noise > 0.0 { inoise.sample(&mut irng) } else { 0.0 };
                    mu + if q >= c { effect } else { 0.0 } + e
                })
                .collect();
            InstitutionSeries { id: format!("b{i:04}"), outcomes }
        })
        .collect();
    let realized = degrees.iter().sum::<usize>() as f64 / m as f64;
    Ok(CrisisPanel {
        panel,
        institutions,
        degrees,
        truth: CrisisTruth {
            direct_effect: spec.direct_effect,
            naive_effect: spec.direct_effect + spec.spillover_per_link * realized,
            naive_expected: spec.direct_effect + spec.spillover_per_link * spec.mean_degree,
        },
    })
}

/// Forward model for decay observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySpec {
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma_net: f64,
    pub n_pairs: usize,
    /// `(min, max)` distance in km; sampled log-uniformly.
    pub distance_range: (f64, f64),
    pub noise_sigma: f64,
    pub seed: u64,
}

/// Observations `α + β·exp(−κd) + γ·hops + ε` with hops uniform on 1..=6.
pub fn decay_dataset(spec: &DecaySpec) -> Result<Vec<DecayObservation>> {
    let (lo, hi) = spec.distance_range;
    if !(lo > 0.0 && hi > 10.0 * lo) {
        return Err(Error::Param(format!("distance range ({lo}, {hi}) must be positive and span over a decade")));
    }
    let mut r = rng::rng_from_seed(spec.seed);
    let noise = normal(0.0, spec.noise_sigma);
    Ok((0..spec.n_pairs)
        .map(|_| {
            let d = (lo.ln() + r.random::<f64>() * (hi / lo).ln()).exp();
            let hops = r.random_range(1..=6) as f64;
            let e = if spec.noise_sigma > 0.0 { noise.sample(&mut r) } else { 0.0 };
            DecayObservation {
                distance_km: d,
                network_distance: hops,
                delta_outcome: spec.alpha + spec.beta * (-spec.kappa * d).exp() + spec.gamma_net * hops + e,
            }
        })
        .collect())
}

/// Recipe for a synthetic bilateral exposure panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExposurePanelSpec {
    pub n_institutions: usize,
    pub start: Quarter,
    pub n_quarters: usize,
    /// Probability of a directed exposure between two institutions.
    pub density: f64,
    pub seed: u64,
}

impl Default for ExposurePanelSpec {
    fn default() -> Self {
        Self {
            n_institutions: 30,
            start: Quarter::from_year_quarter(2007, 1),
            n_quarters: 4,
            density: 0.25,
            seed: 0,
        }
    }
}

const CENTERS: [(&str, f64, f64); 8] = [
    ("US", 40.71, -74.01),
    ("GB", 51.51, -0.13),
    ("DE", 50.11, 8.68),
    ("FR", 48.86, 2.35),
    ("JP", 35.68, 139.69),
    ("CH", 47.37, 8.54),
    ("CN", 31.23, 121.47),
    ("CA", 43.65, -79.38),
];

/// Institutions plus quarterly exposures over the four channels.
///
/// Every institution lends to its successor on a ring so each quarter's
/// network is connected; other pairs appear with probability `density`.
pub fn exposure_panel(spec: &ExposurePanelSpec) -> Result<(Vec<Institution>, Vec<ExposureRecord>)> {
    let n = spec.n_institutions;
    if n < 3 || spec.n_quarters == 0 || !(0.0..=1.0).contains(&spec.density) {
        return Err(Error::Param("need at least 3 institutions, one quarter and density in [0, 1]".into()));
    }
    let mut r = rng::stream(spec.seed, 0);
    let size = LogNormal::new(7.0, 0.8).expect("valid lognormal");
    let institutions: Vec<Institution> = (0..n)
        .map(|i| {
            let (country, lat, lon) = CENTERS[i % CENTERS.len()];
            let assets = 50.0 + size.sample(&mut r);
            let leverage = r.random_range(8.0..30.0);
            Institution {
                id: format!("b{i:04}"),
                name: format!("Bank {i}"),
                country: country.into(),
                assets,
                equity: assets / leverage,
                lat: Some(lat + r.random_range(-1.0..1.0)),
                lon: Some(lon + r.random_range(-1.0..1.0)),
            }
        })
        .collect();

    let amount = LogNormal::new(1.5, 0.8).expect("valid lognormal");
    let mut records = Vec::new();
    for qk in 0..spec.n_quarters {
        let mut qr = rng::stream(spec.seed, 1 + qk as u64);
        let quarter = spec.start.offset(qk as i32);
        for i in 0..n {
            for j in 0..n {
                if i == j || (j != (i + 1) % n && qr.random::<f64>() >= spec.density) {
                    continue;
                }
                let scale = (institutions[i].assets * institutions[j].assets).sqrt() / 100.0;
                let mut channel = || (amount.sample(&mut qr) * scale * 100.0).round() / 100.0;
                records.push(ExposureRecord {
                    quarter,
                    lender: institutions[i].id.clone(),
                    borrower: institutions[j].id.clone(),
                    loans: channel(),
                    securities: channel(),
                    derivatives: channel(),
                    guarantees: channel(),
                    observed: true,
                });
            }
        }
    }
    Ok((institutions, records))
}

/// Marks a random `fraction` of the records as unobserved, per quarter. The
/// ring edges (lender `i` to `i + 1`) stay observed.
pub fn mask_records(records: &[ExposureRecord], fraction: f64, seed: u64) -> Vec<bool> {
    let mut r = rng::rng_from_seed(seed);
    let mut observed = vec![true; records.len()];
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.shuffle(&mut r);
    let hide = (fraction.clamp(0.0, 1.0) * records.len() as f64).round() as usize;
    for &k in order.iter().take(hide) {
        observed[k] = false;
    }
    observed
}
