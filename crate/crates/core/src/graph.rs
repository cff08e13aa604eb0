//! Exposure data model, network construction, and summary statistics.
//!
//! Bilateral exposures are aggregated per quarter into a total-exposure
//! matrix `E`, normalized into an adjacency matrix `A` with entries in
//! `[0, 1]`, symmetrized as `(A + Aᵀ) / 2`, and turned into the Laplacian
//! `L = D − A` with `D = diag(A·1)`.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral;

/// Calendar quarter encoded as `4 * year + (quarter_of_year - 1)`.
///
/// Serialized and parsed as text such as `2008Q3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Quarter(pub i32);

impl Quarter {
    pub fn from_year_quarter(year: i32, quarter_of_year: u8) -> Self {
        assert!((1..=4).contains(&quarter_of_year), "quarter of year must be 1..=4");
        Quarter(4 * year + i32::from(quarter_of_year) - 1)
    }

    pub fn year(self) -> i32 {
        self.0.div_euclid(4)
    }

    pub fn quarter_of_year(self) -> u8 {
        (self.0.rem_euclid(4) + 1) as u8
    }

    pub fn offset(self, quarters: i32) -> Self {
        Quarter(self.0 + quarters)
    }
}

impl FromStr for Quarter {
    type Err = Error;

    /// Accepts `2008Q3`, case-insensitive, surrounding whitespace ignored.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("quarter {s:?} is not of the form 2008Q3"));
        let (y, q) = s.trim().split_once(['Q', 'q']).ok_or_else(bad)?;
        let year: i32 = y.parse().map_err(|_| bad())?;
        let q: u8 = q.parse().map_err(|_| bad())?;
        if !(1..=4).contains(&q) {
            return Err(bad());
        }
        Ok(Quarter::from_year_quarter(year, q))
    }
}

impl From<Quarter> for String {
    fn from(q: Quarter) -> String {
        q.to_string()
    }
}

impl TryFrom<String> for Quarter {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for Quarter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}Q{}", self.year(), self.quarter_of_year())
    }
}

/// Per-institution metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Institution {
    pub id: String,
    pub name: String,
    pub country: String,
    /// Total assets, billions of currency units.
    pub assets: f64,
    /// Book equity, same unit as `assets`.
    pub equity: f64,
    pub lat: Option<f64>,
    pub lon: Option<f64>,
}

impl Institution {
    pub fn leverage(&self) -> f64 {
        self.assets / self.equity
    }
}

/// One directed exposure of `lender` to `borrower` in a quarter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExposureRecord {
    pub quarter: Quarter,
    pub lender: String,
    pub borrower: String,
    pub loans: f64,
    pub securities: f64,
    pub derivatives: f64,
    pub guarantees: f64,
    /// `false` when the value was produced by imputation.
    pub observed: bool,
}

impl ExposureRecord {
    pub fn total(&self) -> f64 {
        self.loans + self.securities + self.derivatives + self.guarantees
    }
}

/// Quarterly bilateral exposures across a fixed institution set.
#[derive(Debug, Clone)]
pub struct ExposurePanel {
    institutions: Vec<Institution>,
    records: Vec<ExposureRecord>,
    quarters: Vec<Quarter>,
    index: HashMap<String, usize>,
}

impl ExposurePanel {
    pub fn new(institutions: Vec<Institution>, records: Vec<ExposureRecord>) -> Result<Self> {
        let mut index = HashMap::with_capacity(institutions.len());
        for (i, inst) in institutions.iter().enumerate() {
            if !(inst.assets > 0.0) || !(inst.equity > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "institution {} must have positive assets and equity",
                    inst.id
                )));
            }
            if index.insert(inst.id.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate institution id {}", inst.id)));
            }
        }

        let mut seen = BTreeSet::new();
        let mut quarters = BTreeSet::new();
        for rec in &records {
            for id in [&rec.lender, &rec.borrower] {
                if !index.contains_key(id) {
                    return Err(Error::NotFound(format!("institution {id} referenced by exposure record")));
                }
            }
            if rec.lender == rec.borrower {
                return Err(Error::InvalidInput(format!("self-exposure record for {}", rec.lender)));
            }
            let parts = [rec.loans, rec.securities, rec.derivatives, rec.guarantees];
            if parts.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::InvalidInput(format!(
                    "negative or non-finite exposure {} -> {} in {}",
                    rec.lender, rec.borrower, rec.quarter
                )));
            }
            if !seen.insert((rec.quarter, rec.lender.clone(), rec.borrower.clone())) {
                return Err(Error::InvalidInput(format!(
                    "duplicate record {} -> {} in {}",
                    rec.lender, rec.borrower, rec.quarter
                )));
            }
            quarters.insert(rec.quarter);
        }

        Ok(Self {
            institutions,
            records,
            quarters: quarters.into_iter().collect(),
            index,
        })
    }

    pub fn institutions(&self) -> &[Institution] {
        &self.institutions
    }

    pub fn records(&self) -> &[ExposureRecord] {
        &self.records
    }

    pub fn quarters(&self) -> &[Quarter] {
        &self.quarters
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn records_in(&self, quarter: Quarter) -> impl Iterator<Item = &ExposureRecord> {
        self.records.iter().filter(move |r| r.quarter == quarter)
    }
}

/// Square matrix of total exposures `E[i][j]` (lender `i`, borrower `j`).
#[derive(Debug, Clone, PartialEq)]
pub struct ExposureMatrix {
    pub node_ids: Vec<String>,
    pub values: DMatrix<f64>,
    /// Institution assets aligned with `node_ids`, needed for asset weighting.
    pub assets: Option<Vec<f64>>,
}

impl ExposureMatrix {
    pub fn new(node_ids: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        let n = node_ids.len();
        if values.nrows() != n || values.ncols() != n {
            return Err(Error::Shape { expected: n, actual: values.nrows().max(values.ncols()) });
        }
        for i in 0..n {
            for j in 0..n {
                let v = values[(i, j)];
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::InvalidInput(format!("exposure ({i}, {j}) = {v} is not non-negative")));
                }
                if i == j && v != 0.0 {
                    return Err(Error::InvalidInput(format!("non-zero self exposure at node {i}")));
                }
            }
        }
        Ok(Self { node_ids, values, assets: None })
    }

    pub fn with_assets(mut self, assets: Vec<f64>) -> Result<Self> {
        if assets.len() != self.node_ids.len() {
            return Err(Error::Shape { expected: self.node_ids.len(), actual: assets.len() });
        }
        self.assets = Some(assets);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.node_ids.len()
    }

    /// Row sums `E_i^out`.
    pub fn out_totals(&self) -> Vec<f64> {
        self.values.row_iter().map(|r| r.sum()).collect()
    }

    /// Column sums `E_j^in`.
    pub fn in_totals(&self) -> Vec<f64> {
        self.values.column_iter().map(|c| c.sum()).collect()
    }
}

/// Sums the four exposure channels per (lender, borrower) for one quarter.
///
/// Rows and columns follow the panel's institution order; absent pairs are 0.
pub fn aggregate_exposures(panel: &ExposurePanel, quarter: Quarter) -> Result<ExposureMatrix> {
    if panel.quarters.binary_search(&quarter).is_err() {
        return Err(Error::NotFound(format!("quarter {quarter} not in panel")));
    }
    let n = panel.institutions.len();
    let mut values = DMatrix::zeros(n, n);
    for rec in panel.records_in(quarter) {
        let i = panel.index[&rec.lender];
        let j = panel.index[&rec.borrower];
        values[(i, j)] = rec.total();
    }
    Ok(ExposureMatrix {
        node_ids: panel.institutions.iter().map(|x| x.id.clone()).collect(),
        values,
        assets: Some(panel.institutions.iter().map(|x| x.assets).collect()),
    })
}

/// How raw exposures become adjacency weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `E_ij / sqrt(E_i^out · E_j^in)`
    #[default]
    GeometricMean,
    /// `E_ij / ((E_i^out + E_j^in) / 2)`
    ArithmeticMean,
    /// `E_ij / max E`
    Max,
    /// `E_ij / sqrt(Assets_i · Assets_j)`
    AssetWeighted,
    /// `1{E_ij > 0}`
    Binary,
    /// `ln(1 + E_ij) / ln(1 + max E)`
    Log,
    /// `sqrt(E_ij) / sqrt(max E)`
    Sqrt,
}

impl Normalization {
    pub const ALL: [Normalization; 7] = [
        Normalization::GeometricMean,
        Normalization::ArithmeticMean,
        Normalization::Max,
        Normalization::AssetWeighted,
        Normalization::Binary,
        Normalization::Log,
        Normalization::Sqrt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::GeometricMean => "geometric_mean",
            Normalization::ArithmeticMean => "arithmetic_mean",
            Normalization::Max => "max",
            Normalization::AssetWeighted => "asset_weighted",
            Normalization::Binary => "binary",
            Normalization::Log => "log",
            Normalization::Sqrt => "sqrt",
        }
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Normalization::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Param(format!("unknown normalization {s:?}")))
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Network construction options.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GraphSpec {
    pub normalization: Normalization,
    /// Keep only exposures at or above this quantile of the non-zero
    /// exposures (`0.9` keeps the top 10%).
    pub threshold_quantile: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GraphDiagnostics {
    /// Nodes removed because they had no exposures in either direction.
    pub dropped: Vec<String>,
    /// Exposure cutoff applied by the threshold, if any.
    pub threshold_value: Option<f64>,
}

/// Symmetric weighted network with its adjacency, degree and Laplacian views.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    node_ids: Vec<String>,
    exposures: DMatrix<f64>,
    adjacency: DMatrix<f64>,
    degree: DVector<f64>,
    laplacian: DMatrix<f64>,
    diagnostics: GraphDiagnostics,
}

impl WeightedGraph {
    /// Builds a graph directly from a symmetric, non-negative adjacency matrix
    /// with zero diagonal. The adjacency doubles as the exposure matrix.
    pub fn from_adjacency(node_ids: Vec<String>, adjacency: DMatrix<f64>) -> Result<Self> {
        let n = node_ids.len();
        if adjacency.nrows() != n || adjacency.ncols() != n {
            return Err(Error::Shape { expected: n, actual: adjacency.nrows() });
        }
        for i in 0..n {
            if adjacency[(i, i)] != 0.0 {
                return Err(Error::InvalidInput(format!("self loop at node {i}")));
            }
            for j in (i + 1)..n {
                let (a, b) = (adjacency[(i, j)], adjacency[(j, i)]);
                if !(a.is_finite() && a >= 0.0) || a != b {
                    return Err(Error::InvalidInput(format!(
                        "adjacency must be symmetric and non-negative at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self::assemble(node_ids, adjacency.clone(), adjacency, GraphDiagnostics::default()))
    }

    fn assemble(
        node_ids: Vec<String>,
        exposures: DMatrix<f64>,
        adjacency: DMatrix<f64>,
        diagnostics: GraphDiagnostics,
    ) -> Self {
        let n = node_ids.len();
        let degree = DVector::from_iterator(n, adjacency.row_iter().map(|r| r.sum()));
        let mut laplacian = -adjacency.clone();
        for i in 0..n {
            laplacian[(i, i)] = degree[i];
        }
        Self { node_ids, exposures, adjacency, degree, laplacian, diagnostics }
    }

    pub fn n(&self) -> usize {
        self.node_ids.len()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn exposures(&self) -> &DMatrix<f64> {
        &self.exposures
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn degree(&self) -> &DVector<f64> {
        &self.degree
    }

    pub fn laplacian(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    pub fn diagnostics(&self) -> &GraphDiagnostics {
        &self.diagnostics
    }

    /// Undirected edges `(i, j, weight)` with `i < j` and positive weight.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n();
        (0..n).flat_map(move |i| {
            ((i + 1)..n).filter_map(move |j| {
                let w = self.adjacency[(i, j)];
                (w > 0.0).then_some((i, j, w))
            })
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Neighbor lists over non-zero edges.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n()];
        for (i, j, _) in self.edges() {
            out[i].push(j);
            out[j].push(i);
        }
        out
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let nbrs = self.neighbors();
        let mut label = vec![usize::MAX; self.n()];
        let mut comps = Vec::new();
        for start in 0..self.n() {
            if label[start] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut members = vec![start];
            label[start] = id;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in &nbrs[u] {
                    if label[v] == usize::MAX {
                        label[v] = id;
                        members.push(v);
                        queue.push_back(v);
                    }
                }
            }
            members.sort_unstable();
            comps.push(members);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.n() > 0 && self.components().len() == 1
    }

    /// Induced subgraph on `keep` (indices into this graph, kept in order).
    pub fn induced(&self, keep: &[usize]) -> WeightedGraph {
        let ids = keep.iter().map(|&i| self.node_ids[i].clone()).collect();
        let exposures = self.exposures.select_rows(keep).select_columns(keep);
        let adjacency = self.adjacency.select_rows(keep).select_columns(keep);
        Self::assemble(ids, exposures, adjacency, GraphDiagnostics::default())
    }

    /// Graph with node `i` and its incident edges removed.
    pub fn without_node(&self, i: usize) -> WeightedGraph {
        let keep: Vec<usize> = (0..self.n()).filter(|&k| k != i).collect();
        self.induced(&keep)
    }

    /// Same topology with every adjacency weight multiplied by `factor(i, j)`.
    pub fn reweighted(&self, factor: impl Fn(usize, usize) -> f64) -> WeightedGraph {
        let n = self.n();
        let mut adjacency = self.adjacency.clone();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    adjacency[(i, j)] *= factor(i, j);
                }
            }
        }
        Self::assemble(self.node_ids.clone(), self.exposures.clone(), adjacency, self.diagnostics.clone())
    }

    /// Mean adjacency weight over ordered node pairs, `Σ_{i≠j} a_ij / (n(n−1))`.
    pub fn average_bilateral_intensity(&self) -> f64 {
        let n = self.n() as f64;
        if n < 2.0 {
            return 0.0;
        }
        self.degree.sum() / (n * (n - 1.0))
    }
}

/// Type-7 (linear interpolation) sample quantile of sorted data.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Builds the normalized, symmetrized network for one exposure matrix.
pub fn build_graph(exposures: &ExposureMatrix, spec: &GraphSpec) -> Result<WeightedGraph> {
    let n = exposures.n();
    let mut e = exposures.values.clone();
    if e.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateNetwork("all exposures are zero".into()));
    }

    let mut diagnostics = GraphDiagnostics::default();
    if let Some(q) = spec.threshold_quantile {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Param(format!("threshold quantile {q} outside [0, 1]")));
        }
        let mut nz: Vec<f64> = e.iter().copied().filter(|&v| v > 0.0).collect();
        nz.sort_by(f64::total_cmp);
        let cutoff = quantile_sorted(&nz, q);
        e.apply(|v| {
            if *v < cutoff {
                *v = 0.0
            }
        });
        diagnostics.threshold_value = Some(cutoff);
    }

    let out: Vec<f64> = e.row_iter().map(|r| r.sum()).collect();
    let inn: Vec<f64> = e.column_iter().map(|c| c.sum()).collect();
    let keep: Vec<usize> = (0..n).filter(|&i| out[i] + inn[i] > 0.0).collect();
    diagnostics.dropped = (0..n)
        .filter(|i| keep.binary_search(i).is_err())
        .map(|i| exposures.node_ids[i].clone())
        .collect();
    if keep.len() < 2 {
        return Err(Error::DegenerateNetwork(format!("only {} node(s) with exposures", keep.len())));
    }

    let e = e.select_rows(&keep).select_columns(&keep);
    let out: Vec<f64> = keep.iter().map(|&i| out[i]).collect();
    let inn: Vec<f64> = keep.iter().map(|&i| inn[i]).collect();
    let m = keep.len();
    let max_e = e.max();

    let assets = match spec.normalization {
        Normalization::AssetWeighted => {
            let assets = exposures.assets.as_ref().ok_or_else(|| {
                Error::InvalidInput("asset_weighted normalization requires institution assets".into())
            })?;
            let a: Vec<f64> = keep.iter().map(|&i| assets[i]).collect();
            if a.iter().any(|&x| !(x > 0.0)) {
                return Err(Error::InvalidInput("assets must be positive".into()));
            }
            a
        }
        _ => Vec::new(),
    };

    let mut a = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let x = e[(i, j)];
            if x == 0.0 {
                continue;
            }
            a[(i, j)] = match spec.normalization {
                Normalization::GeometricMean => x / (out[i] * inn[j]).sqrt(),
                Normalization::ArithmeticMean => x / (0.5 * (out[i] + inn[j])),
                Normalization::Max => x / max_e,
                Normalization::AssetWeighted => x / (assets[i] * assets[j]).sqrt(),
                Normalization::Binary => 1.0,
                Normalization::Log => x.ln_1p() / max_e.ln_1p(),
                Normalization::Sqrt => (x / max_e).sqrt(),
            };
        }
    }
    let a = (&a + a.transpose()) * 0.5;

    let ids = keep.iter().map(|&i| exposures.node_ids[i].clone()).collect();
    Ok(WeightedGraph::assemble(ids, e, a, diagnostics))
}

/// Network-level summary statistics for one quarter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub lambda2: f64,
    pub n_banks: usize,
    pub density: f64,
    /// Mean unweighted shortest-path length; on a disconnected graph it is
    /// taken over the largest component. `None` when there are no edges.
    pub avg_path_length: Option<f64>,
    pub clustering: f64,
    pub herfindahl: f64,
    /// Mean number of counterparties per node.
    pub avg_bilateral_count: f64,
    /// Mean adjacency weight per ordered pair.
    pub avg_bilateral_intensity: f64,
    /// Mean assets/equity; `None` when no metadata was supplied.
    pub system_leverage: Option<f64>,
    pub connected: bool,
}

/// Computes density, path length, clustering, concentration, leverage and λ₂.
///
/// `meta` may be empty, in which case leverage is not reported; otherwise
/// every graph node must appear in it.
pub fn compute_stats(g: &WeightedGraph, meta: &[Institution]) -> Result<NetworkStats> {
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidInput("statistics need at least two nodes".into()));
    }
    let nbrs = g.neighbors();
    let m = g.edge_count();
    let nf = n as f64;
    let density = 2.0 * m as f64 / (nf * (nf - 1.0));

    let clustering = nbrs
        .iter()
        .map(|adj| {
            let k = adj.len();
            if k < 2 {
                return 0.0;
            }
            let mut triangles = 0usize;
            for (x, &u) in adj.iter().enumerate() {
                for &v in &adj[x + 1..] {
                    if g.adjacency()[(u, v)] > 0.0 {
                        triangles += 1;
                    }
                }
            }
            2.0 * triangles as f64 / (k * (k - 1)) as f64
        })
        .sum::<f64>()
        / nf;

    let components = g.components();
    let connected = components.len() == 1;
    let largest = components.iter().max_by_key(|c| c.len()).expect("n >= 2");
    let avg_path_length = mean_path_length(&nbrs, largest);

    let out: Vec<f64> = g.exposures().row_iter().map(|r| r.sum()).collect();
    let total: f64 = out.iter().sum();
    let herfindahl = out.iter().map(|x| (x / total).powi(2)).sum();

    let system_leverage = if meta.is_empty() {
        None
    } else {
        let by_id: HashMap<&str, &Institution> = meta.iter().map(|m| (m.id.as_str(), m)).collect();
        let mut sum = 0.0;
        for id in g.node_ids() {
            let inst = by_id
                .get(id.as_str())
                .ok_or_else(|| Error::NotFound(format!("metadata for institution {id}")))?;
            sum += inst.leverage();
        }
        Some(sum / nf)
    };

    let lambda2 = spectral::lambda2_lanczos(g, &spectral::LanczosOptions::default())?.lambda2;

    Ok(NetworkStats {
        lambda2,
        n_banks: n,
        density,
        avg_path_length,
        clustering,
        herfindahl,
        avg_bilateral_count: 2.0 * m as f64 / nf,
        avg_bilateral_intensity: g.average_bilateral_intensity(),
        system_leverage,
        connected,
    })
}

/// BFS all-pairs mean distance within `members` (one connected component).
fn mean_path_length(nbrs: &[Vec<usize>], members: &[usize]) -> Option<f64> {
    let k = members.len();
    if k < 2 {
        return None;
    }
    let mut dist = vec![usize::MAX; nbrs.len()];
    let mut total = 0usize;
    for &s in members {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &nbrs[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    total += dist[v];
                    queue.push_back(v);
                }
            }
        }
    }
    Some(total as f64 / (k * (k - 1)) as f64)
}
